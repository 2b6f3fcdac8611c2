#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "provlab/defs.hpp"

namespace provlab {

/**
A finite metric space: either an explicit symmetric distance matrix or an
axis-aligned grid with the Euclidean or supremum metric. Grid spaces keep
coordinates and evaluate distances on demand, which keeps large grids cheap.

Immutable after construction; safe to share across threads.
*/
class MetricSpace {
public:
    enum class GridMetric { euclidean, sup };

    MetricSpace() = default;

    // Validates symmetry, zero diagonal, nonnegativity and the triangle
    // inequality (tolerance 1e-9). Throws std::invalid_argument otherwise.
    static MetricSpace from_matrix(std::vector<std::string> names,
                                   std::vector<numvec> dist);
    static MetricSpace grid(const std::vector<int>& dims, double spacing,
                            GridMetric metric);

    // {"points": [...], "dist": [[...]]} or
    // {"grid": {"dims": [n1,...], "spacing": s, "metric": "euclidean"|"sup"}}
    static MetricSpace from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    int size() const { return static_cast<int>(names_.size()); }
    double dist(int i, int j) const;
    double diameter() const { return diameter_; }
    const std::string& name(int i) const { return names_[i]; }
    int index_of(const std::string& name) const;  // -1 when absent
    bool is_grid() const { return !coords_.empty(); }
    const numvec& coords(int i) const { return coords_[i]; }

private:
    std::vector<std::string> names_;
    std::vector<numvec> matrix_;               // empty for grid spaces
    std::vector<numvec> coords_;               // empty for matrix spaces
    GridMetric metric_ = GridMetric::euclidean;
    double diameter_ = 0.0;
};

/**
Greedy (farthest-first) net. `centers` is the selection order; `assignment`
maps every point to its covering center. Centers are pairwise more than
`radius` apart and every point lies within `radius` of its assigned center.
*/
struct EpsNet {
    double radius = 0.0;
    intvec centers;
    intvec assignment;
};

EpsNet build_greedy_net(const MetricSpace& space, double radius);

/**
Size of the greedy net at the given radius. This is a 2-approximation
certificate of the covering number: greedy nets sandwich the true value
between N(radius) and N(radius/2). The exact minimum cover is NP-hard and
is not computed.
*/
int covering_number(const MetricSpace& space, double radius);

struct DoublingFit {
    double dimension = 0.0;
    double residual = 0.0;
    std::vector<std::pair<double, int>> counts;  // (radius, covering number)
};

// Least-squares slope of log covering_number against log(1/radius).
// Requires >= 3 radii spanning at least a factor of 2.
DoublingFit fit_doubling_dimension(const MetricSpace& space, const numvec& radii);

// Metric-entropy bound for Lipschitz classes on a doubling domain:
// c_domain * (lip_const / radius)^doubling_dim * log(1 / radius).
double lipschitz_entropy_bound(double radius, double lip_const,
                               double doubling_dim, double c_domain);

}  // namespace provlab
