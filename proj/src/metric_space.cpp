#include "provlab/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace provlab {

namespace {

void validate_matrix(const std::vector<numvec>& d) {
    const int n = static_cast<int>(d.size());
    const double tol = 1e-9;
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(d[i].size()) != n)
            throw std::invalid_argument("MetricSpace: distance matrix is not square");
        if (std::abs(d[i][i]) > tol)
            throw std::invalid_argument("MetricSpace: nonzero diagonal entry");
        for (int j = 0; j < n; ++j) {
            if (d[i][j] < -tol)
                throw std::invalid_argument("MetricSpace: negative distance");
            if (std::abs(d[i][j] - d[j][i]) > tol)
                throw std::invalid_argument("MetricSpace: asymmetric distance matrix");
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (d[i][j] > d[i][k] + d[k][j] + tol)
                    throw std::invalid_argument("MetricSpace: triangle inequality violated");
}

}  // namespace

MetricSpace MetricSpace::from_matrix(std::vector<std::string> names,
                                     std::vector<numvec> dist) {
    if (names.size() != dist.size())
        throw std::invalid_argument("MetricSpace: names/matrix size mismatch");
    validate_matrix(dist);
    MetricSpace s;
    s.names_ = std::move(names);
    s.matrix_ = std::move(dist);
    double diam = 0.0;
    for (const auto& row : s.matrix_)
        for (double v : row) diam = std::max(diam, v);
    s.diameter_ = diam;
    return s;
}

MetricSpace MetricSpace::grid(const std::vector<int>& dims, double spacing,
                              GridMetric metric) {
    if (dims.empty() || spacing <= 0.0)
        throw std::invalid_argument("MetricSpace::grid: bad dimensions or spacing");
    long total = 1;
    for (int d : dims) {
        if (d < 1) throw std::invalid_argument("MetricSpace::grid: bad dimension");
        total *= d;
        if (total > 2'000'000) throw std::invalid_argument("MetricSpace::grid: too many points");
    }
    MetricSpace s;
    s.metric_ = metric;
    s.names_.reserve(total);
    s.coords_.reserve(total);
    std::vector<int> idx(dims.size(), 0);
    for (long p = 0; p < total; ++p) {
        numvec c(dims.size());
        for (std::size_t a = 0; a < dims.size(); ++a) c[a] = idx[a] * spacing;
        s.coords_.push_back(std::move(c));
        s.names_.push_back("g" + std::to_string(p));
        for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
            if (++idx[a] < dims[a]) break;
            idx[a] = 0;
        }
    }
    // diameter is attained at opposite corners of the box
    double diam = 0.0;
    if (metric == GridMetric::sup) {
        for (std::size_t a = 0; a < dims.size(); ++a)
            diam = std::max(diam, (dims[a] - 1) * spacing);
    } else {
        double ss = 0.0;
        for (std::size_t a = 0; a < dims.size(); ++a) {
            const double e = (dims[a] - 1) * spacing;
            ss += e * e;
        }
        diam = std::sqrt(ss);
    }
    s.diameter_ = diam;
    return s;
}

double MetricSpace::dist(int i, int j) const {
    if (!matrix_.empty()) return matrix_[i][j];
    const numvec& a = coords_[i];
    const numvec& b = coords_[j];
    if (metric_ == GridMetric::sup) {
        double m = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
        return m;
    }
    double ss = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        ss += d * d;
    }
    return std::sqrt(ss);
}

int MetricSpace::index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (names_[i] == name) return i;
    return -1;
}

MetricSpace MetricSpace::from_json(const nlohmann::json& j) {
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        std::vector<int> dims = g.at("dims").get<std::vector<int>>();
        const double spacing = g.at("spacing").get<double>();
        const std::string m = g.value("metric", "euclidean");
        GridMetric metric;
        if (m == "euclidean")
            metric = GridMetric::euclidean;
        else if (m == "sup")
            metric = GridMetric::sup;
        else
            throw std::invalid_argument("MetricSpace: unknown grid metric '" + m + "'");
        return grid(dims, spacing, metric);
    }
    if (!j.contains("points") || !j.contains("dist"))
        throw std::invalid_argument("MetricSpace: expected 'grid' or 'points'+'dist'");
    auto names = j.at("points").get<std::vector<std::string>>();
    auto dist = j.at("dist").get<std::vector<numvec>>();
    return from_matrix(std::move(names), std::move(dist));
}

nlohmann::json MetricSpace::to_json() const {
    nlohmann::json j;
    if (is_grid()) {
        // re-emit as an explicit matrix-free description is lossy for shape;
        // emit points + coordinates-derived matrix only for small spaces
        j["points"] = names_;
        std::vector<numvec> d(size(), numvec(size(), 0.0));
        for (int i = 0; i < size(); ++i)
            for (int k = 0; k < size(); ++k) d[i][k] = dist(i, k);
        j["dist"] = d;
        return j;
    }
    j["points"] = names_;
    j["dist"] = matrix_;
    return j;
}

EpsNet build_greedy_net(const MetricSpace& space, double radius) {
    if (radius <= 0.0) throw std::invalid_argument("build_greedy_net: radius must be positive");
    EpsNet net;
    net.radius = radius;
    const int n = space.size();
    if (n == 0) return net;

    // farthest-first traversal; the selection order is radius-independent,
    // the radius only decides where to stop
    numvec nearest(n, std::numeric_limits<double>::infinity());
    intvec owner(n, -1);
    int next = 0;  // first center: lowest index
    while (true) {
        const int c = next;
        net.centers.push_back(c);
        for (int i = 0; i < n; ++i) {
            const double d = space.dist(i, c);
            if (d < nearest[i]) {
                nearest[i] = d;
                owner[i] = c;
            }
        }
        double far = -1.0;
        next = -1;
        for (int i = 0; i < n; ++i) {
            if (nearest[i] > far) {  // strict >: ties keep the lowest index
                far = nearest[i];
                next = i;
            }
        }
        if (far <= radius) break;
    }
    net.assignment = std::move(owner);
    return net;
}

int covering_number(const MetricSpace& space, double radius) {
    return static_cast<int>(build_greedy_net(space, radius).centers.size());
}

DoublingFit fit_doubling_dimension(const MetricSpace& space, const numvec& radii) {
    if (radii.size() < 3)
        throw std::invalid_argument("fit_doubling_dimension: need >= 3 radii");
    double lo = radii[0], hi = radii[0];
    for (double r : radii) {
        if (r <= 0.0) throw std::invalid_argument("fit_doubling_dimension: radii must be positive");
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    if (hi < 2.0 * lo)
        throw std::invalid_argument("fit_doubling_dimension: radii must span at least a factor of 2");

    DoublingFit out;
    numvec x, y;
    for (double r : radii) {
        const int c = covering_number(space, r);
        out.counts.emplace_back(r, c);
        x.push_back(std::log(1.0 / r));
        y.push_back(std::log(static_cast<double>(c)));
    }
    const LineFit fit = least_squares(x, y);
    out.dimension = fit.slope;
    out.residual = fit.residual;
    return out;
}

double lipschitz_entropy_bound(double radius, double lip_const,
                               double doubling_dim, double c_domain) {
    if (radius <= 0.0 || radius >= 1.0)
        throw std::invalid_argument("lipschitz_entropy_bound: radius must lie in (0, 1)");
    if (lip_const <= 0.0 || doubling_dim <= 0.0 || c_domain <= 0.0)
        throw std::invalid_argument("lipschitz_entropy_bound: inputs must be positive");
    return c_domain * std::pow(lip_const / radius, doubling_dim) * std::log(1.0 / radius);
}

}  // namespace provlab
