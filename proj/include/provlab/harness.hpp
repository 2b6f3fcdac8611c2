#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "provlab/defs.hpp"
#include "provlab/environments.hpp"
#include "provlab/estimation.hpp"
#include "provlab/mdp.hpp"

namespace provlab {

/**
One bound-verification record. `holds` is always recomputable from the
claimed and measured columns at the stated tolerance. Runtime is reported
in the JSON summary only; the CSV body stays byte-identical across reruns.
*/
struct ResultRow {
    std::string experiment;
    std::string instance;
    double claimed = 0.0;
    double measured = 0.0;
    bool holds = false;
    std::string detail;
};

struct ExperimentConfig {
    std::string experiment;
    std::optional<EnvSpec> env;
    std::optional<std::string> model_path;
    nlohmann::json parameters;  // experiment-specific knobs
    std::vector<std::uint64_t> seeds;
    std::string output;  // path prefix for .csv / .json emission

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

struct RunSummary {
    std::string experiment;
    std::vector<ResultRow> rows;
    bool all_hold = true;
    double runtime_seconds = 0.0;
    nlohmann::json details;  // experiment-specific extras (fits, coverage, ...)

    nlohmann::json to_json() const;
};

// Executes the named experiment over all seeds and, when config.output is
// nonempty, writes <output>.csv plus <output>.json (and experiment-specific
// companion tables). Throws std::invalid_argument on malformed configs.
RunSummary run(const ExperimentConfig& config);

// Sweeps one axis (epsilon | epsilon_margin | n | horizon | d), fits the
// log-log slope and reports fitted vs predicted exponents. Refuses to fit
// with fewer than 4 axis points.
RunSummary scaling_sweep(const ExperimentConfig& config);

// 0 when every row holds, 1 otherwise.
int exit_code(const RunSummary& summary);

// ---- fixtures shared by experiments and the test suites ----

// 1-D estimation fixture: states on [0, 1] carrying single-atom payloads,
// one action, a kinked Lipschitz success probability, horizon 1.
MdpModel make_line_model(int n_states);

// d-dimensional variant on a small grid (sup metric), horizon 1.
MdpModel make_grid_model(int dim, int side);

// ---- small utilities ----

int worker_count();
void parallel_for(int n, const std::function<void(int)>& fn);

std::string csv_escape(const std::string& field);
// RFC 4180 body: comma-separated, CRLF line endings.
void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows);

}  // namespace provlab
