#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "provlab/environments.hpp"
#include "provlab/harness.hpp"
#include "provlab/mdp.hpp"
#include "provlab/planners.hpp"

using namespace provlab;

namespace {

int cmd_run(const std::string& config_path, const std::string& output) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (!output.empty()) cfg.output = output;
    const RunSummary summary = run(cfg);
    std::cout << summary.to_json().dump(2) << "\n";
    for (const auto& r : summary.rows)
        if (!r.holds)
            std::cout << "FAIL " << r.instance << " claimed=" << r.claimed
                      << " measured=" << r.measured << "\n";
    return exit_code(summary);
}

int cmd_sweep(const std::string& config_path, const std::string& output) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (!output.empty()) cfg.output = output;
    const RunSummary summary = scaling_sweep(cfg);
    std::cout << summary.to_json().dump(2) << "\n";
    return exit_code(summary);
}

int cmd_gen_env(const std::string& spec_path, const std::string& out_path) {
    std::ifstream is(spec_path);
    if (!is) {
        std::cerr << "cannot open " << spec_path << "\n";
        return 2;
    }
    nlohmann::json j;
    is >> j;
    const EnvInstance inst = generate(EnvSpec::from_json(j));
    nlohmann::json out = inst.model.to_json();
    out["start_weights"] = inst.start.weights;
    std::ofstream os(out_path);
    os << out.dump(2) << "\n";
    std::cout << "wrote " << out_path << " (" << inst.model.num_states() << " states, B="
              << inst.model.horizon << ")\n";
    return 0;
}

int cmd_solve(const std::string& model_path, const std::string& start_name) {
    std::ifstream is(model_path);
    if (!is) {
        std::cerr << "cannot open " << model_path << "\n";
        return 2;
    }
    nlohmann::json j;
    is >> j;
    const MdpModel m = MdpModel::from_json(j);
    const ValueTables t = solve_exact(m);
    const AttainmentReport att = check_attainment(m, t);

    if (!start_name.empty()) {
        const int x0 = m.state_index(start_name);
        if (x0 < 0) {
            std::cerr << "unknown state '" << start_name << "'\n";
            return 2;
        }
        std::cout.precision(12);
        std::cout << "v*[" << m.horizon << "](" << start_name << ") = " << t.v[m.horizon][x0]
                  << "\n";
        return 0;
    }
    std::cout.precision(12);
    std::cout << "state,v_star_B,optimal_action\n";
    for (int x = 0; x < m.num_states(); ++x)
        std::cout << m.states[x] << ',' << t.v[m.horizon][x] << ','
                  << m.actions[x][t.amax[m.horizon][x]] << "\n";
    std::cout << "# attainment violations: " << att.violations.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"provlab: exact reachability values, certificates, planners and "
                 "bound-verification experiments on finite proof-search models"};
    app.require_subcommand(1);

    std::string config_path, output, spec_path, out_path = "model.json", model_path,
                                                start_name;

    auto* run_cmd = app.add_subcommand("run", "run an experiment config (JSON)");
    run_cmd->add_option("config", config_path, "config file")->required();
    run_cmd->add_option("-o,--output", output, "output path prefix (overrides config)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run a scaling sweep config (JSON)");
    sweep_cmd->add_option("config", config_path, "config file")->required();
    sweep_cmd->add_option("-o,--output", output, "output path prefix (overrides config)");

    auto* gen_cmd = app.add_subcommand("gen-env", "generate a model from an env spec");
    gen_cmd->add_option("spec", spec_path, "env spec file (JSON)")->required();
    gen_cmd->add_option("-o,--output", out_path, "model output path");

    auto* solve_cmd = app.add_subcommand("solve", "solve a model exactly");
    solve_cmd->add_option("model", model_path, "model file (JSON)")->required();
    solve_cmd->add_option("--start", start_name, "report only this start state");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(config_path, output);
        if (sweep_cmd->parsed()) return cmd_sweep(config_path, output);
        if (gen_cmd->parsed()) return cmd_gen_env(spec_path, out_path);
        if (solve_cmd->parsed()) return cmd_solve(model_path, start_name);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
