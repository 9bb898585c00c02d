// Copyright 2026 The ltm-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ltm-lab: command line front end for the locality transfer matrix library.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 acceptance-check failure (only with --check).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ltm/common.hpp"
#include "ltm/experiments.hpp"

namespace {

namespace ex = ltm::experiments;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheck = 4;

int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void print_checks(const ex::RunResult &result) {
    for (const auto &c : result.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) {
            std::cout << " (" << c.detail << ")";
        }
        std::cout << '\n';
    }
}

int finish(const ex::RunResult &result, bool check) {
    print_checks(result);
    return check && !result.all_checks_passed() ? kExitCheck : 0;
}

void write_diagnostics(const std::string &dir, const json &diag) {
    std::cerr << diag.dump(2) << '\n';
    if (dir.empty()) {
        return;
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(std::filesystem::path(dir) / "diagnostics.json");
    if (out) {
        out << diag.dump(2) << '\n';
    }
}

template <class Fn>
int guarded(const std::string &out_dir, const json &context, Fn &&fn) {
    try {
        return fn();
    } catch (const ex::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ltm::NumericalFailure &e) {
        write_diagnostics(out_dir, {{"error", e.what()}, {"kind", "numerical-failure"},
                                    {"residual", e.residual()}, {"context", context}});
        return kExitNumerical;
    } catch (const ltm::SingularAbsorption &e) {
        write_diagnostics(out_dir, {{"error", e.what()}, {"kind", "singular-absorption"},
                                    {"radius", e.radius()}, {"context", context}});
        return kExitNumerical;
    } catch (const ltm::LimitExceeded &e) {
        write_diagnostics(out_dir, {{"error", e.what()}, {"kind", "limit-exceeded"}, {"context", context}});
        return kExitNumerical;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Locality transfer matrix toolkit: exact and deep-circuit variance of layered circuits"};
    app.require_subcommand(1);

    ex::SwapExampleOptions swap_options;
    std::string swap_out;
    bool swap_check = false;
    auto *swap = app.add_subcommand("swap-example", "Two-qubit SWAP circuit with a period-2 locality block");
    swap->add_option("--out", swap_out, "Output directory for CSV and JSON");
    swap->add_option("--mc-samples", swap_options.mc_samples, "Monte Carlo samples per depth (0 disables)");
    swap->add_option("--seed", swap_options.seed, "Master seed");
    swap->add_option("--threads", swap_options.threads, "Worker threads");
    swap->add_flag("--check", swap_check, "Exit with code 4 if a closed-form check fails");

    ex::Fig3Options fig3_options;
    fig3_options.threads = default_threads();
    std::string p_grid = "0.05:0.95:19";
    std::string fig3_out = "fig3-out";
    bool fig3_check = false;
    auto *fig3 = app.add_subcommand("fig3", "Noise-strength sweep for a rapid and a slow entangler");
    fig3->add_option("--n", fig3_options.n, "Number of qubits")->check(CLI::Range(3, 12));
    fig3->add_option("--p-grid", p_grid, "Noise grid a:b:k");
    fig3->add_option("--seed", fig3_options.seed, "Master seed");
    fig3->add_option("--out", fig3_out, "Output directory");
    fig3->add_option("--mc-samples", fig3_options.mc_samples, "Monte Carlo samples per grid point (0 disables)");
    fig3->add_option("--rapid-layers", fig3_options.rapid_layers, "Depth for the CNOT double cascade");
    fig3->add_option("--slow-layers", fig3_options.slow_layers, "Depth for the CRX cascade");
    fig3->add_option("--theta", fig3_options.theta, "CRX angle");
    fig3->add_option("--convergence-p", fig3_options.convergence_p, "Noise strength for the convergence table");
    fig3->add_option("--convergence-depth", fig3_options.convergence_max_depth, "Largest depth in the convergence table");
    fig3->add_option("--threads", fig3_options.threads, "Worker threads");
    fig3->add_flag("--check", fig3_check, "Exit with code 4 if a scaling check fails");

    std::string config_path;
    std::string run_out;
    bool run_check = false;
    int run_threads = 0;
    auto *run = app.add_subcommand("run", "Run a JSON-configured pipeline");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", run_out, "Output directory (overrides outputs.dir)");
    run->add_option("--threads", run_threads, "Worker threads (overrides threads)");
    run->add_flag("--check", run_check, "Exit with code 4 if a consistency check fails");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    std::string command;
    for (int i = 1; i < argc; ++i) {
        command += (i > 1 ? " " : "") + std::string(argv[i]);
    }

    if (*swap) {
        return guarded(swap_out, {{"command", "swap-example"}}, [&] {
            const ex::RunResult result = ex::run_swap_example(swap_options);
            if (!swap_out.empty()) {
                ex::write_outputs(result, swap_out, "swap_example", json{{"mc_samples", swap_options.mc_samples},
                                                                          {"seed", swap_options.seed}},
                                  "swap-example");
            } else {
                result.tables.front().table.write(std::cout);
            }
            return finish(result, swap_check);
        });
    }
    if (*fig3) {
        const json config{{"n", fig3_options.n},
                          {"p_grid", p_grid},
                          {"seed", fig3_options.seed},
                          {"mc_samples", fig3_options.mc_samples},
                          {"rapid_layers", fig3_options.rapid_layers},
                          {"slow_layers", fig3_options.slow_layers},
                          {"theta", fig3_options.theta},
                          {"convergence_p", fig3_options.convergence_p},
                          {"convergence_depth", fig3_options.convergence_max_depth}};
        return guarded(fig3_out, config, [&] {
            fig3_options.p_grid = ex::parse_grid(p_grid);
            const ex::RunResult result = ex::run_fig3(fig3_options);
            ex::write_outputs(result, fig3_out, "fig3", config, "fig3 " + command);
            return finish(result, fig3_check);
        });
    }
    std::string out_dir = run_out;
    return guarded(out_dir, {{"config", config_path}}, [&] {
        ex::ExperimentConfig cfg = ex::load_config(config_path);
        if (!run_out.empty()) {
            cfg.output_dir = run_out;
        }
        if (run_threads > 0) {
            cfg.threads = run_threads;
        }
        out_dir = cfg.output_dir;
        const ex::RunResult result = ex::run_generic(cfg);
        ex::write_outputs(result, cfg.output_dir, cfg.output_stem, cfg.raw, command);
        return finish(result, run_check);
    });
}
