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

#ifndef LTM_EXPERIMENTS_HPP
#define LTM_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltm/channel.hpp"
#include "ltm/ltm.hpp"
#include "ltm/partition.hpp"
#include "ltm/stats.hpp"

namespace ltm::experiments {

using nlohmann::json;

/// Raised for unresolvable or malformed experiment configurations.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kDefaultCrxTheta = std::numbers::pi / 20.0;

struct CircuitSpec {
    std::string entangler = "identity";  // cnot-double-cascade, crx-cascade, swap, custom-kraus-file, channel, identity
    double theta = kDefaultCrxTheta;
    std::string path;
    json channel;  // inline description for entangler == "channel"
};

struct NoiseSpec {
    bool enabled = false;
    double p = 0.0;
    std::string fixed_point = "ghz";  // ghz, maximally-mixed, custom
    std::string path;
};

struct ObservableSpec {
    std::string kind = "zz-chain";  // zz-chain, single-pauli, custom
    std::optional<double> h;        // zz-chain coupling; default normalizes (l_ghz, l_H) to 1
    bool periodic = true;
    std::string pauli;  // single-pauli label such as "ZIZ"
    std::string path;
};

struct StateSpec {
    std::string kind = "zero";  // zero, maximally-mixed, ghz, custom
    std::string path;
};

struct QresnetSpec {
    bool enabled = false;
    std::string generator = "zz-chain";  // zz-chain or a path to a Hermitian matrix
    double sigma_prefactor = 1.0;        // sigma^2 = c log(n) / (||G||_2^2 L)
    std::size_t samples = 0;
    int quadrature_nodes = 16;
};

struct ChecksSpec {
    double mc_sigma = 4.0;
    double tolerance = 1e-9;
};

struct ExperimentConfig {
    std::string name = "experiment";
    Partition partition;
    CircuitSpec circuit;
    NoiseSpec noise;
    ObservableSpec observable;
    StateSpec initial_state;
    std::vector<std::size_t> l_grid;
    std::vector<double> p_grid;  // empty: single point at noise.p (or noiseless)
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string ltm_method = "auto";  // auto, exact, sampled, structured
    std::size_t samples_per_block = 64;
    bool deep = true;
    bool lower_bound = true;
    std::vector<Pattern> lower_bound_patterns;  // empty: support of l_H
    std::string unravelling_path;
    QresnetSpec qresnet;
    ChecksSpec checks;
    std::string output_dir = ".";
    std::string output_stem;
    int threads = 1;
    std::string base_dir;
    json raw;
};

/// Throws ConfigError on any schema or resolution problem.
ExperimentConfig parse_config(const json &j, const std::string &base_dir = "");
ExperimentConfig load_config(const std::string &path);

CMatrix ghz_state(int n);
CMatrix zero_state(const Partition &partition);
CMatrix maximally_mixed(const Partition &partition);
/// h * sum_k Z_k Z_{k+1} with unnormalized Paulis; periodic adds Z_{n-1} Z_0.
CMatrix zz_chain(int n, double h, bool periodic = true);
/// Coupling that makes (l_ghz, l_H) = 1 for the periodic chain.
double normalized_zz_coupling(int n);
/// Tensor product of unnormalized Paulis from a label over {I, X, Y, Z}.
CMatrix pauli_string(const std::string &label);

/// Builds a channel from a JSON description; see README for the schema.
Channel channel_from_json(const json &j, const Partition &partition, const std::string &base_dir = "");
Channel build_entangler(const CircuitSpec &spec, const Partition &partition, const std::string &base_dir = "");

/// RFC-4180 table with CRLF line endings and round-trip number formatting.
class CsvTable {
  public:
    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add_row(std::vector<std::string> row);
    const std::vector<std::string> &header() const { return header_; }
    const std::vector<std::vector<std::string>> &rows() const { return rows_; }
    void write(std::ostream &out) const;
    std::string str() const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string format_double(double x);
std::string format_optional(const std::optional<double> &x);

std::string fnv1a_hex(const std::string &text);
std::string config_hash(const json &config);
std::string environment_hash();

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct NamedTable {
    std::string suffix;  // appended to the output stem; empty for the main table
    CsvTable table;
};

struct RunResult {
    std::vector<NamedTable> tables;
    json report;
    std::vector<CheckResult> checks;
    bool all_checks_passed() const;
};

/// Fit of log|Var^L - Var^inf| against L over the leading run of depths whose
/// deviation exceeds the floor. Empty when fewer than three points qualify.
std::optional<LinearFit> convergence_fit(const std::vector<double> &deviations, double floor);

struct SwapExampleOptions {
    CMatrix sigma;  // single-qubit state on the second subsystem; default |0><0|
    CMatrix h;      // traceless single-qubit observable; default Z
    std::size_t max_depth = 8;
    std::size_t mc_samples = 4000;
    std::uint64_t seed = 7;
    int threads = 1;
};
RunResult run_swap_example(const SwapExampleOptions &options = {});

struct Fig3Options {
    int n = 6;
    std::vector<double> p_grid;
    std::uint64_t seed = 1;
    std::size_t mc_samples = 0;
    std::size_t rapid_layers = 8;
    std::size_t slow_layers = 20;
    double theta = kDefaultCrxTheta;
    std::optional<double> h;
    double convergence_p = 0.1;
    std::size_t convergence_max_depth = 60;
    double convergence_floor = 1e-12;
    int threads = 1;
};

/// Analytic deep values for one entangler across a p grid.
struct Fig3Curve {
    std::string entangler;
    std::size_t layers = 0;
    double normalization = 0.0;
    std::vector<double> p;
    std::vector<double> var_inf;
    std::vector<double> var_inf_decomposition;
    std::vector<double> var_layers;
    double convergence_var_inf = 0.0;
    std::vector<double> convergence_var_layers;  // Var^L at convergence_p, L = 1..
    std::vector<double> convergence_deviation;   // |Var^L - Var^inf|
    std::optional<LinearFit> convergence;
};

Fig3Curve fig3_curve(const std::string &entangler, const Fig3Options &options);
/// Log-log slope of Var^inf(p) over grid points inside [lo, hi].
std::optional<LinearFit> loglog_slope(const Fig3Curve &curve, double lo, double hi);
/// Largest |Var^inf / (norm p/(2-p)) - 1| over grid points inside [lo, hi].
std::optional<double> linear_prediction_deviation(const Fig3Curve &curve, double lo, double hi);

RunResult run_fig3(const Fig3Options &options);
RunResult run_generic(const ExperimentConfig &config);

/// Parses "a:b:k" into k evenly spaced points from a to b inclusive.
std::vector<double> parse_grid(const std::string &text);

/// Writes <stem><suffix>.csv per table and a <stem>.json sidecar.
void write_outputs(const RunResult &result, const std::string &dir, const std::string &stem, const json &config,
                   const std::string &command);

} // namespace ltm::experiments

#endif
