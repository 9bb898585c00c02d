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

#include "ltm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ltm/gates.hpp"
#include "ltm/local_ops.hpp"
#include "ltm/monte_carlo.hpp"
#include "ltm/parallel.hpp"
#include "ltm/rng.hpp"
#include "ltm/serialize.hpp"
#include "ltm/spectral.hpp"
#include "ltm/variance.hpp"

namespace ltm::experiments {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kGridStream = 0x6A1D5EEDULL;
constexpr std::uint64_t kQresnetStream = 0x9E5E7ULL;
constexpr std::uint64_t kSampledLtmStream = 0x5A3B1EDULL;

std::string resolve_path(const std::string &base_dir, const std::string &path) {
    if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) {
        return path;
    }
    return (fs::path(base_dir) / path).string();
}

bool all_qubits(const Partition &partition) {
    const auto &dims = partition.dims();
    return std::all_of(dims.begin(), dims.end(), [](int d) { return d == 2; });
}

int require_qubits(const Partition &partition, const std::string &what) {
    if (!all_qubits(partition)) {
        throw ConfigError(what + " needs a partition of qubits");
    }
    return partition.num_subsystems();
}

void require_dim(const CMatrix &m, const Partition &partition, const std::string &what) {
    const auto d = static_cast<Eigen::Index>(partition.dim());
    if (m.rows() != d || m.cols() != d) {
        throw ConfigError(what + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                          ", expected " + std::to_string(d) + "x" + std::to_string(d));
    }
}

CMatrix load_matrix_file(const std::string &path) {
    const json j = load_json_file(path);
    return matrix_from_json(j.is_object() ? j.at("matrix") : j);
}

bool is_unital(const Channel &ch) {
    if (ch.is_unitary()) {
        return true;
    }
    const auto d = static_cast<Eigen::Index>(ch.dim());
    const CMatrix id = CMatrix::Identity(d, d);
    return (ch.apply(id) - id).cwiseAbs().maxCoeff() < 1e-10;
}

CMatrix state_by_id(const std::string &id, const Partition &partition) {
    if (id == "ghz") {
        return ghz_state(require_qubits(partition, "ghz state"));
    }
    if (id == "maximally-mixed") {
        return maximally_mixed(partition);
    }
    if (id == "zero") {
        return zero_state(partition);
    }
    throw ConfigError("unknown state '" + id + "'");
}

CMatrix state_from_json(const json &j, const Partition &partition, const std::string &base_dir) {
    CMatrix rho;
    if (j.is_string()) {
        rho = state_by_id(j.get<std::string>(), partition);
    } else if (j.is_object() && j.contains("path")) {
        rho = load_matrix_file(resolve_path(base_dir, j.at("path").get<std::string>()));
    } else {
        rho = matrix_from_json(j);
    }
    require_dim(rho, partition, "state");
    if (!is_density_matrix(rho, 1e-9)) {
        throw ConfigError("state is not a density matrix");
    }
    return rho;
}

CMatrix named_gate(const std::string &name, const json &g) {
    const double theta = g.value("theta", 0.0);
    if (name == "x") return gates::x();
    if (name == "y") return gates::y();
    if (name == "z") return gates::z();
    if (name == "h") return gates::h();
    if (name == "s") return gates::s();
    if (name == "rx") return gates::rx(theta);
    if (name == "ry") return gates::ry(theta);
    if (name == "rz") return gates::rz(theta);
    if (name == "cnot") return gates::cnot();
    if (name == "cz") return gates::cz();
    if (name == "swap") return gates::swap();
    if (name == "crx") return gates::crx(theta);
    throw ConfigError("unknown gate '" + name + "'");
}

Channel single_qubit_channel(const json &j, const std::string &base_dir) {
    return channel_from_json(j, Partition::qubits(1), base_dir);
}

Channel kraus_or_unitary(std::vector<CMatrix> ops) {
    if (ops.size() == 1 && is_unitary(ops.front(), 1e-10)) {
        return Channel::unitary(std::move(ops.front()));
    }
    return Channel::kraus(std::move(ops));
}

std::vector<std::size_t> parse_l_grid(const json &j) {
    std::vector<std::size_t> out;
    if (j.is_number_integer()) {
        out.push_back(j.get<std::size_t>());
    } else if (j.is_array()) {
        for (const auto &v : j) {
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw ConfigError("L_grid entries must be non-negative integers");
            }
            out.push_back(v.get<std::size_t>());
        }
    } else {
        throw ConfigError("L must be an integer or an array of integers");
    }
    return out;
}

std::vector<double> parse_p_grid(const json &j) {
    std::vector<double> out;
    if (j.is_string()) {
        out = parse_grid(j.get<std::string>());
    } else if (j.is_array()) {
        for (const auto &v : j) {
            out.push_back(v.get<double>());
        }
    } else {
        throw ConfigError("p_grid must be an array or an 'a:b:k' string");
    }
    for (double p : out) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError("p_grid entries must lie in [0, 1]");
        }
    }
    return out;
}

const std::set<std::string> kTopLevelKeys = {
    "name",          "partition", "circuit", "noise",       "observable", "initial_state", "L",       "L_grid",
    "p_grid",        "n_samples", "seed",    "ltm",         "deep",       "lower_bound",   "ensemble",   "qresnet",
    "checks",        "outputs",   "threads"};

ExperimentConfig parse_config_impl(const json &j, const std::string &base_dir) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    for (const auto &[key, value] : j.items()) {
        if (!kTopLevelKeys.count(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.base_dir = base_dir;
    cfg.name = j.value("name", cfg.name);
    cfg.output_stem = cfg.name;

    if (!j.contains("partition")) {
        throw ConfigError("config needs a 'partition'");
    }
    const json &part = j.at("partition");
    if (part.contains("qubits")) {
        cfg.partition = Partition::qubits(part.at("qubits").get<int>());
    } else {
        cfg.partition = partition_from_json(part);
    }

    if (j.contains("circuit")) {
        const json &c = j.at("circuit");
        cfg.circuit.entangler = c.at("entangler").get<std::string>();
        cfg.circuit.theta = c.value("theta", kDefaultCrxTheta);
        cfg.circuit.path = resolve_path(base_dir, c.value("path", std::string()));
        if (c.contains("channel")) {
            cfg.circuit.channel = c.at("channel");
        }
    }
    if (j.contains("noise")) {
        const json &n = j.at("noise");
        cfg.noise.enabled = true;
        cfg.noise.p = n.value("p", 0.0);
        cfg.noise.fixed_point = n.value("fixed_point", cfg.noise.fixed_point);
        cfg.noise.path = resolve_path(base_dir, n.value("path", std::string()));
        if (!(cfg.noise.p >= 0.0 && cfg.noise.p <= 1.0)) {
            throw ConfigError("noise.p must lie in [0, 1]");
        }
    }
    if (j.contains("observable")) {
        const json &o = j.at("observable");
        cfg.observable.kind = o.value("kind", cfg.observable.kind);
        if (o.contains("h") && !o.at("h").is_null()) {
            cfg.observable.h = o.at("h").get<double>();
        }
        cfg.observable.periodic = o.value("periodic", true);
        cfg.observable.pauli = o.value("pauli", std::string());
        cfg.observable.path = resolve_path(base_dir, o.value("path", std::string()));
    }
    if (j.contains("initial_state")) {
        const json &s = j.at("initial_state");
        cfg.initial_state.kind = s.value("kind", cfg.initial_state.kind);
        cfg.initial_state.path = resolve_path(base_dir, s.value("path", std::string()));
    }

    if (j.contains("L_grid")) {
        cfg.l_grid = parse_l_grid(j.at("L_grid"));
    } else if (j.contains("L")) {
        cfg.l_grid = parse_l_grid(j.at("L"));
    }
    if (cfg.l_grid.empty()) {
        throw ConfigError("config needs a non-empty 'L' or 'L_grid'");
    }
    if (j.contains("p_grid")) {
        cfg.p_grid = parse_p_grid(j.at("p_grid"));
        if (cfg.p_grid.empty()) {
            throw ConfigError("p_grid must not be empty");
        }
        if (!cfg.noise.enabled) {
            throw ConfigError("p_grid needs a 'noise' block naming the fixed point");
        }
    }

    cfg.n_samples = j.value("n_samples", std::size_t{0});
    if (cfg.n_samples != 0 && cfg.n_samples < 100) {
        throw ConfigError("n_samples must be 0 or at least 100");
    }
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.threads = std::max(1, j.value("threads", 1));

    if (j.contains("ltm")) {
        const json &l = j.at("ltm");
        cfg.ltm_method = l.value("method", cfg.ltm_method);
        cfg.samples_per_block = l.value("samples_per_block", cfg.samples_per_block);
        static const std::set<std::string> methods = {"auto", "exact", "sampled", "structured"};
        if (!methods.count(cfg.ltm_method)) {
            throw ConfigError("unknown ltm.method '" + cfg.ltm_method + "'");
        }
        if (cfg.samples_per_block == 0) {
            throw ConfigError("ltm.samples_per_block must be positive");
        }
    }
    cfg.deep = j.value("deep", true);
    if (j.contains("lower_bound")) {
        const json &lb = j.at("lower_bound");
        if (lb.is_boolean()) {
            cfg.lower_bound = lb.get<bool>();
        } else {
            cfg.lower_bound = lb.value("enabled", true);
            for (const auto &bits : lb.value("patterns", json::array())) {
                cfg.lower_bound_patterns.push_back(
                    cfg.partition.pattern_from_bits(bits.get<std::vector<int>>()));
            }
        }
    }
    if (j.contains("ensemble")) {
        cfg.unravelling_path = resolve_path(base_dir, j.at("ensemble").at("unravelling").get<std::string>());
    }
    if (j.contains("qresnet")) {
        const json &q = j.at("qresnet");
        cfg.qresnet.enabled = q.value("enabled", true);
        cfg.qresnet.generator = q.value("generator", cfg.qresnet.generator);
        if (cfg.qresnet.generator != "zz-chain") {
            cfg.qresnet.generator = resolve_path(base_dir, cfg.qresnet.generator);
        }
        cfg.qresnet.sigma_prefactor = q.value("sigma_prefactor", cfg.qresnet.sigma_prefactor);
        cfg.qresnet.samples = q.value("samples", cfg.qresnet.samples);
        cfg.qresnet.quadrature_nodes = q.value("quadrature_nodes", cfg.qresnet.quadrature_nodes);
        if (cfg.qresnet.sigma_prefactor < 0.0 || cfg.qresnet.quadrature_nodes < 1) {
            throw ConfigError("qresnet.sigma_prefactor must be >= 0 and quadrature_nodes >= 1");
        }
        if (cfg.qresnet.samples != 0 && cfg.qresnet.samples < 100) {
            throw ConfigError("qresnet.samples must be 0 or at least 100");
        }
    }
    if (j.contains("checks")) {
        cfg.checks.mc_sigma = j.at("checks").value("mc_sigma", cfg.checks.mc_sigma);
        cfg.checks.tolerance = j.at("checks").value("tolerance", cfg.checks.tolerance);
    }
    if (j.contains("outputs")) {
        cfg.output_dir = j.at("outputs").value("dir", cfg.output_dir);
        cfg.output_stem = j.at("outputs").value("stem", cfg.output_stem);
    }
    if (cfg.n_samples > 0 && cfg.partition.dim() > 4096) {
        throw ConfigError("Monte Carlo columns are limited to dimension 4096");
    }
    return cfg;
}

} // namespace

// ---------------------------------------------------------------------------
// Built-in states, observables and channels

CMatrix ghz_state(int n) {
    if (n < 1 || n > 12) {
        throw std::invalid_argument("ghz_state: n must lie in [1, 12]");
    }
    const auto d = Eigen::Index{1} << n;
    CMatrix rho = CMatrix::Zero(d, d);
    rho(0, 0) = rho(0, d - 1) = rho(d - 1, 0) = rho(d - 1, d - 1) = 0.5;
    return rho;
}

CMatrix zero_state(const Partition &partition) {
    const auto d = static_cast<Eigen::Index>(partition.dim());
    CMatrix rho = CMatrix::Zero(d, d);
    rho(0, 0) = 1.0;
    return rho;
}

CMatrix maximally_mixed(const Partition &partition) {
    const auto d = static_cast<Eigen::Index>(partition.dim());
    return CMatrix::Identity(d, d) / static_cast<double>(d);
}

CMatrix zz_chain(int n, double h, bool periodic) {
    if (n < 2 || n > 12) {
        throw std::invalid_argument("zz_chain: n must lie in [2, 12]");
    }
    const auto d = Eigen::Index{1} << n;
    const int bonds = (periodic && n > 2) ? n : n - 1;
    CMatrix out = CMatrix::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) {
        double diag = 0.0;
        for (int k = 0; k < bonds; ++k) {
            const int a = k;
            const int b = (k + 1) % n;
            // subsystem 0 is the most significant bit
            const int za = ((x >> (n - 1 - a)) & 1) ? -1 : 1;
            const int zb = ((x >> (n - 1 - b)) & 1) ? -1 : 1;
            diag += za * zb;
        }
        out(x, x) = h * diag;
    }
    return out;
}

double normalized_zz_coupling(int n) {
    if (n < 2) {
        throw std::invalid_argument("normalized_zz_coupling: n must be at least 2");
    }
    if (n == 2) {
        // GHZ on two qubits also carries XX and YY mass on the bond pattern.
        return std::sqrt(3.0);
    }
    return 3.0 / std::sqrt(static_cast<double>(n));
}

CMatrix pauli_string(const std::string &label) {
    if (label.empty()) {
        throw std::invalid_argument("pauli_string: empty label");
    }
    std::vector<CMatrix> factors;
    for (char c : label) {
        switch (c) {
        case 'I': factors.push_back(CMatrix::Identity(2, 2)); break;
        case 'X': factors.push_back(gates::x()); break;
        case 'Y': factors.push_back(gates::y()); break;
        case 'Z': factors.push_back(gates::z()); break;
        default: throw std::invalid_argument(std::string("pauli_string: bad character '") + c + "'");
        }
    }
    return kron_all(factors);
}

Channel channel_from_json(const json &j, const Partition &partition, const std::string &base_dir) {
    if (!j.is_object() || !j.contains("type")) {
        throw ConfigError("channel description needs a 'type'");
    }
    const std::string type = j.at("type").get<std::string>();
    const auto d = partition.dim();
    auto one_qubit = [&](const std::string &what) {
        if (partition.dims() != std::vector<int>{2}) {
            throw ConfigError(what + " acts on one qubit; wrap it in a 'tensor' channel");
        }
    };
    if (type == "identity") {
        return Channel::identity(d);
    }
    if (type == "unitary") {
        CMatrix u = matrix_from_json(j.at("matrix"));
        require_dim(u, partition, "unitary");
        return Channel::unitary(std::move(u));
    }
    if (type == "kraus") {
        std::vector<CMatrix> ops = j.contains("path")
                                       ? load_kraus_file(resolve_path(base_dir, j.at("path").get<std::string>()))
                                       : kraus_from_json(j.at("kraus"));
        for (const auto &k : ops) {
            require_dim(k, partition, "Kraus operator");
        }
        return kraus_or_unitary(std::move(ops));
    }
    if (type == "depolarizing") {
        one_qubit(type);
        return depolarizing(j.at("p").get<double>());
    }
    if (type == "dephasing") {
        one_qubit(type);
        return dephasing(j.at("p").get<double>());
    }
    if (type == "amplitude-damping") {
        one_qubit(type);
        return amplitude_damping(j.at("gamma").get<double>());
    }
    if (type == "replacement") {
        return replacement(j.at("p").get<double>(), state_from_json(j.at("fixed_point"), partition, base_dir));
    }
    if (type == "mixture") {
        return Channel::mixture_with_replacement(j.at("p").get<double>(),
                                                 state_from_json(j.at("fixed_point"), partition, base_dir),
                                                 channel_from_json(j.at("inner"), partition, base_dir));
    }
    if (type == "tensor") {
        const int n = require_qubits(partition, "tensor channel");
        const json &factors = j.at("factors");
        std::vector<Channel> chans;
        if (factors.is_object()) {
            for (int q = 0; q < n; ++q) {
                chans.push_back(single_qubit_channel(factors, base_dir));
            }
        } else {
            if (static_cast<int>(factors.size()) != n) {
                throw ConfigError("tensor channel needs one factor per qubit");
            }
            for (const auto &f : factors) {
                chans.push_back(single_qubit_channel(f, base_dir));
            }
        }
        return Channel::tensor_single_qubit(std::move(chans));
    }
    if (type == "composition") {
        std::vector<Channel> stages;
        for (const auto &s : j.at("stages")) {
            stages.push_back(channel_from_json(s, partition, base_dir));
        }
        if (stages.empty()) {
            throw ConfigError("composition needs at least one stage");
        }
        return Channel::composition(std::move(stages));
    }
    if (type == "entangler") {
        CircuitSpec spec;
        spec.entangler = j.at("id").get<std::string>();
        spec.theta = j.value("theta", kDefaultCrxTheta);
        spec.path = resolve_path(base_dir, j.value("path", std::string()));
        return build_entangler(spec, partition, base_dir);
    }
    if (type == "gates") {
        std::vector<Gate> list;
        for (const auto &g : j.at("gates")) {
            auto subs = g.at("subsystems").get<std::vector<int>>();
            if (g.contains("matrix")) {
                list.push_back(gates::on("custom", matrix_from_json(g.at("matrix")), std::move(subs)));
            } else {
                const std::string name = g.at("name").get<std::string>();
                list.push_back(gates::on(name.c_str(), named_gate(name, g), std::move(subs)));
            }
        }
        return Channel::gate_sequence(partition.dims(), std::move(list));
    }
    throw ConfigError("unknown channel type '" + type + "'");
}

Channel build_entangler(const CircuitSpec &spec, const Partition &partition, const std::string &base_dir) {
    const std::string &id = spec.entangler;
    if (id == "identity") {
        return Channel::identity(partition.dim());
    }
    if (id == "cnot-double-cascade") {
        const int n = require_qubits(partition, id);
        if (n < 2) {
            throw ConfigError(id + " needs at least two qubits");
        }
        return gates::cnot_double_cascade(n);
    }
    if (id == "crx-cascade") {
        const int n = require_qubits(partition, id);
        if (n < 2) {
            throw ConfigError(id + " needs at least two qubits");
        }
        return gates::crx_cascade(n, spec.theta);
    }
    if (id == "swap") {
        if (partition.dims() != std::vector<int>{2, 2}) {
            throw ConfigError("swap entangler needs dims [2, 2]");
        }
        return gates::swap_circuit();
    }
    if (id == "custom-kraus-file") {
        if (spec.path.empty()) {
            throw ConfigError("custom-kraus-file needs a 'path'");
        }
        auto ops = load_kraus_file(resolve_path(base_dir, spec.path));
        for (const auto &k : ops) {
            require_dim(k, partition, "Kraus operator");
        }
        return kraus_or_unitary(std::move(ops));
    }
    if (id == "channel") {
        return channel_from_json(spec.channel, partition, base_dir);
    }
    throw ConfigError("unknown entangler '" + id + "'");
}

namespace {

CMatrix build_fixed_point(const ExperimentConfig &cfg) {
    if (cfg.noise.fixed_point == "custom") {
        if (cfg.noise.path.empty()) {
            throw ConfigError("custom fixed point needs noise.path");
        }
        return state_from_json(json{{"path", cfg.noise.path}}, cfg.partition, "");
    }
    return state_by_id(cfg.noise.fixed_point, cfg.partition);
}

CMatrix build_state(const ExperimentConfig &cfg) {
    if (cfg.initial_state.kind == "custom") {
        if (cfg.initial_state.path.empty()) {
            throw ConfigError("custom initial state needs a 'path'");
        }
        return state_from_json(json{{"path", cfg.initial_state.path}}, cfg.partition, "");
    }
    return state_by_id(cfg.initial_state.kind, cfg.partition);
}

CMatrix build_observable(const ExperimentConfig &cfg) {
    const auto &o = cfg.observable;
    CMatrix h;
    if (o.kind == "zz-chain") {
        const int n = require_qubits(cfg.partition, "zz-chain");
        if (n < 2) {
            throw ConfigError("zz-chain needs at least two qubits");
        }
        double coupling = o.h.value_or(normalized_zz_coupling(n));
        if (!o.h && !o.periodic && n > 2) {
            coupling = 3.0 / std::sqrt(static_cast<double>(n - 1));
        }
        h = zz_chain(n, coupling, o.periodic);
    } else if (o.kind == "single-pauli") {
        const int n = require_qubits(cfg.partition, "single-pauli");
        if (static_cast<int>(o.pauli.size()) != n) {
            throw ConfigError("single-pauli label must have one letter per qubit");
        }
        h = pauli_string(o.pauli);
    } else if (o.kind == "custom") {
        if (o.path.empty()) {
            throw ConfigError("custom observable needs a 'path'");
        }
        h = load_matrix_file(o.path);
    } else {
        throw ConfigError("unknown observable kind '" + o.kind + "'");
    }
    require_dim(h, cfg.partition, "observable");
    if (!is_hermitian(h, 1e-9)) {
        throw ConfigError("observable is not Hermitian");
    }
    return h;
}

std::vector<WeightedChannel> load_unravelling(const std::string &path, const Partition &partition) {
    const json j = load_json_file(path);
    const json &members = j.is_object() ? j.at("members") : j;
    std::vector<WeightedChannel> out;
    for (const auto &m : members) {
        const double w = m.at("weight").get<double>();
        Channel ch = m.contains("unitary") ? Channel::unitary(matrix_from_json(m.at("unitary")))
                                           : kraus_or_unitary(kraus_from_json(m.at("kraus")));
        if (ch.dim() != partition.dim()) {
            throw ConfigError("unravelling member has the wrong dimension");
        }
        out.emplace_back(w, std::move(ch));
    }
    if (out.empty()) {
        throw ConfigError("unravelling needs at least one member");
    }
    return out;
}

} // namespace

ExperimentConfig parse_config(const json &j, const std::string &base_dir) {
    try {
        ExperimentConfig cfg = parse_config_impl(j, base_dir);
        // Resolve every referenced built-in now so that failures surface as config errors.
        (void)build_entangler(cfg.circuit, cfg.partition, cfg.base_dir);
        (void)build_observable(cfg);
        (void)build_state(cfg);
        if (cfg.noise.enabled) {
            (void)build_fixed_point(cfg);
        }
        if (!cfg.unravelling_path.empty()) {
            (void)load_unravelling(cfg.unravelling_path, cfg.partition);
        }
        if (cfg.qresnet.enabled && cfg.qresnet.generator != "zz-chain") {
            (void)load_matrix_file(cfg.qresnet.generator);
        }
        return cfg;
    } catch (const ConfigError &) {
        throw;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string &path) {
    json j;
    try {
        j = load_json_file(path);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return parse_config(j, fs::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Output helpers

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header_.size()) {
        throw std::logic_error("CsvTable: row width does not match the header");
    }
    rows_.push_back(std::move(row));
}

namespace {

void write_field(std::ostream &out, const std::string &field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') {
            out << '"';
        }
        out << c;
    }
    out << '"';
}

void write_record(std::ostream &out, const std::vector<std::string> &record) {
    for (std::size_t i = 0; i < record.size(); ++i) {
        if (i) {
            out << ',';
        }
        write_field(out, record[i]);
    }
    out << "\r\n";
}

} // namespace

void CsvTable::write(std::ostream &out) const {
    write_record(out, header_);
    for (const auto &r : rows_) {
        write_record(out, r);
    }
}

std::string CsvTable::str() const {
    std::ostringstream out;
    write(out);
    return out.str();
}

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string format_optional(const std::optional<double> &x) { return x ? format_double(*x) : std::string(); }

std::string fnv1a_hex(const std::string &text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const json &config) { return fnv1a_hex(config.dump()); }

namespace {

json environment_json() {
    json env;
#if defined(__clang__)
    env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    env["compiler"] = std::string("gcc ") + __VERSION__;
#else
    env["compiler"] = "unknown";
#endif
    env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                   std::to_string(EIGEN_MINOR_VERSION);
    env["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                           std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#ifdef NDEBUG
    env["assertions"] = false;
#else
    env["assertions"] = true;
#endif
    env["library_version"] = "0.1.0";
    return env;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json checks_json(const std::vector<CheckResult> &checks) {
    json out = json::array();
    for (const auto &c : checks) {
        out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    return out;
}

} // namespace

std::string environment_hash() { return fnv1a_hex(environment_json().dump()); }

bool RunResult::all_checks_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.passed; });
}

void write_outputs(const RunResult &result, const std::string &dir, const std::string &stem, const json &config,
                   const std::string &command) {
    fs::create_directories(dir);
    json files = json::array();
    for (const auto &t : result.tables) {
        const fs::path path = fs::path(dir) / (stem + t.suffix + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + path.string());
        }
        t.table.write(out);
        files.push_back(path.filename().string());
    }
    json env = environment_json();
    json sidecar{{"command", command},
                 {"config", config},
                 {"config_hash", config_hash(config)},
                 {"environment", env},
                 {"environment_hash", fnv1a_hex(env.dump())},
                 {"timestamp", utc_timestamp()},
                 {"tables", files},
                 {"checks", checks_json(result.checks)},
                 {"report", result.report}};
    const fs::path path = fs::path(dir) / (stem + ".json");
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << sidecar.dump(2) << '\n';
}

std::vector<double> parse_grid(const std::string &text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) {
        parts.push_back(part);
    }
    if (parts.size() != 3) {
        throw ConfigError("grid must have the form a:b:k");
    }
    double a = 0.0;
    double b = 0.0;
    long k = 0;
    try {
        std::size_t used = 0;
        a = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("a");
        b = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("b");
        k = std::stol(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("k");
    } catch (const std::exception &) {
        throw ConfigError("cannot parse grid '" + text + "'");
    }
    if (k < 1 || (k == 1 && a != b)) {
        throw ConfigError("grid '" + text + "' needs k >= 2 points unless a == b");
    }
    std::vector<double> out;
    for (long i = 0; i < k; ++i) {
        out.push_back(k == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1));
    }
    return out;
}

std::optional<LinearFit> convergence_fit(const std::vector<double> &deviations, double floor) {
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < deviations.size(); ++i) {
        if (!(deviations[i] > floor)) {
            break;
        }
        x.push_back(static_cast<double>(i + 1));
        y.push_back(std::log(deviations[i]));
    }
    if (x.size() < 3) {
        return std::nullopt;
    }
    return fit_linear(x, y);
}

// ---------------------------------------------------------------------------
// SWAP example

RunResult run_swap_example(const SwapExampleOptions &options) {
    const Partition partition({2, 2});
    const CMatrix sigma = options.sigma.size() ? options.sigma : zero_state(Partition::qubits(1));
    const CMatrix h1 = options.h.size() ? options.h : gates::z();
    if (sigma.rows() != 2 || !is_density_matrix(sigma, 1e-9)) {
        throw std::invalid_argument("swap example: sigma must be a single-qubit state");
    }
    if (h1.rows() != 2 || !is_hermitian(h1, 1e-10) || std::abs(h1.trace()) > 1e-12) {
        throw std::invalid_argument("swap example: h must be a traceless single-qubit Hermitian matrix");
    }
    const CMatrix id2 = CMatrix::Identity(2, 2);
    const CMatrix rho = kron(id2 / 2.0, sigma);
    const CMatrix obs = kron(id2, h1);
    const LocalityVector l_rho = locality_vector(rho, partition);
    const LocalityVector l_h = locality_vector(obs, partition);

    const Channel swap = gates::swap_circuit();
    const Ltm t = ltm_exact(swap, true, partition);
    const CanonicalDecomposition dec = decompose(t);
    const std::vector<double> seq = variance_sequence(l_rho, t, l_h, 0.0, options.max_depth);
    DeepOptions deep_options;
    deep_options.fit_beta = false;
    const VarianceReport deep = variance_deep(dec, l_rho, l_h, deep_options);
    const VarianceReport deep_unitary = variance_deep_unitary(dec, l_rho, l_h);

    const double amp = (hs_norm_sq(sigma) - 0.5) * hs_norm_sq(h1);
    const double cesaro_closed = amp / 6.0;

    std::vector<MCEstimate> mc(options.max_depth);
    if (options.mc_samples > 0) {
        for (std::size_t l = 1; l <= options.max_depth; ++l) {
            LayeredCircuitSpec spec{partition, l, {swap}, obs, rho};
            McOptions mco;
            mco.threads = options.threads;
            mc[l - 1] = estimate_variance(spec, options.mc_samples, derive_seed(options.seed, kGridStream, l), mco);
        }
    }

    RunResult result;
    CsvTable table({"L", "var_exact", "closed_form", "abs_error", "mc_var", "mc_se", "mc_samples", "seed"});
    double max_err = 0.0;
    bool mc_ok = true;
    for (std::size_t l = 1; l <= options.max_depth; ++l) {
        const double closed = (l % 2 == 0) ? amp / 3.0 : 0.0;
        const double err = std::abs(seq[l] - closed);
        max_err = std::max(max_err, err);
        std::vector<std::string> row{std::to_string(l), format_double(seq[l]), format_double(closed),
                                     format_double(err)};
        if (options.mc_samples > 0) {
            const auto &e = mc[l - 1];
            mc_ok = mc_ok && std::abs(e.variance - seq[l]) <= 4.0 * e.se_variance + 1e-15;
            row.insert(row.end(), {format_double(e.variance), format_double(e.se_variance),
                                   std::to_string(e.samples), std::to_string(e.seed)});
        } else {
            row.insert(row.end(), {"", "", "0", ""});
        }
        table.add_row(std::move(row));
    }
    result.tables.push_back({"", std::move(table)});

    bool period_two = false;
    for (const auto &b : dec.blocks) {
        if (b.essential && b.period == 2 && b.perron.right.size() == 2 &&
            std::abs(b.perron.right[0] - 0.5) < 1e-12 && std::abs(b.perron.right[1] - 0.5) < 1e-12) {
            period_two = true;
        }
    }
    const double cesaro = deep_unitary.value;
    result.report = {{"ltm", to_json(t)},
                     {"decomposition", to_json(dec)},
                     {"deep", to_json(deep)},
                     {"deep_unitary", to_json(deep_unitary)},
                     {"cesaro", cesaro},
                     {"cesaro_closed_form", cesaro_closed},
                     {"rho_purity", hs_norm_sq(sigma)},
                     {"h_norm_sq", hs_norm_sq(h1)}};
    result.checks.push_back({"finite-depth values match the closed form", max_err <= 1e-12,
                             "max abs error " + format_double(max_err)});
    result.checks.push_back({"Cesaro value matches the closed form", std::abs(cesaro - cesaro_closed) <= 1e-12,
                             "value " + format_double(cesaro) + " vs " + format_double(cesaro_closed)});
    result.checks.push_back({"period-2 essential block with uniform right vector", period_two, ""});
    if (options.mc_samples > 0) {
        result.checks.push_back({"Monte Carlo within 4 SE at every depth", mc_ok, ""});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Noise scaling sweep

namespace {

Channel fig3_entangler(const std::string &name, int n, double theta) {
    if (name == "cnot-double-cascade") {
        return gates::cnot_double_cascade(n);
    }
    if (name == "crx-cascade") {
        return gates::crx_cascade(n, theta);
    }
    throw ConfigError("unknown entangler '" + name + "'");
}

struct Fig3Context {
    Partition partition;
    Ltm t_unitary;
    LocalityVector l_rho;
    LocalityVector l_fixed;
    LocalityVector l_h;
    Channel entangler;
    CMatrix rho;
    CMatrix fixed;
    CMatrix obs;
};

Fig3Context fig3_context(const std::string &entangler, const Fig3Options &options) {
    if (options.n < 3 || options.n > 12) {
        throw ConfigError("fig3 needs 3 <= n <= 12");
    }
    const Partition partition = Partition::qubits(options.n);
    Channel e = fig3_entangler(entangler, options.n, options.theta);
    LtmOptions lo;
    lo.threads = options.threads;
    Ltm t = ltm_structured(e, true, partition, lo);
    const double h = options.h.value_or(normalized_zz_coupling(options.n));
    CMatrix rho = zero_state(partition);
    CMatrix fixed = ghz_state(options.n);
    CMatrix obs = zz_chain(options.n, h, true);
    LocalityVector l_rho = locality_vector(rho, partition);
    LocalityVector l_fixed = locality_vector(fixed, partition);
    LocalityVector l_h = locality_vector(obs, partition);
    return Fig3Context{partition, std::move(t), std::move(l_rho), std::move(l_fixed), std::move(l_h), std::move(e),
                       std::move(rho), std::move(fixed), std::move(obs)};
}

std::size_t fig3_layers(const std::string &entangler, const Fig3Options &options) {
    return entangler == "cnot-double-cascade" ? options.rapid_layers : options.slow_layers;
}

Fig3Curve fig3_curve_from(const Fig3Context &ctx, const std::string &entangler, const Fig3Options &options) {
    Fig3Curve curve;
    curve.entangler = entangler;
    curve.layers = fig3_layers(entangler, options);
    curve.normalization = weighted_dot(ctx.l_fixed, ctx.l_h);
    curve.p = options.p_grid;
    const std::size_t np = curve.p.size();
    curve.var_inf.assign(np, std::nan(""));
    curve.var_inf_decomposition.assign(np, std::nan(""));
    curve.var_layers.assign(np, std::nan(""));
    DeepOptions deep_options;
    deep_options.fit_beta = false;
    parallel_chunks(np, np, options.threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double p = curve.p[i];
            const Ltm tc = mixture_ltm(ctx.t_unitary, p, ctx.l_fixed);
            if (p > 0.0) {
                curve.var_inf[i] = noise_model_deep(p, ctx.t_unitary, ctx.l_fixed, ctx.l_h).value;
                curve.var_inf_decomposition[i] = variance_deep(decompose(tc), ctx.l_rho, ctx.l_h, deep_options).value;
            }
            curve.var_layers[i] = variance_sequence(ctx.l_rho, tc, ctx.l_h, 0.0, curve.layers).back();
        }
    });
    const Ltm tc = mixture_ltm(ctx.t_unitary, options.convergence_p, ctx.l_fixed);
    const double inf = noise_model_deep(options.convergence_p, ctx.t_unitary, ctx.l_fixed, ctx.l_h).value;
    const auto seq = variance_sequence(ctx.l_rho, tc, ctx.l_h, 0.0, options.convergence_max_depth);
    curve.convergence_var_inf = inf;
    for (std::size_t l = 1; l < seq.size(); ++l) {
        curve.convergence_var_layers.push_back(seq[l]);
        curve.convergence_deviation.push_back(std::abs(seq[l] - inf));
    }
    curve.convergence = convergence_fit(curve.convergence_deviation, options.convergence_floor);
    return curve;
}

} // namespace

Fig3Curve fig3_curve(const std::string &entangler, const Fig3Options &options) {
    return fig3_curve_from(fig3_context(entangler, options), entangler, options);
}

std::optional<LinearFit> loglog_slope(const Fig3Curve &curve, double lo, double hi) {
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < curve.p.size(); ++i) {
        const double p = curve.p[i];
        if (p >= lo - 1e-12 && p <= hi + 1e-12 && curve.var_inf[i] > 0.0) {
            x.push_back(std::log(p));
            y.push_back(std::log(curve.var_inf[i] / curve.normalization));
        }
    }
    if (x.size() < 2) {
        return std::nullopt;
    }
    return fit_linear(x, y);
}

std::optional<double> linear_prediction_deviation(const Fig3Curve &curve, double lo, double hi) {
    std::optional<double> worst;
    for (std::size_t i = 0; i < curve.p.size(); ++i) {
        const double p = curve.p[i];
        if (p >= lo - 1e-12 && p <= hi + 1e-12 && p > 0.0) {
            const double pred = curve.normalization * p / (2.0 - p);
            const double dev = std::abs(curve.var_inf[i] / pred - 1.0);
            worst = std::max(worst.value_or(0.0), dev);
        }
    }
    return worst;
}

RunResult run_fig3(const Fig3Options &options) {
    if (options.p_grid.empty()) {
        throw ConfigError("fig3 needs a non-empty p grid");
    }
    if (options.mc_samples > 0 && options.mc_samples < 100) {
        throw ConfigError("--mc-samples must be 0 or at least 100");
    }
    const std::vector<std::string> names = {"cnot-double-cascade", "crx-cascade"};
    RunResult result;
    CsvTable table({"entangler", "p", "layers", "var_inf", "var_inf_decomposition", "var_layers", "normalization",
                    "var_inf_normalized", "prediction", "prediction_kind", "mc_var", "mc_se", "mc_samples", "seed"});
    CsvTable conv({"entangler", "p", "L", "var_L", "var_inf", "abs_deviation", "qualified"});
    json report = json::object();
    for (std::size_t k = 0; k < names.size(); ++k) {
        const std::string &name = names[k];
        const Fig3Context ctx = fig3_context(name, options);
        const Fig3Curve curve = fig3_curve_from(ctx, name, options);
        const bool rapid = k == 0;

        std::vector<MCEstimate> mc(curve.p.size());
        if (options.mc_samples > 0) {
            for (std::size_t i = 0; i < curve.p.size(); ++i) {
                Channel layer = Channel::mixture_with_replacement(curve.p[i], ctx.fixed, ctx.entangler);
                LayeredCircuitSpec spec{ctx.partition, curve.layers, {layer}, ctx.obs, ctx.rho};
                McOptions mco;
                mco.threads = options.threads;
                mc[i] = estimate_variance(spec, options.mc_samples, derive_seed(options.seed, kGridStream + k, i), mco);
            }
        }
        for (std::size_t i = 0; i < curve.p.size(); ++i) {
            const double p = curve.p[i];
            const double pred = curve.normalization * (rapid ? p * p : p / (2.0 - p));
            std::vector<std::string> row{name,
                                         format_double(p),
                                         std::to_string(curve.layers),
                                         format_double(curve.var_inf[i]),
                                         format_double(curve.var_inf_decomposition[i]),
                                         format_double(curve.var_layers[i]),
                                         format_double(curve.normalization),
                                         format_double(curve.var_inf[i] / curve.normalization),
                                         format_double(pred),
                                         rapid ? "quadratic" : "linear"};
            if (options.mc_samples > 0) {
                row.insert(row.end(), {format_double(mc[i].variance), format_double(mc[i].se_variance),
                                       std::to_string(mc[i].samples), std::to_string(mc[i].seed)});
            } else {
                row.insert(row.end(), {"", "", "0", ""});
            }
            table.add_row(std::move(row));
        }
        const std::size_t qualified = curve.convergence ? curve.convergence->points : 0;
        for (std::size_t l = 1; l <= curve.convergence_deviation.size(); ++l) {
            conv.add_row({name, format_double(options.convergence_p), std::to_string(l),
                          format_double(curve.convergence_var_layers[l - 1]), format_double(curve.convergence_var_inf),
                          format_double(curve.convergence_deviation[l - 1]), l <= qualified ? "1" : "0"});
        }

        json entry{{"layers", curve.layers}, {"normalization", curve.normalization}};
        if (curve.convergence) {
            entry["convergence_slope"] = curve.convergence->slope;
            entry["convergence_r2"] = curve.convergence->r2;
            entry["convergence_points"] = curve.convergence->points;
        }
        const bool conv_ok = curve.convergence && curve.convergence->slope < 0.0 && curve.convergence->r2 > 0.95;
        result.checks.push_back({name + ": log|Var^L - Var^inf| decays linearly in L", conv_ok,
                                 curve.convergence ? "slope " + format_double(curve.convergence->slope) + ", R^2 " +
                                                         format_double(curve.convergence->r2)
                                                   : "fewer than three qualified depths"});
        if (rapid) {
            const auto fit = loglog_slope(curve, 0.05, 0.5);
            if (fit) {
                entry["loglog_slope"] = fit->slope;
                entry["loglog_r2"] = fit->r2;
            }
            result.checks.push_back({name + ": log-log slope 2.0 +- 0.15 on [0.05, 0.5]",
                                     fit && std::abs(fit->slope - 2.0) <= 0.15,
                                     fit ? "slope " + format_double(fit->slope) : "fewer than two grid points"});
        } else {
            const auto dev = linear_prediction_deviation(curve, 0.2, 0.8);
            if (dev) {
                entry["max_relative_deviation"] = *dev;
            }
            result.checks.push_back({name + ": within 20% of p/(2-p) on [0.2, 0.8]", dev && *dev <= 0.2,
                                     dev ? "max relative deviation " + format_double(*dev) : "no grid points"});
        }
        report[name] = entry;
    }
    result.tables.push_back({"", std::move(table)});
    result.tables.push_back({"_convergence", std::move(conv)});
    result.report = {{"n", options.n},
                     {"theta", options.theta},
                     {"h", options.h.value_or(normalized_zz_coupling(options.n))},
                     {"convergence_p", options.convergence_p},
                     {"entanglers", report}};
    return result;
}

// ---------------------------------------------------------------------------
// Generic pipeline

namespace {

/// Gauss-Hermite rule for phi ~ N(0, sigma^2) via the Golub-Welsch eigenproblem.
std::vector<std::pair<double, double>> gaussian_rule(int nodes, double sigma) {
    RMatrix jacobi = RMatrix::Zero(nodes, nodes);
    for (int k = 1; k < nodes; ++k) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> es(jacobi);
    std::vector<std::pair<double, double>> out;
    for (int k = 0; k < nodes; ++k) {
        const double v0 = es.eigenvectors()(0, k);
        out.emplace_back(v0 * v0, std::sqrt(2.0) * sigma * es.eigenvalues()[k]);
    }
    return out;
}

struct GridRow {
    std::size_t p_index = 0;
    std::size_t l = 0;
    double var_exact = 0.0;
    std::optional<double> var_deep;
    bool deep_converged = true;
    std::optional<double> var_deep_unitary;
    std::optional<double> var_noise_model;
    std::optional<double> abs_deviation;
    std::optional<double> fit_slope;
    std::optional<double> fit_r2;
    std::optional<LowerBound> bound;
    std::optional<MCEstimate> mc;
    std::optional<double> qresnet_sigma;
    std::optional<double> qresnet_var_exact;
    std::optional<double> qresnet_bound;
    std::optional<MCEstimate> qresnet_mc;
};

std::string bool_cell(bool b) { return b ? "1" : "0"; }

} // namespace

RunResult run_generic(const ExperimentConfig &cfg) {
    const Partition &partition = cfg.partition;
    const Channel entangler = build_entangler(cfg.circuit, partition, cfg.base_dir);
    const CMatrix rho = build_state(cfg);
    const CMatrix obs = build_observable(cfg);
    const CMatrix fixed = cfg.noise.enabled ? build_fixed_point(cfg) : CMatrix();
    const LocalityVector l_rho = locality_vector(rho, partition);
    const LocalityVector l_h = locality_vector(obs, partition);
    const LocalityVector l_fixed = cfg.noise.enabled ? locality_vector(fixed, partition) : LocalityVector();
    const double trace_h = obs.trace().real();

    std::vector<Pattern> keep = cfg.lower_bound_patterns;
    if (keep.empty()) {
        for (Pattern k = 1; k < partition.num_patterns(); ++k) {
            if (l_h[k] > 1e-14) {
                keep.push_back(k);
            }
        }
    }
    if (std::find(keep.begin(), keep.end(), Pattern{0}) != keep.end()) {
        throw ConfigError("lower_bound.patterns must not contain the identity pattern");
    }

    LtmOptions lo;
    lo.max_dense_dim = std::max<std::size_t>(lo.max_dense_dim, partition.dim());
    auto compute_ltm = [&](const Channel &ch, std::uint64_t index) -> Ltm {
        if (cfg.ltm_method == "exact") {
            return ltm_exact(ch, true, partition, lo);
        }
        if (cfg.ltm_method == "sampled") {
            return ltm_sampled(ch, true, partition, cfg.samples_per_block,
                               derive_seed(cfg.seed, kSampledLtmStream, index), lo);
        }
        if (cfg.ltm_method == "structured") {
            if (!supports_structured(ch, partition)) {
                throw ConfigError("ltm.method 'structured' is not available for this channel");
            }
            return ltm_structured(ch, true, partition, lo);
        }
        return ltm_auto(ch, true, partition, lo);
    };

    const Ltm t_entangler = compute_ltm(entangler, 0);
    const bool assemble = cfg.noise.enabled && entangler.is_trace_preserving() && is_unital(entangler);
    std::vector<double> ps = cfg.p_grid;
    if (ps.empty()) {
        ps.push_back(cfg.noise.enabled ? cfg.noise.p : 0.0);
    }
    const std::size_t max_l = *std::max_element(cfg.l_grid.begin(), cfg.l_grid.end());

    std::optional<CMatrix> generator;
    if (cfg.qresnet.enabled) {
        if (cfg.qresnet.generator == "zz-chain") {
            generator = zz_chain(require_qubits(partition, "qresnet zz-chain generator"), 1.0, true);
        } else {
            generator = load_matrix_file(cfg.qresnet.generator);
            require_dim(*generator, partition, "qresnet generator");
        }
        if (!is_hermitian(*generator, 1e-9)) {
            throw ConfigError("qresnet generator is not Hermitian");
        }
    }

    const std::size_t nl = cfg.l_grid.size();
    std::vector<GridRow> rows(ps.size() * nl);
    std::vector<json> per_p(ps.size());
    DeepOptions deep_options;
    deep_options.fit_beta = true;

    parallel_chunks(ps.size(), ps.size(), cfg.threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double p = ps[i];
            const Channel layer =
                cfg.noise.enabled ? Channel::mixture_with_replacement(p, fixed, entangler) : entangler;
            const Ltm t = !cfg.noise.enabled ? t_entangler
                          : assemble         ? mixture_ltm(t_entangler, p, l_fixed)
                                             : compute_ltm(layer, i + 1);
            const auto seq = variance_sequence(l_rho, t, l_h, trace_h, max_l);
            json info{{"p", p}, {"ltm_method", to_string(t.method)}};
            if (partition.num_patterns() <= 64) {
                info["ltm"] = to_json(t);
            }
            std::optional<VarianceReport> deep;
            std::optional<double> deep_unitary;
            if (cfg.deep) {
                const CanonicalDecomposition dec = decompose(t);
                deep = variance_deep(dec, l_rho, l_h, deep_options);
                info["decomposition"] = to_json(dec);
                info["deep"] = to_json(*deep);
                if (layer.is_unitary()) {
                    deep_unitary = variance_deep_unitary(dec, l_rho, l_h).value;
                    info["deep_unitary"] = *deep_unitary;
                }
            }
            std::optional<double> noise_model;
            if (assemble && p > 0.0) {
                const VarianceReport nm = noise_model_deep(p, t_entangler, l_fixed, l_h);
                noise_model = nm.value;
                info["noise_model"] = to_json(nm);
            }
            std::optional<LinearFit> fit;
            if (deep && deep->converged) {
                std::vector<double> x;
                std::vector<double> y;
                for (std::size_t l : cfg.l_grid) {
                    const double dev = std::abs(seq[l] - deep->value);
                    if (l >= 1 && dev > 1e-13) {
                        x.push_back(static_cast<double>(l));
                        y.push_back(std::log(dev));
                    }
                }
                if (x.size() >= 3) {
                    fit = fit_linear(x, y);
                    info["fit_slope"] = fit->slope;
                    info["fit_r2"] = fit->r2;
                }
            }
            per_p[i] = std::move(info);

            for (std::size_t j = 0; j < nl; ++j) {
                const std::size_t l = cfg.l_grid[j];
                const std::size_t index = i * nl + j;
                GridRow &row = rows[index];
                row.p_index = i;
                row.l = l;
                row.var_exact = seq[l];
                if (deep) {
                    row.var_deep = deep->value;
                    row.deep_converged = deep->converged;
                    if (deep->converged) {
                        row.abs_deviation = std::abs(seq[l] - deep->value);
                    }
                }
                row.var_deep_unitary = deep_unitary;
                row.var_noise_model = noise_model;
                if (fit) {
                    row.fit_slope = fit->slope;
                    row.fit_r2 = fit->r2;
                }
                if (cfg.lower_bound && l >= 1 && !keep.empty()) {
                    const std::vector<Ltm> chain(l, t);
                    row.bound = lower_bound(l_rho, chain, l_h, keep);
                }
                if (cfg.n_samples > 0) {
                    LayeredCircuitSpec spec{partition, l, {layer}, obs, rho};
                    row.mc = estimate_variance(spec, cfg.n_samples, derive_seed(cfg.seed, kGridStream, index));
                }
                if (generator && l >= 1) {
                    const double n = static_cast<double>(partition.num_subsystems());
                    const double gnorm = operator_norm_hermitian(*generator);
                    const double sigma =
                        gnorm > 0.0 ? std::sqrt(cfg.qresnet.sigma_prefactor * std::log(std::max(n, 1.0)) /
                                                (gnorm * gnorm * static_cast<double>(l)))
                                    : 0.0;
                    row.qresnet_sigma = sigma;
                    std::vector<WeightedChannel> members;
                    for (const auto &[w, phi] : gaussian_rule(cfg.qresnet.quadrature_nodes, sigma)) {
                        members.emplace_back(w, Channel::unitary(exp_i_hermitian(*generator, phi)));
                    }
                    const Ltm t_mean = mean_ltm_over_ensemble(members, true, partition, lo);
                    const std::vector<Ltm> chain(l, t_mean);
                    row.qresnet_var_exact = variance_exact(l_rho, chain, l_h, trace_h).value;
                    if (!keep.empty()) {
                        row.qresnet_bound = lower_bound(l_rho, chain, l_h, keep).bound;
                    }
                    if (cfg.qresnet.samples > 0) {
                        LayeredCircuitSpec spec{partition, l, {Channel::identity(partition.dim())}, obs, rho};
                        row.qresnet_mc = qresnet_estimate(spec, *generator, sigma, cfg.qresnet.samples,
                                                          derive_seed(cfg.seed, kQresnetStream, index));
                    }
                }
            }
        }
    });

    RunResult result;
    CsvTable table({"grid_index", "name", "p", "L", "ltm_method", "samples_per_block", "var_exact", "var_deep",
                    "deep_converged", "var_deep_unitary", "var_noise_model", "abs_deviation", "fit_slope", "fit_r2",
                    "lower_bound", "alpha", "mc_var", "mc_se", "mc_samples", "seed", "qresnet_sigma",
                    "qresnet_var_exact", "qresnet_bound", "qresnet_mc_var", "qresnet_mc_se"});
    bool mc_ok = true;
    bool bound_ok = true;
    bool unitary_ok = true;
    bool qresnet_ok = true;
    std::size_t mc_rows = 0;
    const std::string method = per_p.front().value("ltm_method", std::string());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const GridRow &row = rows[r];
        const double tol = cfg.checks.tolerance;
        if (row.mc) {
            ++mc_rows;
            mc_ok = mc_ok && std::abs(row.mc->variance - row.var_exact) <= cfg.checks.mc_sigma * row.mc->se_variance + tol;
        }
        if (row.bound) {
            bound_ok = bound_ok && row.bound->bound <= row.var_exact + tol;
        }
        if (row.qresnet_bound && row.qresnet_var_exact) {
            bound_ok = bound_ok && *row.qresnet_bound <= *row.qresnet_var_exact + tol;
        }
        if (row.qresnet_mc && row.qresnet_var_exact) {
            qresnet_ok = qresnet_ok && std::abs(row.qresnet_mc->variance - *row.qresnet_var_exact) <=
                                           cfg.checks.mc_sigma * row.qresnet_mc->se_variance + tol;
        }
        if (row.var_deep_unitary && row.var_deep) {
            unitary_ok = unitary_ok && std::abs(*row.var_deep_unitary - *row.var_deep) <= tol;
        }
        const std::string ltm_method = per_p[row.p_index].value("ltm_method", method);
        table.add_row({std::to_string(r),
                       cfg.name,
                       cfg.noise.enabled ? format_double(ps[row.p_index]) : "",
                       std::to_string(row.l),
                       ltm_method,
                       ltm_method == "sampled" ? std::to_string(cfg.samples_per_block) : "",
                       format_double(row.var_exact),
                       format_optional(row.var_deep),
                       row.var_deep ? bool_cell(row.deep_converged) : "",
                       format_optional(row.var_deep_unitary),
                       format_optional(row.var_noise_model),
                       format_optional(row.abs_deviation),
                       format_optional(row.fit_slope),
                       format_optional(row.fit_r2),
                       row.bound ? format_double(row.bound->bound) : "",
                       row.bound ? format_double(row.bound->alpha) : "",
                       row.mc ? format_double(row.mc->variance) : "",
                       row.mc ? format_double(row.mc->se_variance) : "",
                       row.mc ? std::to_string(row.mc->samples) : "0",
                       row.mc ? std::to_string(row.mc->seed) : std::to_string(cfg.seed),
                       format_optional(row.qresnet_sigma),
                       format_optional(row.qresnet_var_exact),
                       format_optional(row.qresnet_bound),
                       row.qresnet_mc ? format_double(row.qresnet_mc->variance) : "",
                       row.qresnet_mc ? format_double(row.qresnet_mc->se_variance) : ""});
    }
    result.tables.push_back({"", std::move(table)});
    if (mc_rows > 0) {
        result.checks.push_back({"Monte Carlo within " + format_double(cfg.checks.mc_sigma) + " SE of the exact value",
                                 mc_ok, std::to_string(mc_rows) + " rows"});
    }
    if (cfg.lower_bound || generator) {
        result.checks.push_back({"lower bound below the exact value", bound_ok, ""});
    }
    if (generator && cfg.qresnet.samples > 0) {
        result.checks.push_back({"QResNet Monte Carlo matches the mean-LTM value", qresnet_ok, ""});
    }
    if (entangler.is_unitary() && !cfg.noise.enabled && cfg.deep) {
        result.checks.push_back({"deep value equals the unitary block sum", unitary_ok, ""});
    }

    json report{{"name", cfg.name}, {"grid", per_p}, {"lower_bound_patterns", keep}};
    if (!cfg.unravelling_path.empty()) {
        const auto members = load_unravelling(cfg.unravelling_path, partition);
        const Ltm t_mean = mean_ltm_over_ensemble(members, true, partition, lo);
        const Ltm t_avg = ltm_exact(average_channel(members), true, partition, lo);
        CsvTable gaps({"kappa", "lambda", "mean_entry", "average_entry", "gap"});
        double min_gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < t_mean.entries.rows(); ++k) {
            for (Eigen::Index l = 0; l < t_mean.entries.cols(); ++l) {
                const double gap = t_mean.entries(k, l) - t_avg.entries(k, l);
                min_gap = std::min(min_gap, gap);
                gaps.add_row({std::to_string(k), std::to_string(l), format_double(t_mean.entries(k, l)),
                              format_double(t_avg.entries(k, l)), format_double(gap)});
            }
        }
        result.tables.push_back({"_ensemble", std::move(gaps)});
        report["ensemble"] = {{"members", members.size()}, {"min_gap", min_gap}};
        result.checks.push_back({"ensemble-mean LTM dominates the averaged-channel LTM",
                                 min_gap >= -cfg.checks.tolerance, "min gap " + format_double(min_gap)});
    }
    result.report = std::move(report);
    return result;
}

} // namespace ltm::experiments
