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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ltm/experiments.hpp"
#include "ltm/gates.hpp"
#include "ltm/serialize.hpp"

namespace ltm::experiments {
namespace {

json base_config() {
    return json::parse(R"({
        "name": "unit",
        "partition": {"qubits": 3},
        "circuit": {"entangler": "cnot-double-cascade"},
        "noise": {"p": 0.2, "fixed_point": "ghz"},
        "observable": {"kind": "zz-chain"},
        "L_grid": [1, 2, 3, 4],
        "seed": 5
    })");
}

TEST(Config, ParsesDefaults) {
    const ExperimentConfig cfg = parse_config(base_config());
    EXPECT_EQ(cfg.partition.num_subsystems(), 3);
    EXPECT_TRUE(cfg.noise.enabled);
    EXPECT_DOUBLE_EQ(cfg.circuit.theta, kDefaultCrxTheta);
    EXPECT_EQ(cfg.l_grid.size(), 4u);
    EXPECT_EQ(cfg.output_stem, "unit");
}

TEST(Config, RejectsBadInput) {
    auto expect_error = [](json j) { EXPECT_THROW(parse_config(j), ConfigError) << j.dump(); };
    json j = base_config();
    j["bogus"] = 1;
    expect_error(j);
    j = base_config();
    j.erase("partition");
    expect_error(j);
    j = base_config();
    j["circuit"]["entangler"] = "nope";
    expect_error(j);
    j = base_config();
    j["L_grid"] = json::array();
    expect_error(j);
    j = base_config();
    j.erase("noise");
    j["p_grid"] = {0.1, 0.2};
    expect_error(j);
    j = base_config();
    j["p_grid"] = "0.1:0.2";
    expect_error(j);
    j = base_config();
    j["observable"] = {{"kind", "single-pauli"}, {"pauli", "ZZ"}};
    expect_error(j);
    j = base_config();
    j["noise"]["fixed_point"] = "custom";
    expect_error(j);
    j = base_config();
    j["circuit"] = {{"entangler", "custom-kraus-file"}, {"path", "/nonexistent.json"}};
    expect_error(j);
    j = base_config();
    j["n_samples"] = 10;
    expect_error(j);
}

TEST(Grid, ParsesInclusiveRange) {
    const auto g = parse_grid("0.05:0.95:19");
    ASSERT_EQ(g.size(), 19u);
    EXPECT_DOUBLE_EQ(g.front(), 0.05);
    EXPECT_NEAR(g.back(), 0.95, 1e-15);
    EXPECT_NEAR(g[1] - g[0], 0.05, 1e-15);
    EXPECT_THROW(parse_grid("a:b:c"), ConfigError);
    EXPECT_THROW(parse_grid("0:1:0"), ConfigError);
}

TEST(Csv, QuotesFieldsPerRfc4180) {
    CsvTable t({"a", "b"});
    t.add_row({"plain", "has,comma"});
    t.add_row({"has\"quote", "line\nbreak"});
    EXPECT_EQ(t.str(), "a,b\r\nplain,\"has,comma\"\r\n\"has\"\"quote\",\"line\nbreak\"\r\n");
    EXPECT_THROW(t.add_row({"x"}), std::logic_error);
}

TEST(Csv, NumbersRoundTrip) {
    const double x = 0.1 + 0.2;
    EXPECT_EQ(std::stod(format_double(x)), x);
    EXPECT_EQ(format_optional(std::nullopt), "");
}

TEST(Builtins, ZzChainIsPauliSum) {
    const int n = 4;
    CMatrix expect = CMatrix::Zero(16, 16);
    for (const char *label : {"ZZII", "IZZI", "IIZZ", "ZIIZ"}) {
        expect += pauli_string(label);
    }
    EXPECT_LT((zz_chain(n, 1.0, true) - expect).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((zz_chain(n, 1.0, false) - expect + pauli_string("ZIIZ")).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Builtins, NormalizedCouplingGivesUnitOverlap) {
    for (int n = 2; n <= 7; ++n) {
        const Partition p = Partition::qubits(n);
        const LocalityVector lg = locality_vector(ghz_state(n), p);
        const LocalityVector lh = locality_vector(zz_chain(n, normalized_zz_coupling(n), true), p);
        EXPECT_NEAR(weighted_dot(lg, lh), 1.0, 1e-12) << "n=" << n;
    }
}

TEST(Builtins, ChannelDescriptions) {
    const Partition p = Partition::qubits(2);
    const json mix = json::parse(R"({"type": "mixture", "p": 0.1, "fixed_point": "ghz",
        "inner": {"type": "composition", "stages": [
            {"type": "gates", "gates": [{"name": "h", "subsystems": [0]}, {"name": "cnot", "subsystems": [0, 1]}]},
            {"type": "tensor", "factors": {"type": "depolarizing", "p": 0.1}}]}})");
    const Channel ch = channel_from_json(mix, p);
    EXPECT_EQ(ch.dim(), 4u);
    EXPECT_TRUE(ch.is_trace_preserving());
    EXPECT_THROW(channel_from_json(json{{"type", "depolarizing"}, {"p", 0.1}}, p), ConfigError);
    EXPECT_THROW(channel_from_json(json{{"type", "warp"}}, p), ConfigError);
}

TEST(RunGeneric, ProducesOneRowPerGridPoint) {
    json j = base_config();
    j["p_grid"] = {0.1, 0.4};
    const RunResult r = run_generic(parse_config(j));
    ASSERT_FALSE(r.tables.empty());
    EXPECT_EQ(r.tables.front().table.rows().size(), 8u);
    EXPECT_TRUE(r.all_checks_passed());
    // Same config, same bytes.
    EXPECT_EQ(r.tables.front().table.str(), run_generic(parse_config(j)).tables.front().table.str());
}

TEST(RunGeneric, NoiselessUnitaryReportsBlockSum) {
    json j = base_config();
    j.erase("noise");
    j["circuit"] = {{"entangler", "crx-cascade"}, {"theta", 0.8}};
    const RunResult r = run_generic(parse_config(j));
    const auto &header = r.tables.front().table.header();
    const auto col = std::find(header.begin(), header.end(), "var_deep_unitary") - header.begin();
    EXPECT_FALSE(r.tables.front().table.rows().front()[static_cast<std::size_t>(col)].empty());
    EXPECT_TRUE(r.all_checks_passed());
}

TEST(RunGeneric, EnsembleReportFromUnravellingFile) {
    const auto dir = std::filesystem::temp_directory_path() / "ltm_unit_ensemble";
    std::filesystem::create_directories(dir);
    const auto path = dir / "unravel.json";
    {
        json members = json::array();
        for (double phi : {-0.3, 0.3}) {
            members.push_back({{"weight", 0.5}, {"unitary", matrix_to_json(exp_i_hermitian(
                                                               kron(gates::z(), gates::z()), phi))}});
        }
        std::ofstream(path) << json{{"members", members}}.dump();
    }
    json j = base_config();
    j["partition"] = {{"qubits", 2}};
    j["ensemble"] = {{"unravelling", path.string()}};
    const RunResult r = run_generic(parse_config(j));
    bool found = false;
    for (const auto &c : r.checks) {
        if (c.name.find("dominates") != std::string::npos) {
            found = true;
            EXPECT_TRUE(c.passed) << c.detail;
        }
    }
    EXPECT_TRUE(found);
    ASSERT_EQ(r.tables.size(), 2u);
    EXPECT_EQ(r.tables[1].table.rows().size(), 16u);
}

TEST(Fig3, AnalyticColumnsAgreeAtSmallN) {
    Fig3Options o;
    o.n = 4;
    o.p_grid = {0.1, 0.5, 1.0};
    for (const char *name : {"cnot-double-cascade", "crx-cascade"}) {
        const Fig3Curve c = fig3_curve(name, o);
        EXPECT_NEAR(c.normalization, 1.0, 1e-12);
        for (std::size_t i = 0; i < c.p.size(); ++i) {
            EXPECT_NEAR(c.var_inf[i], c.var_inf_decomposition[i], 1e-10);
        }
        EXPECT_NEAR(c.var_inf.back(), 1.0, 1e-12);
        ASSERT_TRUE(c.convergence.has_value());
        EXPECT_LT(c.convergence->slope, 0.0);
    }
}

TEST(Outputs, SidecarCarriesHashes) {
    const auto dir = std::filesystem::temp_directory_path() / "ltm_unit_outputs";
    RunResult r;
    CsvTable t({"x"});
    t.add_row({"1"});
    r.tables.push_back({"", t});
    write_outputs(r, dir.string(), "demo", json{{"k", 1}}, "unit");
    const json side = load_json_file((dir / "demo.json").string());
    EXPECT_EQ(side.at("config_hash").get<std::string>(), config_hash(json{{"k", 1}}));
    EXPECT_EQ(side.at("environment_hash").get<std::string>(), environment_hash());
    EXPECT_TRUE(side.contains("timestamp"));
    std::ifstream csv(dir / "demo.csv");
    std::string content((std::istreambuf_iterator<char>(csv)), std::istreambuf_iterator<char>());
    EXPECT_EQ(content, "x\r\n1\r\n");
}

} // namespace
} // namespace ltm::experiments
