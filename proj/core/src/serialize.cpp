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

#include "ltm/serialize.hpp"

#include <fstream>
#include <sstream>

namespace ltm {

json matrix_to_json(const CMatrix &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back({m(r, c).real(), m(r, c).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const json &j) {
    if (!j.is_array() || j.empty()) {
        throw std::invalid_argument("matrix must be a non-empty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    CMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json &row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::invalid_argument("matrix rows must all have the same length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json &e = row[static_cast<std::size_t>(c)];
            if (e.is_number()) {
                m(r, c) = cplx(e.get<double>(), 0.0);
            } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
            } else {
                throw std::invalid_argument("matrix entries must be numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

json real_matrix_to_json(const RMatrix &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const RVector &v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

json to_json(const Partition &p) { return json{{"dims", p.dims()}}; }

Partition partition_from_json(const json &j) {
    if (!j.contains("dims")) {
        throw std::invalid_argument("partition needs a 'dims' array");
    }
    return Partition(j.at("dims").get<std::vector<int>>());
}

json to_json(const LocalityVector &v) {
    return json{{"partition", to_json(v.partition())}, {"order", "bitmask-ascending"}, {"weights", vector_to_json(v.weights())}};
}

json to_json(const Ltm &t) {
    json j{{"partition", to_json(t.partition)},
           {"order", "bitmask-ascending"},
           {"convention", "row=output,column=input"},
           {"adjoint", t.adjoint},
           {"method", to_string(t.method)},
           {"rows", real_matrix_to_json(t.entries)}};
    if (t.method == LtmMethod::sampled) {
        j["samples_per_block"] = t.samples_per_block;
        j["seed"] = t.seed;
        j["standard_error"] = real_matrix_to_json(t.standard_error);
    }
    return j;
}

Ltm ltm_from_json(const json &j) {
    Ltm t;
    t.partition = partition_from_json(j.at("partition"));
    if (j.value("order", std::string("bitmask-ascending")) != "bitmask-ascending") {
        throw std::invalid_argument("only bitmask-ascending order is supported");
    }
    const auto &rows = j.at("rows");
    const auto n = static_cast<Eigen::Index>(t.partition.num_patterns());
    if (static_cast<Eigen::Index>(rows.size()) != n) {
        throw std::invalid_argument("LTM must have 2^M rows");
    }
    t.entries.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto &row = rows[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != n) {
            throw std::invalid_argument("LTM must have 2^M columns");
        }
        for (Eigen::Index c = 0; c < n; ++c) {
            t.entries(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    t.adjoint = j.value("adjoint", true);
    return t;
}

json to_json(const CanonicalDecomposition &dec) {
    json blocks = json::array();
    for (const auto &b : dec.blocks) {
        blocks.push_back({{"indices", b.indices},
                          {"essential", b.essential},
                          {"unit_radius", b.unit_radius},
                          {"trivial", b.trivial},
                          {"period", b.period},
                          {"radius", b.perron.radius},
                          {"left", vector_to_json(b.perron.left)},
                          {"right", vector_to_json(b.perron.right)},
                          {"block_dim", b.block_dim}});
    }
    json j{{"blocks", blocks},
           {"recurrent_indices", dec.recurrent_indices},
           {"transient_indices", dec.transient_indices},
           {"permutation", dec.permutation},
           {"q_radius", dec.q_radius},
           {"warnings", dec.warnings}};
    try {
        j["absorption"] = real_matrix_to_json(absorption(dec));
    } catch (const SingularAbsorption &e) {
        j["absorption_error"] = e.what();
    }
    return j;
}

json to_json(const DeepLimit &lim) {
    json residues = json::array();
    for (const auto &m : lim.residue_limits) {
        residues.push_back(real_matrix_to_json(m));
    }
    return json{{"converged", lim.converged},
                {"period", lim.period},
                {"cesaro_limit", real_matrix_to_json(lim.limit)},
                {"residue_limits", residues}};
}

json to_json(const VarianceReport &r) {
    json blocks = json::array();
    for (const auto &b : r.blocks) {
        blocks.push_back({{"indices", b.indices}, {"period", b.period}, {"direct", b.direct}, {"absorbed", b.absorbed}});
    }
    json j{{"value", r.value},
           {"method", to_string(r.method)},
           {"converged", r.converged},
           {"blocks", blocks},
           {"residue_values", r.residue_values},
           {"numerical_weights", r.numerical_weights},
           {"notes", r.notes}};
    if (r.beta) {
        j["beta"] = *r.beta;
        j["beta_r2"] = r.beta_r2.value_or(0.0);
    }
    if (r.cross_check) {
        j["cross_check"] = *r.cross_check;
    }
    return j;
}

json to_json(const LowerBound &b) {
    return json{{"bound", b.bound}, {"alpha", b.alpha}, {"layer_alphas", b.layer_alphas}};
}

json to_json(const Corollary3Report &r) {
    return json{{"passes", r.passes},
                {"fitted_c", r.fitted_c},
                {"fitted_k", r.fitted_k},
                {"power_law_ssr", r.power_law_ssr},
                {"exponential_ssr", r.exponential_ssr},
                {"min_alpha", r.min_alpha},
                {"max_depth_over_log_n", r.max_depth_over_log_n},
                {"max_deficit_ratio", r.max_deficit_ratio},
                {"f_values", r.f_values}};
}

json to_json(const MCEstimate &e) {
    return json{{"mean", e.mean},         {"variance", e.variance}, {"se_variance", e.se_variance},
                {"se_mean", e.se_mean},   {"samples", e.samples},   {"seed", e.seed}};
}

json to_json(const SingleQubitNormalForm &nf) {
    return json{{"t", {nf.t[0], nf.t[1], nf.t[2]}},
                {"lambda", {nf.lambda[0], nf.lambda[1], nf.lambda[2]}},
                {"pre_u", matrix_to_json(nf.pre_u)},
                {"post_v", matrix_to_json(nf.post_v)},
                {"reconstruction_error", nf.reconstruction_error}};
}

std::vector<CMatrix> kraus_from_json(const json &j) {
    const json &list = j.is_object() ? j.at("kraus") : j;
    if (!list.is_array() || list.empty()) {
        throw std::invalid_argument("Kraus list must be a non-empty array of matrices");
    }
    std::vector<CMatrix> out;
    for (const auto &m : list) {
        out.push_back(matrix_from_json(m));
    }
    return out;
}

json load_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw std::invalid_argument("cannot parse '" + path + "': " + e.what());
    }
}

std::vector<CMatrix> load_kraus_file(const std::string &path) { return kraus_from_json(load_json_file(path)); }

} // namespace ltm
