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

#ifndef LTM_SERIALIZE_HPP
#define LTM_SERIALIZE_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ltm/channel.hpp"
#include "ltm/ltm.hpp"
#include "ltm/monte_carlo.hpp"
#include "ltm/spectral.hpp"
#include "ltm/variance.hpp"

namespace ltm {

using nlohmann::json;

/// Complex matrix as rows of [re, im] pairs.
json matrix_to_json(const CMatrix &m);
CMatrix matrix_from_json(const json &j);

json real_matrix_to_json(const RMatrix &m);
json vector_to_json(const RVector &v);

json to_json(const Partition &p);
Partition partition_from_json(const json &j);

json to_json(const LocalityVector &v);

/// {"partition": {"dims": [...]}, "order": "bitmask-ascending",
///  "convention": "row=output,column=input", "adjoint": bool,
///  "method": str, "rows": [[...], ...], "standard_error": [[...]]?}
json to_json(const Ltm &t);
Ltm ltm_from_json(const json &j);

json to_json(const CanonicalDecomposition &dec);
json to_json(const DeepLimit &lim);
json to_json(const VarianceReport &r);
json to_json(const LowerBound &b);
json to_json(const Corollary3Report &r);
json to_json(const MCEstimate &e);
json to_json(const SingleQubitNormalForm &nf);

/// Kraus list file: either {"kraus": [M, ...]} or a bare list [M, ...].
std::vector<CMatrix> kraus_from_json(const json &j);
std::vector<CMatrix> load_kraus_file(const std::string &path);

json load_json_file(const std::string &path);

} // namespace ltm

#endif
