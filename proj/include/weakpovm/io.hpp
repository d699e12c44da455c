// Copyright 2026 The weakpovm Authors
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

/**
 * @file
 * JSON forms of every artifact. Complex numbers are [re, im] pairs and 2x2
 * matrices are row-major [[z00, z01], [z10, z11]]. All writers emit doubles in
 * shortest round-trip form, so from_json(to_json(x)) reproduces x exactly.
 */

#pragma once

#include <string>

#include "json.hpp"
#include "weakpovm/povm.hpp"
#include "weakpovm/simplex_walk.hpp"
#include "weakpovm/trajectory.hpp"

namespace weakpovm {

using Json = nlohmann::json;

/// How the input state is given.
///
///     {"pure": [[re, im], [re, im]]}
///     {"density": [[[re, im], [re, im]], [[re, im], [re, im]]]}
///     {"mixed": "uniform"}           I/2 sampled as Haar-random pure states
///
/// A density matrix is simulated by sampling its eigenvectors with
/// probability equal to their eigenvalues.
struct StateSpec {
    enum class Kind { pure, density, uniformly_mixed };
    Kind kind = Kind::pure;
    Ket psi = Ket(1.0, 0.0);  ///< pure states only
    HermitianOp rho;          ///< always set

    static StateSpec from_pure(const Ket& psi);
    static StateSpec from_density(const HermitianOp& rho);
    static StateSpec uniformly_mixed();

    [[nodiscard]] StateSource source() const;
};

Json complex_to_json(const Complex& z);
Complex complex_from_json(const Json& j, const std::string& where);
Json ket_to_json(const Ket& k);
Ket ket_from_json(const Json& j, const std::string& where);
Json matrix_to_json(const Matrix2& m);
Matrix2 matrix_from_json(const Json& j, const std::string& where);

/// {"elements": [...], "labels": [...]}. Reading validates the POVM; a
/// non-Hermitian element is reported with its index and offending entry.
Json povm_to_json(const Povm& p);
Povm povm_from_json(const Json& j, const Tolerances& tol = default_tolerances());
Povm load_povm_file(const std::string& path, const Tolerances& tol = default_tolerances());

Json state_to_json(const StateSpec& s);
StateSpec state_from_json(const Json& j, const Tolerances& tol = default_tolerances());
StateSpec load_state_file(const std::string& path, const Tolerances& tol = default_tolerances());

Json walk_config_to_json(const WalkConfig& cfg);
WalkConfig walk_config_from_json(const Json& j);

Json tree_to_json(const LipovmTree& tree);
LipovmTree tree_from_json(const Json& j);

Json plan_to_json(const PpovmPlan& plan);
PpovmPlan plan_from_json(const Json& j);

Json statistics_to_json(const OutcomeStatistics& s);
OutcomeStatistics statistics_from_json(const Json& j);

/// Per-string entries are written only when `include_strings` is set; the
/// reader accepts both forms.
Json oracle_to_json(const OracleReport& r, bool include_strings = true);
OracleReport oracle_from_json(const Json& j);

/// Reads a whole file; throws Error(parse) when it cannot be opened or parsed.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace weakpovm
