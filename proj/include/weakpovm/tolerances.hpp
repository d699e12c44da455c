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

#pragma once

namespace weakpovm {

/// Every numerical threshold used by the library, in one overridable record.
/// Residuals are max-norm unless stated otherwise.
struct Tolerances {
    double hermitian = 1e-12;          ///< |H - H^dag| for HermitianOp construction
    double povm_positivity = 1e-10;    ///< min eigenvalue >= -tol for POVM elements
    double povm_completeness = 1e-10;  ///< |sum E_i - I|
    double state_trace = 1e-10;        ///< |Tr rho - 1| and positivity of states
    double singular_eigenvalue = 1e-12;  ///< inv_sqrt_psd refuses eigenvalues below this
    double singular_det = 1e-14;       ///< polar_unitary refuses |det M| below this
    double dependence_ratio = 1e-9;    ///< sigma_min < ratio * sigma_max => linearly dependent
    double witness_residual = 1e-9;    ///< |sum c_i E_i| accepted for a dependence witness
    double zero_weight = 1e-12;        ///< split coefficients at or below this are dropped
    double degenerate_bloch = 1e-12;   ///< |r| >= 1 - tol is treated as a vertex
    double simplex = 1e-9;             ///< accepted negativity of barycentric coordinates
    double polytope = 1e-9;            ///< residual of r against the image polytope's affine hull
    double step_completeness = 1e-9;   ///< |sum_k T_k - I| per planned step
    double operator_consistency = 1e-8;  ///< |T01|^2 - T00(T11 - T00 cos^2 phi)
    double proportionality = 1e-8;     ///< trace-normalised M^dag M vs sum x_i E_i
    double zero_branch = 1e-14;        ///< |M_k psi| below this is a zero-probability branch
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

}  // namespace weakpovm
