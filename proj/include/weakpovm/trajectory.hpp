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
 * Monte Carlo trajectories of the full measurement chain and an exact
 * enumerator over short outcome strings.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "weakpovm/povm.hpp"
#include "weakpovm/simplex_walk.hpp"

namespace weakpovm {

/// Seeded generator. Each trajectory owns one stream derived from
/// (seed, trajectory index), so results do not depend on scheduling.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Standard normal (Box-Muller, no cached second value).
    double normal();
    /// Index drawn from non-negative weights summing to ~1; the last index
    /// absorbs rounding.
    template <class Weights>
    int categorical(const Weights& w) {
        const double u = uniform();
        double acc = 0.0;
        const int n = static_cast<int>(w.size());
        for (int i = 0; i + 1 < n; ++i) {
            acc += w[static_cast<std::size_t>(i)];
            if (u < acc) {
                return i;
            }
        }
        return n - 1;
    }

  private:
    std::mt19937_64 engine_;
};

/// Pure-state ensemble realising a density operator.
class StateSource {
  public:
    static StateSource pure(const Ket& psi);
    /// Eigen-ensemble of rho: eigenvector i with probability lambda_i.
    static StateSource density(const HermitianOp& rho);
    /// I/2 realised by Haar-random pure states.
    static StateSource uniformly_mixed();

    [[nodiscard]] const HermitianOp& rho() const noexcept { return rho_; }
    Ket draw(Rng& rng) const;

  private:
    enum class Kind { pure, eigen_ensemble, haar };
    Kind kind_ = Kind::pure;
    HermitianOp rho_;
    EigenPair2 eig_;
};

struct TrajectoryRecord {
    int leaf = 0;
    std::vector<std::uint8_t> outcomes;    ///< walk outcomes k_1..k_N (filled when recording)
    std::vector<double> step_log_probs;    ///< log p(k_t | history) (filled when recording)
    double log_probability = 0.0;          ///< sum of per-step log-probabilities
    int vertex = -1;                       ///< projective outcome index the walk reached
    int label = -1;                        ///< reported outcome label of the original POVM
    SimplexPoint x;
    Ket final_state;
    Matrix2 accumulated = Matrix2::Identity();
    int steps = 0;
    bool converged = false;
};

struct RunOptions {
    bool record_path = false;
};

/// Per-step Born probabilities <psi|T_k|psi>.
PerOutcome<double> step_probabilities(const WalkState& state, const StepPlan& plan);
int sample_step_outcome(const WalkState& state, const StepPlan& plan, Rng& rng);

/// A projective plan ready to run: the walk model is built once and shared.
class PlanRunner {
  public:
    PlanRunner(PpovmPlan plan, const WalkConfig& cfg);

    [[nodiscard]] const PpovmPlan& plan() const noexcept { return plan_; }
    /// Empty when the plan has a single outcome and no walk is needed.
    [[nodiscard]] const std::optional<WalkModel>& model() const noexcept { return model_; }
    [[nodiscard]] const WalkConfig& config() const noexcept { return cfg_; }

    /// Walk until a vertex is reached (or max_steps), then relabel through
    /// p(i|k). Non-converged records have label -1.
    TrajectoryRecord run(const Ket& psi0, Rng& rng, const RunOptions& opts = {}) const;

  private:
    PpovmPlan plan_;
    WalkConfig cfg_;
    std::optional<WalkModel> model_;
};

TrajectoryRecord run_trajectory(const PpovmPlan& plan, const Ket& psi0, const WalkConfig& cfg, Rng& rng,
                                const RunOptions& opts = {});

struct OutcomeStatistics {
    std::vector<std::int64_t> counts;  ///< per original label, converged trajectories only
    std::int64_t total = 0;            ///< converged trajectories
    std::int64_t non_converged = 0;
    std::vector<double> frequencies;
    std::vector<double> reference;       ///< Tr[E_i rho]
    std::vector<double> standard_error;  ///< sqrt(p (1 - p) / total), p = reference
    double mean_steps = 0.0;
    int max_steps = 0;
    double mean_fidelity = 0.0;  ///< mean |<0|psi_final>|^2
};

struct PipelineOptions {
    std::uint64_t seed = 0;
    std::int64_t trajectories = 20000;
    int threads = 0;          ///< 0 reads WEAKPOVM_THREADS, defaulting to 1
    bool keep_records = false;
    bool record_paths = false;
};

struct PipelineResult {
    LipovmTree tree;
    OutcomeStatistics stats;
    std::vector<TrajectoryRecord> records;  ///< in trajectory order, when kept
};

/// Pre-process (sample a tree leaf), walk, post-process, for every trajectory.
PipelineResult run_pipeline(const Povm& povm, const StateSource& source, const WalkConfig& cfg,
                            const PipelineOptions& opts);

/// Worker count from WEAKPOVM_THREADS (>= 1), or 1.
int threads_from_environment();

struct Verdict {
    bool pass = true;
    std::vector<double> z_scores;
};
/// |z_i| <= threshold for every label, z_i = (f_i - p_i) / se_i.
Verdict compare_statistics(const OutcomeStatistics& stats, double threshold = 3.0);

/// 1 - |<0|psi_final>|^2.
double destructiveness_metric(const TrajectoryRecord& record);

struct OracleString {
    std::uint64_t code = 0;  ///< outcomes in base n, first outcome most significant
    int length = 0;          ///< < depth when the walk terminated early
    double probability = 0.0;         ///< product of sequential conditional probabilities
    double direct_probability = 0.0;  ///< |M_{k_N}...M_{k_1} psi_0|^2
    int vertex = 0;                   ///< argmax x at the end of the string
    bool terminated = false;          ///< reached the vertex threshold
};

struct OracleReport {
    int depth = 0;
    int outcomes = 0;  ///< walk outcome count n
    std::vector<OracleString> strings;
    std::size_t string_count = 0;  ///< strings.size() at enumeration; kept when strings are dropped
    /// vertex_mass[d][k]: probability that after d steps argmax x = k.
    std::vector<std::vector<double>> vertex_mass;
    /// label_mass[d][i]: vertex_mass pushed through p(i|k).
    std::vector<std::vector<double>> label_mass;
    std::vector<double> terminated_mass;  ///< per depth: mass already at a vertex
    std::vector<double> tv_distance;      ///< per depth: TV(label_mass, Born)
    std::vector<double> reference;        ///< Born probabilities of the plan's POVM
    double total_probability = 0.0;
    double pruned_probability = 0.0;  ///< zero-probability branches skipped
    double max_consistency_residual = 0.0;
};

inline constexpr std::uint64_t kOracleStringLimit = 1'000'000;

/// Depth-first enumeration of every outcome string up to `depth`. Strings that
/// reach a vertex earlier stop there. Throws Error(guard) when n^depth exceeds
/// kOracleStringLimit.
OracleReport oracle_enumerate(const PpovmPlan& plan, const Ket& psi0, const WalkConfig& cfg, int depth);

}  // namespace weakpovm
