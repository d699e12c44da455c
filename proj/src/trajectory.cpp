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

#include "weakpovm/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "weakpovm/error.hpp"

namespace weakpovm {

namespace {

constexpr double kPrunedProbability = 1e-28;

std::uint32_t low32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t high32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

// Neumaier summation; the oracle adds up to 10^6 terms of very different size.
class CompensatedSum {
  public:
    void add(double v) {
        const double t = sum_ + v;
        compensation_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + compensation_; }

  private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

int argmax(const SimplexPoint& x) {
    Eigen::Index best = 0;
    x.maxCoeff(&best);
    return static_cast<int>(best);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{low32(seed), high32(seed), low32(stream), high32(stream)};
    engine_.seed(seq);
}

double Rng::normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// ---------------------------------------------------------------------------
// State sources

StateSource StateSource::pure(const Ket& psi) {
    if (std::abs(psi.norm() - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "pure state must be normalised; norm is " << psi.norm();
        throw Error(ErrorKind::validation, os.str());
    }
    StateSource s;
    s.kind_ = Kind::pure;
    s.rho_ = HermitianOp::outer(psi);
    s.eig_.values = {1.0, 0.0};
    s.eig_.vectors = {psi, Ket::Zero()};
    return s;
}

StateSource StateSource::density(const HermitianOp& rho) {
    validate_state(rho);
    StateSource s;
    s.kind_ = Kind::eigen_ensemble;
    s.rho_ = rho;
    s.eig_ = eigh2(rho);
    for (double& v : s.eig_.values) {
        v = std::max(v, 0.0);
    }
    const double total = s.eig_.values[0] + s.eig_.values[1];
    s.eig_.values[0] /= total;
    s.eig_.values[1] /= total;
    return s;
}

StateSource StateSource::uniformly_mixed() {
    StateSource s;
    s.kind_ = Kind::haar;
    s.rho_ = HermitianOp::identity() * 0.5;
    return s;
}

Ket StateSource::draw(Rng& rng) const {
    switch (kind_) {
        case Kind::pure:
            return eig_.vectors[0];
        case Kind::eigen_ensemble:
            return eig_.vectors[static_cast<std::size_t>(rng.categorical(eig_.values))];
        case Kind::haar: {
            Ket psi;
            const double a = rng.normal();
            const double b = rng.normal();
            const double c = rng.normal();
            const double d = rng.normal();
            psi << Complex(a, b), Complex(c, d);
            return psi.normalized();
        }
    }
    throw Error(ErrorKind::internal, "unknown state source");
}

// ---------------------------------------------------------------------------
// Single trajectories

PerOutcome<double> step_probabilities(const WalkState& state, const StepPlan& plan) {
    PerOutcome<double> p;
    for (const auto& step : plan.outcomes) {
        p.push_back((step.measurement.op * state.system).squaredNorm());
    }
    return p;
}

int sample_step_outcome(const WalkState& state, const StepPlan& plan, Rng& rng) {
    return rng.categorical(step_probabilities(state, plan));
}

PlanRunner::PlanRunner(PpovmPlan plan, const WalkConfig& cfg) : plan_(std::move(plan)), cfg_(cfg) {
    cfg_.validate();
    if (plan_.active.empty() || plan_.active.size() > static_cast<std::size_t>(kMaxWalkOutcomes)) {
        throw Error(ErrorKind::validation, "projective plan must have between 1 and 4 non-zero elements");
    }
    if (plan_.active.size() >= 2) {
        model_.emplace(plan_.walk_povm(), cfg_);
    }
}

TrajectoryRecord PlanRunner::run(const Ket& psi0, Rng& rng, const RunOptions& opts) const {
    TrajectoryRecord rec;
    if (!model_) {
        rec.vertex = plan_.active.front();
        rec.x = SimplexPoint::Ones(1);
        rec.final_state = psi0;
        rec.converged = true;
    } else {
        const WalkModel& model = *model_;
        WalkState state = init_walk(model, psi0);
        std::optional<int> vertex;
        while (!(vertex = vertex_check(state, cfg_)) && state.steps < model.max_steps()) {
            const StepPlan plan = plan_step(state, model);
            const PerOutcome<double> p = step_probabilities(state, plan);
            const int k = rng.categorical(p);
            const double log_p = std::log(p[static_cast<std::size_t>(k)]);
            rec.log_probability += log_p;
            if (opts.record_path) {
                rec.outcomes.push_back(static_cast<std::uint8_t>(k));
                rec.step_log_probs.push_back(log_p);
            }
            state = advance(state, plan, k, model);
        }
        rec.x = state.x;
        rec.final_state = state.system;
        rec.accumulated = state.accumulated;
        rec.steps = state.steps;
        rec.converged = vertex.has_value();
        if (vertex) {
            rec.vertex = model.povm().labels[static_cast<std::size_t>(*vertex)];
        }
    }
    if (rec.converged) {
        const auto column = plan_.conditional.col(rec.vertex);
        const int i = rng.categorical(column);
        rec.label = plan_.source.labels[static_cast<std::size_t>(i)];
    }
    return rec;
}

TrajectoryRecord run_trajectory(const PpovmPlan& plan, const Ket& psi0, const WalkConfig& cfg, Rng& rng,
                                const RunOptions& opts) {
    return PlanRunner(plan, cfg).run(psi0, rng, opts);
}

// ---------------------------------------------------------------------------
// Ensembles

int threads_from_environment() {
    const char* env = std::getenv("WEAKPOVM_THREADS");
    if (env == nullptr || *env == '\0') {
        return 1;
    }
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 1024) {
        throw Error(ErrorKind::validation, std::string("WEAKPOVM_THREADS must be an integer in [1, 1024], got ") + env);
    }
    return static_cast<int>(v);
}

PipelineResult run_pipeline(const Povm& povm, const StateSource& source, const WalkConfig& cfg,
                            const PipelineOptions& opts) {
    if (opts.trajectories < 1) {
        throw Error(ErrorKind::validation, "trajectory count must be at least 1");
    }
    cfg.validate();

    PipelineResult result;
    result.tree = decompose_to_lipovms(povm, cfg.tol);
    const auto leaves = result.tree.leaves();
    std::vector<double> leaf_probs;
    std::vector<PlanRunner> runners;
    for (const auto& leaf : leaves) {
        leaf_probs.push_back(leaf.probability);
        runners.emplace_back(to_ppovm(*leaf.povm, cfg.tol), cfg);
    }

    const auto count = static_cast<std::size_t>(opts.trajectories);
    std::vector<TrajectoryRecord> records(count);
    const RunOptions run_opts{opts.record_paths};
    auto run_one = [&](std::size_t t) {
        Rng rng(opts.seed, t);
        const int leaf = rng.categorical(leaf_probs);
        const Ket psi = source.draw(rng);
        records[t] = runners[static_cast<std::size_t>(leaf)].run(psi, rng, run_opts);
        records[t].leaf = leaf;
    };

    const int threads = std::max(1, opts.threads > 0 ? opts.threads : threads_from_environment());
    if (threads == 1) {
        for (std::size_t t = 0; t < count; ++t) {
            run_one(t);
        }
    } else {
        // Each worker takes a strided slice; on failure, the error of the lowest
        // trajectory index wins so the reported error is schedule-independent.
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        std::vector<std::size_t> error_index(static_cast<std::size_t>(threads), count);
        {
            std::vector<std::jthread> pool;
            for (int w = 0; w < threads; ++w) {
                pool.emplace_back([&, w] {
                    for (std::size_t t = static_cast<std::size_t>(w); t < count; t += static_cast<std::size_t>(threads)) {
                        try {
                            run_one(t);
                        } catch (...) {
                            errors[static_cast<std::size_t>(w)] = std::current_exception();
                            error_index[static_cast<std::size_t>(w)] = t;
                            return;
                        }
                    }
                });
            }
        }
        const auto first = std::min_element(error_index.begin(), error_index.end());
        if (*first < count) {
            std::rethrow_exception(errors[static_cast<std::size_t>(first - error_index.begin())]);
        }
    }

    OutcomeStatistics& stats = result.stats;
    const auto labels = static_cast<std::size_t>(result.tree.num_outcomes);
    stats.counts.assign(labels, 0);
    stats.reference.assign(labels, 0.0);
    const std::vector<double> born = born_probabilities(povm, source.rho(), cfg.tol);
    for (std::size_t j = 0; j < povm.size(); ++j) {
        stats.reference[static_cast<std::size_t>(povm.labels[j])] += born[j];
    }
    double steps = 0.0;
    double fidelity = 0.0;
    for (const auto& rec : records) {
        if (!rec.converged) {
            ++stats.non_converged;
            continue;
        }
        ++stats.counts[static_cast<std::size_t>(rec.label)];
        ++stats.total;
        steps += rec.steps;
        stats.max_steps = std::max(stats.max_steps, rec.steps);
        fidelity += std::norm(rec.final_state(0));
    }
    const double total = static_cast<double>(stats.total);
    for (std::size_t i = 0; i < labels; ++i) {
        const double p = stats.reference[i];
        stats.frequencies.push_back(total > 0 ? static_cast<double>(stats.counts[i]) / total : 0.0);
        stats.standard_error.push_back(total > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / total) : 0.0);
    }
    if (stats.total > 0) {
        stats.mean_steps = steps / total;
        stats.mean_fidelity = fidelity / total;
    }
    if (opts.keep_records) {
        result.records = std::move(records);
    }
    return result;
}

Verdict compare_statistics(const OutcomeStatistics& stats, double threshold) {
    if (stats.total < 100) {
        throw Error(ErrorKind::validation, "statistical comparison needs at least 100 converged trajectories");
    }
    Verdict v;
    for (std::size_t i = 0; i < stats.frequencies.size(); ++i) {
        const double diff = stats.frequencies[i] - stats.reference[i];
        double z = 0.0;
        if (stats.standard_error[i] > 0.0) {
            z = diff / stats.standard_error[i];
        } else if (std::abs(diff) > 1e-12) {
            z = std::copysign(std::numeric_limits<double>::infinity(), diff);
        }
        v.z_scores.push_back(z);
        v.pass = v.pass && std::abs(z) <= threshold;
    }
    return v;
}

double destructiveness_metric(const TrajectoryRecord& record) { return 1.0 - std::norm(record.final_state(0)); }

// ---------------------------------------------------------------------------
// Exact enumeration

namespace {

struct OracleWalk {
    const PpovmPlan& plan;
    const WalkModel& model;
    const Ket& psi0;
    int depth;
    OracleReport& report;
    std::vector<std::vector<CompensatedSum>> vertex_mass;
    std::vector<CompensatedSum> terminated_mass;
    CompensatedSum pruned;

    void add_mass(int from_depth, int vertex, double mass, bool terminated) {
        for (int d = from_depth; d <= depth; ++d) {
            vertex_mass[static_cast<std::size_t>(d)][static_cast<std::size_t>(vertex)].add(mass);
            if (terminated) {
                terminated_mass[static_cast<std::size_t>(d)].add(mass);
            }
        }
    }

    void publish() {
        for (std::size_t d = 0; d < vertex_mass.size(); ++d) {
            for (std::size_t k = 0; k < vertex_mass[d].size(); ++k) {
                report.vertex_mass[d][k] = vertex_mass[d][k].value();
            }
            report.terminated_mass[d] = terminated_mass[d].value();
        }
        report.pruned_probability = pruned.value();
    }

    void visit(const WalkState& state, const Matrix2& product, double probability, std::uint64_t code) {
        const int len = state.steps;
        const auto at_vertex = vertex_check(state, model.config());
        const int vertex = model.povm().labels[static_cast<std::size_t>(argmax(state.x))];
        if (at_vertex || len == depth) {
            add_mass(len, vertex, probability, at_vertex.has_value());
            OracleString s;
            s.code = code;
            s.length = len;
            s.probability = probability;
            s.direct_probability = (product * psi0).squaredNorm();
            s.vertex = vertex;
            s.terminated = at_vertex.has_value();
            report.max_consistency_residual =
                std::max(report.max_consistency_residual, std::abs(s.probability - s.direct_probability));
            report.strings.push_back(s);
            return;
        }
        vertex_mass[static_cast<std::size_t>(len)][static_cast<std::size_t>(vertex)].add(probability);

        const StepPlan step_plan = plan_step(state, model);
        const PerOutcome<double> p = step_probabilities(state, step_plan);
        const auto n = static_cast<std::uint64_t>(model.size());
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] <= kPrunedProbability) {
                pruned.add(probability * p[k]);
                continue;
            }
            const WalkState next = advance(state, step_plan, static_cast<int>(k), model);
            visit(next, step_plan.outcomes[k].measurement.op * product, probability * p[k], code * n + k);
        }
    }
};

}  // namespace

OracleReport oracle_enumerate(const PpovmPlan& plan, const Ket& psi0, const WalkConfig& cfg, int depth) {
    if (depth < 0) {
        throw Error(ErrorKind::validation, "oracle depth must be non-negative");
    }
    const PlanRunner runner(plan, cfg);
    const int n = static_cast<int>(plan.active.size());
    double strings = 1.0;
    for (int d = 0; d < depth && n > 1; ++d) {
        strings *= n;
    }
    if (strings > static_cast<double>(kOracleStringLimit)) {
        std::ostringstream os;
        os << "enumeration of " << n << "^" << depth << " strings exceeds the limit of " << kOracleStringLimit;
        throw Error(ErrorKind::guard, os.str());
    }
    if (std::abs(psi0.norm() - 1.0) > 1e-10) {
        throw Error(ErrorKind::validation, "initial state must be normalised");
    }

    OracleReport report;
    report.depth = depth;
    report.outcomes = n;
    const auto num_projective = plan.projective.size();
    const auto num_source = plan.source.size();
    report.vertex_mass.assign(static_cast<std::size_t>(depth) + 1, std::vector<double>(num_projective, 0.0));
    report.terminated_mass.assign(static_cast<std::size_t>(depth) + 1, 0.0);
    report.reference = born_probabilities(plan.source, HermitianOp::outer(psi0), cfg.tol);

    if (!runner.model()) {
        OracleString s;
        s.probability = 1.0;
        s.direct_probability = psi0.squaredNorm();
        s.vertex = plan.active.front();
        s.terminated = true;
        report.strings.push_back(s);
        report.max_consistency_residual = std::abs(s.probability - s.direct_probability);
        for (int d = 0; d <= depth; ++d) {
            report.vertex_mass[static_cast<std::size_t>(d)][static_cast<std::size_t>(s.vertex)] = 1.0;
            report.terminated_mass[static_cast<std::size_t>(d)] = 1.0;
        }
    } else {
        const WalkModel& model = *runner.model();
        OracleWalk walk{plan, model, psi0, depth, report, {}, {}, {}};
        walk.vertex_mass.assign(static_cast<std::size_t>(depth) + 1, std::vector<CompensatedSum>(num_projective));
        walk.terminated_mass.assign(static_cast<std::size_t>(depth) + 1, CompensatedSum{});
        walk.visit(init_walk(model, psi0), Matrix2::Identity(), 1.0, 0);
        walk.publish();
    }

    CompensatedSum total;
    for (const auto& s : report.strings) {
        total.add(s.probability);
    }
    report.total_probability = total.value();
    report.string_count = report.strings.size();
    for (const auto& masses : report.vertex_mass) {
        std::vector<double> labels(num_source, 0.0);
        for (std::size_t k = 0; k < num_projective; ++k) {
            for (std::size_t i = 0; i < num_source; ++i) {
                labels[i] += plan.conditional(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * masses[k];
            }
        }
        double tv = 0.0;
        for (std::size_t i = 0; i < num_source; ++i) {
            tv += std::abs(labels[i] - report.reference[i]);
        }
        report.tv_distance.push_back(0.5 * tv);
        report.label_mass.push_back(std::move(labels));
    }
    return report;
}

}  // namespace weakpovm
