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

#include "weakpovm/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

namespace weakpovm {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fixed(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

Json finite_or_string(double v) {
    if (std::isfinite(v)) {
        return v;
    }
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

// Named checks recorded in every bundle.
class InvariantLog {
  public:
    void check(const std::string& name, double value, double tolerance) {
        const bool pass = std::isfinite(value) && value <= tolerance;
        entries_.push_back(
            Json{{"name", name}, {"value", finite_or_string(value)}, {"tolerance", tolerance}, {"pass", pass}});
        ok_ = ok_ && pass;
    }
    [[nodiscard]] bool ok() const { return ok_; }
    [[nodiscard]] Json json() const { return entries_; }
    [[nodiscard]] std::string text() const {
        std::ostringstream os;
        for (const auto& e : entries_) {
            os << "  [" << (e["pass"].get<bool>() ? "ok" : "FAIL") << "] " << e["name"].get<std::string>() << " = "
               << e["value"].dump() << " (tol " << e["tolerance"].dump() << ")\n";
        }
        return os.str();
    }

  private:
    Json entries_ = Json::array();
    bool ok_ = true;
};

Json header(const RunConfig& cfg) {
    return Json{{"tool", "weakpovm"}, {"version", kVersion}, {"command", cfg.command}, {"config", run_config_to_json(cfg)}};
}

void finish(CommandResult& r, const InvariantLog& log) {
    r.bundle["invariants"] = log.json();
    r.bundle["invariants_pass"] = log.ok();
    r.summary += "invariants:\n" + log.text();
    if (!log.ok()) {
        r.exit_code = kExitNumerical;
    }
}

double max_abs_diff(const HermitianOp& a, const HermitianOp& b) { return max_abs(a.matrix() - b.matrix()); }

}  // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::validation:
        case ErrorKind::parse:
        case ErrorKind::guard:
            return kExitValidation;
        default:
            return kExitNumerical;
    }
}

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::validate() const {
    walk.validate();
    if (trajectories < 1) {
        throw Error(ErrorKind::validation, "trajectory count must be at least 1");
    }
    if (depth < 0) {
        throw Error(ErrorKind::validation, "oracle depth must be non-negative");
    }
    if (!(z_threshold > 0.0)) {
        throw Error(ErrorKind::validation, "z threshold must be positive");
    }
    if (threads < 0) {
        throw Error(ErrorKind::validation, "thread count must be non-negative");
    }
}

// out_dir and threads describe where and how a run executes, not what it
// computes, so they are not echoed; bundles from different directories or
// worker counts stay byte-identical.
Json run_config_to_json(const RunConfig& cfg) {
    return Json{{"command", cfg.command},
                {"povm_path", cfg.povm_path},
                {"state", cfg.state ? state_to_json(*cfg.state) : Json(nullptr)},
                {"walk", walk_config_to_json(cfg.walk)},
                {"trajectories", cfg.trajectories},
                {"seed", cfg.seed},
                {"depth", cfg.depth},
                {"z_threshold", cfg.z_threshold},
                {"write_csv", cfg.write_csv},
                {"include_strings", cfg.include_strings},
                {"timing", cfg.timing}};
}

RunConfig run_config_from_json(const Json& j) {
    try {
        RunConfig cfg;
        cfg.command = j.at("command").get<std::string>();
        cfg.povm_path = j.at("povm_path").get<std::string>();
        if (!j.at("state").is_null()) {
            cfg.state = state_from_json(j.at("state"));
        }
        cfg.walk = walk_config_from_json(j.at("walk"));
        cfg.trajectories = j.at("trajectories").get<std::int64_t>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.depth = j.at("depth").get<int>();
        cfg.z_threshold = j.at("z_threshold").get<double>();
        cfg.write_csv = j.at("write_csv").get<bool>();
        cfg.include_strings = j.at("include_strings").get<bool>();
        cfg.timing = j.at("timing").get<bool>();
        cfg.validate();
        return cfg;
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::parse, std::string("run config: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_validate(const RunConfig& cfg, const Povm& povm) {
    CommandResult r;
    r.bundle = header(cfg);
    r.bundle["povm"] = povm_to_json(povm);
    const auto witness = find_dependence(povm, cfg.walk.tol);
    r.bundle["linearly_independent"] = !witness.has_value();
    r.bundle["dependence"] = witness ? Json{{"c", witness->c}, {"order", witness->order}} : Json(nullptr);

    std::ostringstream os;
    os << "POVM with " << povm.size() << " elements, " << (witness ? "linearly dependent" : "linearly independent")
       << "\n  idx label   trace      min_eig    max_eig    bloch\n";
    InvariantLog log;
    double min_eig = 0.0;
    HermitianOp total;
    for (std::size_t i = 0; i < povm.size(); ++i) {
        const auto& e = povm.elements[i];
        const EigenPair2 eig = eigh2(e);
        const BlochForm bf = pauli_decompose(e);
        min_eig = std::min(min_eig, eig.values[1]);
        total += e;
        os << "  " << i << "   " << povm.labels[i] << "       " << fixed(e.trace()) << "  " << fixed(eig.values[1])
           << "  " << fixed(eig.values[0]) << "  (" << fixed(bf.v.x(), 4) << ", " << fixed(bf.v.y(), 4) << ", "
           << fixed(bf.v.z(), 4) << ")\n";
    }
    r.summary = os.str();
    log.check("positivity", std::max(0.0, -min_eig), cfg.walk.tol.povm_positivity);
    log.check("completeness", max_abs_diff(total, HermitianOp::identity()), cfg.walk.tol.povm_completeness);
    finish(r, log);
    return r;
}

CommandResult cmd_decompose(const RunConfig& cfg, const Povm& povm) {
    const Tolerances& tol = cfg.walk.tol;
    CommandResult r;
    r.bundle = header(cfg);
    const LipovmTree tree = decompose_to_lipovms(povm, tol);
    r.bundle["tree"] = tree_to_json(tree);

    InvariantLog log;
    std::ostringstream os;
    os << "decomposition: " << tree.nodes.size() << " nodes\n  leaf  probability      outcomes  labels\n";
    Json plans = Json::array();
    std::size_t max_leaf = 0;
    double dependent_leaves = 0.0;
    double branch_total = 0.0;
    double reconstruction = 0.0;
    double conditional_columns = 0.0;
    double projective_completeness = 0.0;
    std::vector<HermitianOp> by_label_tree(static_cast<std::size_t>(tree.num_outcomes));
    std::vector<HermitianOp> by_label_source(static_cast<std::size_t>(tree.num_outcomes));
    for (std::size_t i = 0; i < povm.size(); ++i) {
        by_label_source[static_cast<std::size_t>(povm.labels[i])] += povm.elements[i];
    }
    const auto leaves = tree.leaves();
    for (std::size_t l = 0; l < leaves.size(); ++l) {
        const Povm& leaf = *leaves[l].povm;
        branch_total += leaves[l].probability;
        max_leaf = std::max(max_leaf, leaf.size());
        if (find_dependence(leaf, tol)) {
            dependent_leaves += 1.0;
        }
        for (std::size_t i = 0; i < leaf.size(); ++i) {
            by_label_tree[static_cast<std::size_t>(leaf.labels[i])] += leaves[l].probability * leaf.elements[i];
        }
        const PpovmPlan plan = to_ppovm(leaf, tol);
        HermitianOp projective_sum;
        for (const auto& p : plan.projective) {
            projective_sum += p;
        }
        projective_completeness = std::max(projective_completeness, max_abs_diff(projective_sum, HermitianOp::identity()));
        for (std::size_t i = 0; i < leaf.size(); ++i) {
            HermitianOp rebuilt;
            for (std::size_t k = 0; k < plan.projective.size(); ++k) {
                rebuilt += plan.conditional(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * plan.projective[k];
            }
            reconstruction = std::max(reconstruction, max_abs_diff(rebuilt, leaf.elements[i]));
        }
        for (const int k : plan.active) {
            conditional_columns = std::max(conditional_columns, std::abs(plan.conditional.col(k).sum() - 1.0));
        }
        plans.push_back(plan_to_json(plan));
        os << "  " << l << "     " << fixed(leaves[l].probability, 12) << "   " << leaf.size() << "         [";
        for (std::size_t i = 0; i < leaf.size(); ++i) {
            os << (i ? ", " : "") << leaf.labels[i];
        }
        os << "]\n";
    }
    double preservation = 0.0;
    for (std::size_t i = 0; i < by_label_tree.size(); ++i) {
        preservation = std::max(preservation, max_abs_diff(by_label_tree[i], by_label_source[i]));
    }
    r.bundle["plans"] = std::move(plans);
    r.summary = os.str();
    log.check("leaf_outcomes_minus_4", static_cast<double>(max_leaf) - 4.0, 0.0);
    log.check("dependent_leaves", dependent_leaves, 0.0);
    log.check("branch_probability_total", std::abs(branch_total - 1.0), 1e-12);
    log.check("probability_preservation", preservation, 1e-10);
    log.check("ppovm_reconstruction", reconstruction, 1e-10);
    log.check("conditional_columns", conditional_columns, 1e-12);
    log.check("projective_completeness", projective_completeness, 1e-10);
    finish(r, log);
    return r;
}

CommandResult cmd_simulate(const RunConfig& cfg, const Povm& povm) {
    if (!cfg.state) {
        throw Error(ErrorKind::validation, "simulate needs a state (--state FILE)");
    }
    const auto start = std::chrono::steady_clock::now();
    PipelineOptions opts;
    opts.seed = cfg.seed;
    opts.trajectories = cfg.trajectories;
    opts.threads = cfg.threads;
    opts.keep_records = true;
    const PipelineResult result = run_pipeline(povm, cfg.state->source(), cfg.walk, opts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const OutcomeStatistics& stats = result.stats;

    CommandResult r;
    r.bundle = header(cfg);
    r.bundle["statistics"] = statistics_to_json(stats);
    r.bundle["leaves"] = tree_to_json(result.tree)["leaves"];

    // Destructive-structure and record checks over every walk that ran.
    InvariantLog log;
    const double cos_phi = std::cos(cfg.walk.phi);
    double lower_left = 0.0;
    double ratio = 0.0;
    double infidelity_excess = 0.0;
    double vertex_gap = 0.0;
    double log_prob = -std::numeric_limits<double>::infinity();
    std::ostringstream csv;
    csv << "trajectory,leaf,steps,vertex,output,final_infidelity\n";
    for (std::size_t t = 0; t < result.records.size(); ++t) {
        const TrajectoryRecord& rec = result.records[t];
        const double infidelity = destructiveness_metric(rec);
        csv << t << ',' << rec.leaf << ',' << rec.steps << ',' << rec.vertex << ',' << rec.label << ','
            << fmt(infidelity) << '\n';
        if (!rec.converged) {
            continue;
        }
        log_prob = std::max(log_prob, rec.log_probability);
        vertex_gap = std::max(vertex_gap, (1.0 - cfg.walk.epsilon_vertex) - rec.x.maxCoeff());
        if (rec.steps == 0) {
            continue;
        }
        const Matrix2& m = rec.accumulated;
        lower_left = std::max(lower_left, std::abs(m(1, 0)));
        const double expected = std::pow(cos_phi, rec.steps);
        ratio = std::max(ratio, diagonal_ratio_residual(m, cfg.walk.phi, rec.steps));
        infidelity_excess = std::max(infidelity_excess, infidelity / (100.0 * expected * expected));
    }
    const double non_converged = static_cast<double>(stats.non_converged) / static_cast<double>(cfg.trajectories);
    double freq_sum = 0.0;
    std::int64_t count_sum = 0;
    for (std::size_t i = 0; i < stats.counts.size(); ++i) {
        freq_sum += stats.frequencies[i];
        count_sum += stats.counts[i];
    }
    log.check("non_converged_fraction", non_converged, 1e-3);
    log.check("counts_sum_mismatch", std::abs(static_cast<double>(count_sum - stats.total)), 0.0);
    log.check("frequency_sum", stats.total > 0 ? std::abs(freq_sum - 1.0) : 0.0, 1e-12);
    log.check("max_log_probability", std::isfinite(log_prob) ? log_prob : 0.0, 0.0);
    log.check("terminal_vertex_gap", vertex_gap, 0.0);
    log.check("lower_left_entry", lower_left, 0.0);
    log.check("diagonal_ratio", ratio, 1e-9);
    log.check("infidelity_over_bound", infidelity_excess, 1.0);

    std::ostringstream os;
    os << "trajectories " << cfg.trajectories << "  converged " << stats.total << "  non-converged "
       << stats.non_converged << "\nmean steps " << fixed(stats.mean_steps, 2) << "  max steps " << stats.max_steps
       << "  mean fidelity to |0> " << fixed(stats.mean_fidelity) << "\n  label  count   frequency  reference  z\n";
    Json verdict;
    bool statistical_pass = true;
    if (stats.total >= 100) {
        const Verdict v = compare_statistics(stats, cfg.z_threshold);
        Json z = Json::array();
        for (double s : v.z_scores) {
            z.push_back(finite_or_string(s));
        }
        verdict = Json{{"pass", v.pass}, {"threshold", cfg.z_threshold}, {"z_scores", std::move(z)}};
        statistical_pass = v.pass;
        for (std::size_t i = 0; i < stats.counts.size(); ++i) {
            os << "  " << i << "      " << stats.counts[i] << "  " << fixed(stats.frequencies[i]) << "   "
               << fixed(stats.reference[i]) << "   " << fixed(v.z_scores[i], 2) << "\n";
        }
        os << "statistical check (|z| <= " << cfg.z_threshold << "): " << (v.pass ? "pass" : "FAIL") << "\n";
    } else {
        verdict = Json{{"pass", nullptr}, {"reason", "fewer than 100 converged trajectories"}};
        os << "statistical check skipped (fewer than 100 converged trajectories)\n";
    }
    r.bundle["verdict"] = std::move(verdict);
    r.summary = os.str();
    if (cfg.timing) {
        r.bundle["timing"] = Json{{"seconds", seconds}};
    }
    if (cfg.write_csv) {
        r.csv = csv.str();
    }
    finish(r, log);
    if (r.exit_code == kExitOk && !statistical_pass) {
        r.exit_code = kExitStatistical;
    }
    return r;
}

CommandResult cmd_oracle(const RunConfig& cfg, const Povm& povm) {
    if (!cfg.state || cfg.state->kind != StateSpec::Kind::pure) {
        throw Error(ErrorKind::validation, "oracle needs a pure state (--state FILE with a \"pure\" entry)");
    }
    if (find_dependence(povm, cfg.walk.tol)) {
        throw Error(ErrorKind::validation, "oracle enumerates a single walk; the POVM must be linearly independent");
    }
    const auto start = std::chrono::steady_clock::now();
    const PpovmPlan plan = to_ppovm(povm, cfg.walk.tol);
    const OracleReport report = oracle_enumerate(plan, cfg.state->psi, cfg.walk, cfg.depth);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    CommandResult r;
    r.bundle = header(cfg);
    r.bundle["plan"] = plan_to_json(plan);
    r.bundle["oracle"] = oracle_to_json(report, cfg.include_strings);
    if (cfg.timing) {
        r.bundle["timing"] = Json{{"seconds", seconds}};
    }

    std::ostringstream csv;
    csv << "depth,tv_distance,terminated_mass";
    for (std::size_t i = 0; i < report.reference.size(); ++i) {
        csv << ",mass_" << i;
    }
    csv << '\n';
    std::ostringstream os;
    os << "exact enumeration to depth " << report.depth << ": " << report.string_count << " strings, total "
       << fmt(report.total_probability) << "\n  depth  tv_distance  terminated\n";
    bool decreasing = true;
    for (std::size_t d = 0; d < report.tv_distance.size(); ++d) {
        csv << d << ',' << fmt(report.tv_distance[d]) << ',' << fmt(report.terminated_mass[d]);
        for (double m : report.label_mass[d]) {
            csv << ',' << fmt(m);
        }
        csv << '\n';
        os << "  " << d << "      " << fixed(report.tv_distance[d], 8) << "   " << fixed(report.terminated_mass[d])
           << "\n";
        if (d > 0 && !(report.tv_distance[d] < report.tv_distance[d - 1])) {
            decreasing = false;
        }
    }
    r.bundle["tv_strictly_decreasing"] = decreasing;
    r.csv = csv.str();
    r.summary = os.str();

    InvariantLog log;
    log.check("total_probability", std::abs(report.total_probability - 1.0), 1e-12);
    log.check("string_consistency", report.max_consistency_residual, 1e-12);
    log.check("pruned_probability", report.pruned_probability, 1e-12);
    finish(r, log);
    return r;
}

CommandResult run_command(const RunConfig& cfg) {
    cfg.validate();
    const Povm povm = load_povm_file(cfg.povm_path, cfg.walk.tol);
    CommandResult r;
    std::string json_name;
    std::string csv_name;
    if (cfg.command == "validate") {
        r = cmd_validate(cfg, povm);
        json_name = "validate.json";
    } else if (cfg.command == "decompose") {
        r = cmd_decompose(cfg, povm);
        json_name = "decomposition.json";
    } else if (cfg.command == "simulate") {
        r = cmd_simulate(cfg, povm);
        json_name = "simulation.json";
        csv_name = "trajectories.csv";
    } else if (cfg.command == "oracle") {
        r = cmd_oracle(cfg, povm);
        json_name = "oracle.json";
        csv_name = "oracle_tv.csv";
    } else {
        throw Error(ErrorKind::validation, "unknown command " + cfg.command);
    }
    if (!cfg.out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(cfg.out_dir, ec);
        if (ec) {
            throw Error(ErrorKind::parse, "cannot create " + cfg.out_dir + ": " + ec.message());
        }
        const std::filesystem::path dir(cfg.out_dir);
        write_text_file((dir / json_name).string(), r.bundle.dump(2) + "\n");
        if (!csv_name.empty() && !r.csv.empty()) {
            write_text_file((dir / csv_name).string(), r.csv);
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Command line

int run_cli(int argc, char** argv) {
    CLI::App app{"weakpovm: perform qubit POVMs as sequences of destructive weak measurements"};
    app.require_subcommand(1);
    app.footer(
        "Files are JSON with complex numbers as [re, im] pairs.\n"
        "  POVM:  {\"elements\": [2x2 matrices, row-major], \"labels\": [optional ints]}\n"
        "  state: {\"pure\": [z0, z1]} | {\"density\": 2x2 matrix} | {\"mixed\": \"uniform\"}\n"
        "A density matrix is simulated by sampling its eigenvectors with their eigenvalues\n"
        "as probabilities; \"uniform\" samples Haar-random pure states.\n"
        "WEAKPOVM_THREADS sets the number of simulation worker threads (default 1);\n"
        "results do not depend on it.\n"
        "Exit codes: 0 success, 1 invalid input, 2 statistical check failed,\n"
        "3 numerical invariant failed.");

    RunConfig cfg;
    std::string state_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("povm", cfg.povm_path, "POVM JSON file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", cfg.out_dir, "Directory for result files (created if missing)");
        sub->add_option("--phi", cfg.walk.phi, "Weak-swap angle in radians, in (0, pi/4)")->capture_default_str();
        sub->add_option("--eps", cfg.walk.epsilon_vertex, "Stop once max x_i >= 1 - eps")->capture_default_str();
        sub->add_option("--max-steps", cfg.walk.max_steps,
                        "Step limit per trajectory (0: 20 * ceil(ln(1/eps) / (2 ln(1/cos phi))))")
            ->capture_default_str();
        sub->add_flag("--timing", cfg.timing, "Record wall-clock time in the result bundle");
    };
    auto* validate = app.add_subcommand("validate", "Check a POVM file and report linear dependence");
    add_common(validate);
    auto* decompose = app.add_subcommand("decompose", "Show the linearly independent leaves and projective plans");
    add_common(decompose);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo trajectories of the full measurement chain");
    add_common(simulate);
    simulate->add_option("--state", state_path, "State JSON file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--traj", cfg.trajectories, "Number of trajectories")->capture_default_str();
    simulate->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    simulate->add_option("--z", cfg.z_threshold, "Pass threshold on per-label |z|")->capture_default_str();
    bool no_csv = false;
    simulate->add_flag("--no-csv", no_csv, "Skip trajectories.csv");
    auto* oracle = app.add_subcommand("oracle", "Exact enumeration of all outcome strings up to a depth");
    add_common(oracle);
    oracle->add_option("--state", state_path, "Pure-state JSON file")->required()->check(CLI::ExistingFile);
    oracle->add_option("--depth", cfg.depth, "Enumeration depth N (n^N <= 1e6)")->capture_default_str();
    oracle->add_flag("--strings", cfg.include_strings, "Include every string in oracle.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        cfg.command = app.get_subcommands().front()->get_name();
        cfg.write_csv = !no_csv;
        if (!state_path.empty()) {
            cfg.state = load_state_file(state_path, cfg.walk.tol);
        }
        const CommandResult r = run_command(cfg);
        std::cout << r.summary;
        if (!cfg.out_dir.empty()) {
            std::cout << "results written to " << cfg.out_dir << "\n";
        }
        return r.exit_code;
    } catch (const Error& e) {
        std::cerr << "weakpovm: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "weakpovm: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace weakpovm
