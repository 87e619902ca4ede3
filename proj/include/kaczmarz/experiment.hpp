#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/linalg.hpp"
#include "kaczmarz/problems.hpp"
#include "kaczmarz/rng.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz::bench {

enum class ProblemFamily { gaussian, trig, tightness, clustered };

struct ProblemSpec {
    ProblemFamily family = ProblemFamily::gaussian;
    std::size_t m = 0;          // rows (gaussian, trig, tightness)
    std::size_t n = 0;          // columns (gaussian, tightness, clustered)
    std::size_t r = 0;          // trig degree, n = 2r + 1
    double kappa = 0.0;         // tightness
    double sigma_small = 1e-8;  // clustered

    std::string describe() const;
};

enum class SolverKind { cyclic, uniform, weighted, relaxed, cgls, cgls_sub };

struct SolverSpec {
    SolverKind kind = SolverKind::weighted;
    std::optional<double> relaxation;  // relaxed: absent = 1 + n/m
    std::size_t subsample_m = 0;       // cgls_sub row target

    std::string label() const {
        switch (kind) {
            case SolverKind::cyclic: return "cyclic";
            case SolverKind::uniform: return "uniform";
            case SolverKind::weighted: return "weighted";
            case SolverKind::relaxed: return "relaxed";
            case SolverKind::cgls: return "cgls";
            case SolverKind::cgls_sub: return "cgls_sub:" + std::to_string(subsample_m);
        }
        return "?";
    }
};

enum class Aggregation { mean_sq_error, median_error };

struct ExperimentConfig {
    std::string name = "experiment";
    ProblemSpec problem;
    std::vector<SolverSpec> solvers;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    double epsilon = 1e-14;
    Aggregation aggregation = Aggregation::mean_sq_error;
    bool resample_instances = true;     // fresh instance per trial
    std::uint64_t max_projections = 1'000'000;
    std::uint64_t max_cgls_iterations = 0;  // 0 = auto: 4n + 200
    std::uint64_t trace_stride = 0;         // 0 = solver default
    std::string out_dir = ".";
};

struct CheckpointAggregate {
    std::uint64_t k = 0;
    double flops = 0.0;
    double mean_sq_error = 0.0;
    double mean_error = 0.0;
    double median_error = 0.0;
    std::size_t trials_contributing = 0;

    bool operator==(const CheckpointAggregate&) const = default;
};

struct SolverAggregate {
    std::string solver;
    std::vector<CheckpointAggregate> checkpoints;

    bool operator==(const SolverAggregate&) const = default;

    /// Right-continuous step interpolation of the mean squared error on
    /// the flop axis; this is how curves from solvers with different
    /// checkpoint cadences are compared.
    double mean_sq_error_at_flops(double flops) const {
        double value = checkpoints.empty() ? 0.0 : checkpoints.front().mean_sq_error;
        for (const auto& c : checkpoints) {
            if (c.flops > flops) break;
            value = c.mean_sq_error;
        }
        return value;
    }
};

struct TrialSummary {
    std::string solver;
    std::size_t trial = 0;
    bool failed = false;
    bool reached = false;            // error dropped to epsilon
    std::uint64_t steps_to_eps = 0;  // budget value when never reached
    double flops_to_eps = 0.0;
    double final_error = 0.0;

    bool operator==(const TrialSummary&) const = default;
};

struct EnvironmentStamp {
    std::uint64_t master_seed = 0;
    std::string problem;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t trials = 0;
    double epsilon = 0.0;
    double measured_k = 0.0;      // representative instance
    double measured_kappa = 0.0;

    bool operator==(const EnvironmentStamp&) const = default;
};

struct ExperimentResult {
    std::string name;
    Aggregation aggregation = Aggregation::mean_sq_error;
    EnvironmentStamp stamp;
    std::vector<SolverAggregate> solvers;
    std::vector<TrialSummary> trial_summaries;
    std::size_t failed_trials = 0;

    bool operator==(const ExperimentResult&) const = default;

    double mean_flops_to_eps(const std::string& solver) const {
        double acc = 0.0;
        std::size_t count = 0;
        for (const auto& t : trial_summaries)
            if (t.solver == solver && !t.failed) {
                acc += t.flops_to_eps;
                ++count;
            }
        return count ? acc / static_cast<double>(count) : 0.0;
    }

    double mean_steps_to_eps(const std::string& solver) const {
        double acc = 0.0;
        std::size_t count = 0;
        for (const auto& t : trial_summaries)
            if (t.solver == solver && !t.failed) {
                acc += static_cast<double>(t.steps_to_eps);
                ++count;
            }
        return count ? acc / static_cast<double>(count) : 0.0;
    }
};

inline std::string ProblemSpec::describe() const {
    switch (family) {
        case ProblemFamily::gaussian:
            return "gaussian " + std::to_string(m) + "x" + std::to_string(n);
        case ProblemFamily::trig:
            return "trig r=" + std::to_string(r) + " m=" + std::to_string(m);
        case ProblemFamily::tightness:
            return "tightness n=" + std::to_string(n) + " m=" + std::to_string(m) +
                   " kappa=" + std::to_string(kappa);
        case ProblemFamily::clustered:
            return "clustered n=" + std::to_string(n) + " sigma=" +
                   std::to_string(sigma_small);
    }
    return "?";
}

namespace detail {

// Reserved derivation index for the shared instance of fixed-instance
// experiments; trial indices stay well below it.
inline constexpr std::uint64_t kFixedInstanceIndex = 0x8000000000000000ull;

inline std::uint64_t solver_seed(const ExperimentConfig& cfg, std::size_t trial,
                                 std::size_t solver_index) {
    const std::uint64_t trial_seed = derive_stream(cfg.master_seed, trial).seed();
    return derive_stream(trial_seed, 1 + solver_index).seed();
}

} // namespace detail

/// The problem instance a given trial runs on. Pure in (config, trial):
/// resampling derives the generator stream from the trial index, fixed
/// instances from a reserved index shared by all trials.
inline LinearSystem instance_for_trial(const ExperimentConfig& cfg, std::size_t trial) {
    const std::uint64_t index =
        cfg.resample_instances ? trial : detail::kFixedInstanceIndex;
    RngStream rng = derive_stream(cfg.master_seed, index);
    switch (cfg.problem.family) {
        case ProblemFamily::gaussian:
            return gaussian_system(cfg.problem.m, cfg.problem.n, rng);
        case ProblemFamily::trig: {
            std::vector<double> nodes = uniform_sorted_nodes(cfg.problem.m, rng);
            Vector coeff(2 * cfg.problem.r + 1);
            for (auto& c : coeff)
                c = Scalar(rng.standard_normal(), rng.standard_normal());
            return trig_system(cfg.problem.r, nodes, coeff).system;
        }
        case ProblemFamily::tightness:
            return tightness_system(cfg.problem.n, cfg.problem.m, cfg.problem.kappa).system;
        case ProblemFamily::clustered:
            return clustered_spectrum_system(cfg.problem.n, cfg.problem.sigma_small, rng);
    }
    throw parameter_error("instance_for_trial: unknown problem family");
}

struct TrialRun {
    std::string solver;
    bool failed = false;
    std::string failure;
    IterateTrace trace;
};

struct TrialOutcome {
    std::size_t trial = 0;
    std::vector<TrialRun> runs;
};

/// Runs every configured solver of one trial on that trial's instance.
/// Pure in (config, trial), so trials may execute in any order.
inline TrialOutcome run_single_trial(const ExperimentConfig& cfg, std::size_t trial) {
    const LinearSystem instance = instance_for_trial(cfg, trial);
    TrialOutcome outcome;
    outcome.trial = trial;
    for (std::size_t si = 0; si < cfg.solvers.size(); ++si) {
        const SolverSpec& spec = cfg.solvers[si];
        TrialRun run;
        run.solver = spec.label();

        SolverOptions opts;
        opts.target_error = cfg.epsilon;
        opts.trace_stride = cfg.trace_stride;
        opts.seed = detail::solver_seed(cfg, trial, si);
        const bool is_cgls = spec.kind == SolverKind::cgls || spec.kind == SolverKind::cgls_sub;
        opts.max_projections =
            is_cgls ? (cfg.max_cgls_iterations ? cfg.max_cgls_iterations
                                               : 4 * instance.cols() + 200)
                    : cfg.max_projections;

        try {
            switch (spec.kind) {
                case SolverKind::cyclic:
                    run.trace = kaczmarz_cyclic(instance, opts);
                    break;
                case SolverKind::uniform:
                    run.trace = kaczmarz_randomized(instance, opts, RowWeighting::uniform);
                    break;
                case SolverKind::weighted:
                    run.trace = kaczmarz_randomized(instance, opts, RowWeighting::squared_norm);
                    break;
                case SolverKind::relaxed:
                    opts.relaxation = spec.relaxation;
                    run.trace = kaczmarz_relaxed(instance, opts);
                    break;
                case SolverKind::cgls:
                    run.trace = cgls(instance, opts);
                    break;
                case SolverKind::cgls_sub: {
                    RngStream sub_rng(opts.seed);
                    LinearSystem sub = subsample_rows(instance, spec.subsample_m, sub_rng);
                    run.trace = cgls(sub, opts);
                    break;
                }
            }
        } catch (const error& e) {
            run.failed = true;
            run.failure = e.what();
        }
        outcome.runs.push_back(std::move(run));
    }
    return outcome;
}

namespace detail {

inline double record_error(const TraceRecord& r) {
    return r.error ? *r.error : r.residual;
}

// Error of a trace at checkpoint k, as a right-continuous step function;
// traces that terminated earlier hold their final error.
inline double trace_error_at(const IterateTrace& t, std::uint64_t k) {
    double value = record_error(t.records.front());
    for (const auto& rec : t.records) {
        if (rec.k > k) break;
        value = record_error(rec);
    }
    return value;
}

} // namespace detail

/// Deterministic aggregation of per-trial runs, keyed by trial index; the
/// outcome vector may arrive in any order. Checkpoint grids are the union
/// of each solver's per-trial checkpoints; earlier-terminating trials
/// contribute their final error beyond their last record.
inline ExperimentResult aggregate_trials(const ExperimentConfig& cfg,
                                         std::vector<TrialOutcome> outcomes) {
    std::sort(outcomes.begin(), outcomes.end(),
              [](const TrialOutcome& a, const TrialOutcome& b) { return a.trial < b.trial; });

    ExperimentResult result;
    result.name = cfg.name;
    result.aggregation = cfg.aggregation;

    for (std::size_t si = 0; si < cfg.solvers.size(); ++si) {
        const std::string label = cfg.solvers[si].label();
        std::vector<const IterateTrace*> traces;
        for (const auto& outcome : outcomes) {
            const TrialRun& run = outcome.runs.at(si);
            TrialSummary summary;
            summary.solver = label;
            summary.trial = outcome.trial;
            summary.failed = run.failed;
            if (run.failed) {
                ++result.failed_trials;
            } else {
                traces.push_back(&run.trace);
                summary.steps_to_eps = run.trace.steps_to_error(cfg.epsilon);
                summary.flops_to_eps = run.trace.flops_to_error(cfg.epsilon);
                const auto& last = run.trace.records.back();
                summary.final_error = detail::record_error(last);
                for (const auto& rec : run.trace.records)
                    if (detail::record_error(rec) <= cfg.epsilon) {
                        summary.reached = true;
                        break;
                    }
            }
            result.trial_summaries.push_back(std::move(summary));
        }

        SolverAggregate agg;
        agg.solver = label;
        std::vector<std::uint64_t> grid;
        for (const IterateTrace* t : traces)
            for (const auto& rec : t->records) grid.push_back(rec.k);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

        std::vector<double> errs;
        for (std::uint64_t k : grid) {
            CheckpointAggregate c;
            c.k = k;
            errs.clear();
            for (const IterateTrace* t : traces) {
                errs.push_back(detail::trace_error_at(*t, k));
                if (t->records.back().k >= k) ++c.trials_contributing;
                if (c.flops == 0.0)
                    for (const auto& rec : t->records)
                        if (rec.k == k) c.flops = rec.flops;
            }
            if (!errs.empty()) {
                double sum = 0.0, sum_sq = 0.0;
                for (double e : errs) {
                    sum += e;
                    sum_sq += e * e;
                }
                c.mean_error = sum / static_cast<double>(errs.size());
                c.mean_sq_error = sum_sq / static_cast<double>(errs.size());
                std::sort(errs.begin(), errs.end());
                const std::size_t mid = errs.size() / 2;
                c.median_error = errs.size() % 2 ? errs[mid]
                                                 : 0.5 * (errs[mid - 1] + errs[mid]);
            }
            agg.checkpoints.push_back(c);
        }
        result.solvers.push_back(std::move(agg));
    }
    return result;
}

/// Executes the whole experiment: per-trial instances and solver streams
/// derived from the master seed, deterministic aggregation, and an
/// environment stamp with measured condition numbers of the trial-0
/// instance.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.trials < 1)
        throw parameter_error("run_experiment: trials must be >= 1");
    if (cfg.solvers.empty())
        throw parameter_error("run_experiment: no solvers configured");
    if (!(cfg.epsilon > 0.0))
        throw parameter_error("run_experiment: epsilon must be positive");

    std::vector<TrialOutcome> outcomes;
    outcomes.reserve(cfg.trials);
    for (std::size_t t = 0; t < cfg.trials; ++t)
        outcomes.push_back(run_single_trial(cfg, t));

    ExperimentResult result = aggregate_trials(cfg, std::move(outcomes));

    const LinearSystem representative = instance_for_trial(cfg, 0);
    EnvironmentStamp stamp;
    stamp.master_seed = cfg.master_seed;
    stamp.problem = cfg.problem.describe();
    stamp.m = representative.rows();
    stamp.n = representative.cols();
    stamp.trials = cfg.trials;
    stamp.epsilon = cfg.epsilon;
    const ConditionReport cond = condition_numbers(representative.a);
    stamp.measured_k = cond.k;
    stamp.measured_kappa = cond.kappa;
    result.stamp = stamp;
    return result;
}

/// Built-in experiment presets; `name` is one of fig1, fig3, fig4, relax
/// (fig2 is an analytic curve dump handled by the CLI directly).
inline ExperimentConfig make_preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.name = name;
    if (name == "fig1") {
        cfg.problem = {ProblemFamily::trig, 700, 101, 50, 0.0, 1e-8};
        cfg.solvers = {{SolverKind::cyclic, {}, 0},
                       {SolverKind::uniform, {}, 0},
                       {SolverKind::weighted, {}, 0}};
        cfg.trials = 10;
        cfg.epsilon = 1e-6;
        cfg.resample_instances = false;  // nodes fixed per experiment
        cfg.max_projections = 2'000'000;
    } else if (name == "fig3") {
        cfg.problem = {ProblemFamily::gaussian, 300, 100, 0, 0.0, 1e-8};
        cfg.solvers = {{SolverKind::weighted, {}, 0}, {SolverKind::cgls, {}, 0}};
        cfg.trials = 100;
        cfg.epsilon = 1e-14;
        cfg.max_projections = 400'000;
    } else if (name == "fig4") {
        cfg.problem = {ProblemFamily::gaussian, 500, 100, 0, 0.0, 1e-8};
        cfg.solvers = {{SolverKind::weighted, {}, 0},
                       {SolverKind::cgls, {}, 0},
                       {SolverKind::cgls_sub, {}, 272}};
        cfg.trials = 100;
        cfg.epsilon = 1e-14;
        cfg.max_projections = 400'000;
    } else if (name == "relax") {
        cfg.problem = {ProblemFamily::gaussian, 300, 100, 0, 0.0, 1e-8};
        cfg.solvers = {{SolverKind::weighted, {}, 0},
                       {SolverKind::relaxed, {}, 0}};  // lambda = 1 + n/m
        cfg.trials = 20;
        cfg.epsilon = 1e-14;
        cfg.max_projections = 400'000;
    } else {
        throw parameter_error("unknown preset: " + name);
    }
    return cfg;
}

} // namespace kaczmarz::bench
