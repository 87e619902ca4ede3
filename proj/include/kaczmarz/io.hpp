#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kaczmarz/errors.hpp"
#include "kaczmarz/experiment.hpp"
#include "kaczmarz/solvers.hpp"
#include "kaczmarz/theory.hpp"

namespace kaczmarz::bench {

/// 17 significant digits: round-trip exact for IEEE doubles.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const char* aggregation_name(Aggregation a) {
    return a == Aggregation::mean_sq_error ? "mean_sq_error" : "median_error";
}

inline Aggregation aggregation_from_name(const std::string& s) {
    if (s == "mean_sq_error") return Aggregation::mean_sq_error;
    if (s == "median_error") return Aggregation::median_error;
    throw parameter_error("unknown aggregation: " + s);
}

// ---------------------------------------------------------------------------
// Aggregated results: CSV / JSON / meta
// ---------------------------------------------------------------------------

inline std::string to_csv(const ExperimentResult& result) {
    std::string out = "solver,checkpoint_k,flops,mean_error,median_error,trials_contributing\n";
    for (const auto& solver : result.solvers) {
        for (const auto& c : solver.checkpoints) {
            out += solver.solver;
            out += ',';
            out += std::to_string(c.k);
            out += ',';
            out += format_double(c.flops);
            out += ',';
            out += format_double(c.mean_error);
            out += ',';
            out += format_double(c.median_error);
            out += ',';
            out += std::to_string(c.trials_contributing);
            out += '\n';
        }
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for writing", path);
    f << content;
    if (!f) throw io_error("write failed", path);
}

inline void emit_csv(const ExperimentResult& result, const std::string& path) {
    write_file(path, to_csv(result));
}

namespace detail {

inline void json_kv(std::string& out, const char* key, const std::string& value,
                    bool quote, bool comma = true) {
    out += '"';
    out += key;
    out += "\":";
    if (quote) {
        out += '"';
        out += value;
        out += '"';
    } else {
        out += value;
    }
    if (comma) out += ',';
}

} // namespace detail

/// JSON mirror of ExperimentResult. Emission is handwritten so every
/// double is printed with 17 significant digits and the byte stream is a
/// pure function of the result.
inline std::string to_json(const ExperimentResult& r) {
    using detail::json_kv;
    std::string out = "{";
    json_kv(out, "schema_version", "1", false);
    json_kv(out, "name", r.name, true);
    json_kv(out, "aggregation", aggregation_name(r.aggregation), true);
    out += "\"stamp\":{";
    json_kv(out, "master_seed", std::to_string(r.stamp.master_seed), false);
    json_kv(out, "problem", r.stamp.problem, true);
    json_kv(out, "m", std::to_string(r.stamp.m), false);
    json_kv(out, "n", std::to_string(r.stamp.n), false);
    json_kv(out, "trials", std::to_string(r.stamp.trials), false);
    json_kv(out, "epsilon", format_double(r.stamp.epsilon), false);
    json_kv(out, "measured_k", format_double(r.stamp.measured_k), false);
    json_kv(out, "measured_kappa", format_double(r.stamp.measured_kappa), false, false);
    out += "},";
    json_kv(out, "failed_trials", std::to_string(r.failed_trials), false);
    out += "\"solvers\":[";
    for (std::size_t i = 0; i < r.solvers.size(); ++i) {
        const auto& s = r.solvers[i];
        if (i) out += ',';
        out += "{";
        json_kv(out, "solver", s.solver, true);
        out += "\"checkpoints\":[";
        for (std::size_t j = 0; j < s.checkpoints.size(); ++j) {
            const auto& c = s.checkpoints[j];
            if (j) out += ',';
            out += "{";
            json_kv(out, "k", std::to_string(c.k), false);
            json_kv(out, "flops", format_double(c.flops), false);
            json_kv(out, "mean_sq_error", format_double(c.mean_sq_error), false);
            json_kv(out, "mean_error", format_double(c.mean_error), false);
            json_kv(out, "median_error", format_double(c.median_error), false);
            json_kv(out, "trials_contributing", std::to_string(c.trials_contributing),
                    false, false);
            out += "}";
        }
        out += "]}";
    }
    out += "],\"trial_summaries\":[";
    for (std::size_t i = 0; i < r.trial_summaries.size(); ++i) {
        const auto& t = r.trial_summaries[i];
        if (i) out += ',';
        out += "{";
        json_kv(out, "solver", t.solver, true);
        json_kv(out, "trial", std::to_string(t.trial), false);
        json_kv(out, "failed", t.failed ? "true" : "false", false);
        json_kv(out, "reached", t.reached ? "true" : "false", false);
        json_kv(out, "steps_to_eps", std::to_string(t.steps_to_eps), false);
        json_kv(out, "flops_to_eps", format_double(t.flops_to_eps), false);
        json_kv(out, "final_error", format_double(t.final_error), false, false);
        out += "}";
    }
    out += "]}";
    return out;
}

inline void emit_json(const ExperimentResult& result, const std::string& path) {
    write_file(path, to_json(result));
}

inline ExperimentResult parse_result_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ExperimentResult r;
    r.name = j.at("name").get<std::string>();
    r.aggregation = aggregation_from_name(j.at("aggregation").get<std::string>());
    const auto& st = j.at("stamp");
    r.stamp.master_seed = st.at("master_seed").get<std::uint64_t>();
    r.stamp.problem = st.at("problem").get<std::string>();
    r.stamp.m = st.at("m").get<std::size_t>();
    r.stamp.n = st.at("n").get<std::size_t>();
    r.stamp.trials = st.at("trials").get<std::size_t>();
    r.stamp.epsilon = st.at("epsilon").get<double>();
    r.stamp.measured_k = st.at("measured_k").get<double>();
    r.stamp.measured_kappa = st.at("measured_kappa").get<double>();
    r.failed_trials = j.at("failed_trials").get<std::size_t>();
    for (const auto& js : j.at("solvers")) {
        SolverAggregate s;
        s.solver = js.at("solver").get<std::string>();
        for (const auto& jc : js.at("checkpoints")) {
            CheckpointAggregate c;
            c.k = jc.at("k").get<std::uint64_t>();
            c.flops = jc.at("flops").get<double>();
            c.mean_sq_error = jc.at("mean_sq_error").get<double>();
            c.mean_error = jc.at("mean_error").get<double>();
            c.median_error = jc.at("median_error").get<double>();
            c.trials_contributing = jc.at("trials_contributing").get<std::size_t>();
            s.checkpoints.push_back(c);
        }
        r.solvers.push_back(std::move(s));
    }
    for (const auto& jt : j.at("trial_summaries")) {
        TrialSummary t;
        t.solver = jt.at("solver").get<std::string>();
        t.trial = jt.at("trial").get<std::size_t>();
        t.failed = jt.at("failed").get<bool>();
        t.reached = jt.at("reached").get<bool>();
        t.steps_to_eps = jt.at("steps_to_eps").get<std::uint64_t>();
        t.flops_to_eps = jt.at("flops_to_eps").get<double>();
        t.final_error = jt.at("final_error").get<double>();
        r.trial_summaries.push_back(std::move(t));
    }
    return r;
}

inline ExperimentResult load_result_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open", path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_result_json(ss.str());
}

inline std::string to_meta(const ExperimentResult& r) {
    std::string out;
    out += "name = " + r.name + "\n";
    out += "problem = " + r.stamp.problem + "\n";
    out += "m = " + std::to_string(r.stamp.m) + "\n";
    out += "n = " + std::to_string(r.stamp.n) + "\n";
    out += "trials = " + std::to_string(r.stamp.trials) + "\n";
    out += "master_seed = " + std::to_string(r.stamp.master_seed) + "\n";
    out += "epsilon = " + format_double(r.stamp.epsilon) + "\n";
    out += "aggregation = " + std::string(aggregation_name(r.aggregation)) + "\n";
    out += "measured_k = " + format_double(r.stamp.measured_k) + "\n";
    out += "measured_kappa = " + format_double(r.stamp.measured_kappa) + "\n";
    out += "failed_trials = " + std::to_string(r.failed_trials) + "\n";
    for (const auto& s : r.solvers) {
        out += "solver = " + s.solver;
        out += "  mean_steps_to_eps = " + format_double(r.mean_steps_to_eps(s.solver));
        out += "  mean_flops_to_eps = " + format_double(r.mean_flops_to_eps(s.solver));
        out += "\n";
    }
    return out;
}

inline void emit_meta(const ExperimentResult& result, const std::string& path) {
    write_file(path, to_meta(result));
}

// ---------------------------------------------------------------------------
// Instance files: dimensions, then row-major complex pairs in plain text
// ---------------------------------------------------------------------------

inline std::string to_instance_text(const LinearSystem& sys) {
    std::string out;
    out += std::to_string(sys.rows()) + " " + std::to_string(sys.cols()) + " " +
           (sys.x_true ? "1" : "0") + "\n";
    auto emit_scalar = [&out](Scalar z) {
        out += format_double(z.real());
        out += ' ';
        out += format_double(z.imag());
        out += '\n';
    };
    for (std::size_t i = 0; i < sys.rows(); ++i)
        for (std::size_t j = 0; j < sys.cols(); ++j) emit_scalar(sys.a(i, j));
    for (const Scalar& z : sys.b) emit_scalar(z);
    if (sys.x_true)
        for (const Scalar& z : *sys.x_true) emit_scalar(z);
    return out;
}

inline void save_instance(const LinearSystem& sys, const std::string& path) {
    write_file(path, to_instance_text(sys));
}

inline LinearSystem parse_instance_text(const std::string& text, const std::string& path) {
    std::istringstream in(text);
    std::size_t m = 0, n = 0;
    int has_xtrue = 0;
    if (!(in >> m >> n >> has_xtrue) || m == 0 || n == 0)
        throw io_error("instance file: bad dimension header", path);
    auto read_scalar = [&in, &path]() {
        double re = 0.0, im = 0.0;
        if (!(in >> re >> im))
            throw io_error("instance file: truncated entry list", path);
        return Scalar(re, im);
    };
    Vector entries(m * n);
    for (Scalar& z : entries) z = read_scalar();
    DenseMatrix a(m, n, std::move(entries));
    Vector b(m);
    for (Scalar& z : b) z = read_scalar();
    std::optional<Vector> x_true;
    if (has_xtrue) {
        Vector x(n);
        for (Scalar& z : x) z = read_scalar();
        x_true = std::move(x);
    }
    return LinearSystem(std::move(a), std::move(b), std::move(x_true));
}

inline LinearSystem load_instance(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open", path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_instance_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Experiment config files: flat key = value lines, '#' comments
// ---------------------------------------------------------------------------

inline SolverSpec parse_solver_token(const std::string& token) {
    SolverSpec spec;
    const auto colon = token.find(':');
    const std::string head = token.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : token.substr(colon + 1);
    if (head == "cyclic") {
        spec.kind = SolverKind::cyclic;
    } else if (head == "uniform") {
        spec.kind = SolverKind::uniform;
    } else if (head == "weighted") {
        spec.kind = SolverKind::weighted;
    } else if (head == "relaxed") {
        spec.kind = SolverKind::relaxed;
        if (!arg.empty()) {
            try {
                spec.relaxation = std::stod(arg);
            } catch (const std::exception&) {
                throw parameter_error("solver relaxed: bad relaxation value '" + arg + "'");
            }
        }
    } else if (head == "cgls") {
        spec.kind = SolverKind::cgls;
    } else if (head == "cgls_sub") {
        spec.kind = SolverKind::cgls_sub;
        try {
            spec.subsample_m = static_cast<std::size_t>(std::stoull(arg));
        } catch (const std::exception&) {
            throw parameter_error("solver cgls_sub needs a row count, e.g. cgls_sub:272");
        }
    } else {
        throw parameter_error("unknown solver kind: " + token);
    }
    return spec;
}

inline ProblemFamily problem_family_from_name(const std::string& s) {
    if (s == "gaussian") return ProblemFamily::gaussian;
    if (s == "trig") return ProblemFamily::trig;
    if (s == "tightness") return ProblemFamily::tightness;
    if (s == "clustered") return ProblemFamily::clustered;
    throw parameter_error("unknown problem family: " + s);
}

/// Parses the flat key = value config format. Recognized keys: name,
/// problem, m, n, r, kappa, sigma_small, solvers, trials, seed, epsilon,
/// aggregation, resample, max_projections, max_cgls_iterations,
/// trace_stride, out_dir.
inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    cfg.solvers.clear();
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) continue;

        if (key == "name") {
            cfg.name = value;
        } else if (key == "problem") {
            cfg.problem.family = problem_family_from_name(value);
        } else if (key == "m") {
            cfg.problem.m = std::stoull(value);
        } else if (key == "n") {
            cfg.problem.n = std::stoull(value);
        } else if (key == "r") {
            cfg.problem.r = std::stoull(value);
            cfg.problem.n = 2 * cfg.problem.r + 1;
        } else if (key == "kappa") {
            cfg.problem.kappa = std::stod(value);
        } else if (key == "sigma_small") {
            cfg.problem.sigma_small = std::stod(value);
        } else if (key == "solvers") {
            std::string token;
            std::istringstream list(value);
            while (std::getline(list, token, ',')) {
                token.erase(0, token.find_first_not_of(" \t"));
                token.erase(token.find_last_not_of(" \t") + 1);
                if (!token.empty()) cfg.solvers.push_back(parse_solver_token(token));
            }
        } else if (key == "trials") {
            cfg.trials = std::stoull(value);
        } else if (key == "seed") {
            cfg.master_seed = std::stoull(value);
        } else if (key == "epsilon") {
            cfg.epsilon = std::stod(value);
        } else if (key == "aggregation") {
            cfg.aggregation = aggregation_from_name(value);
        } else if (key == "resample") {
            cfg.resample_instances = value == "true" || value == "1";
        } else if (key == "max_projections") {
            cfg.max_projections = std::stoull(value);
        } else if (key == "max_cgls_iterations") {
            cfg.max_cgls_iterations = std::stoull(value);
        } else if (key == "trace_stride") {
            cfg.trace_stride = std::stoull(value);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else {
            throw parameter_error("unknown config key: " + key);
        }
    }
    if (cfg.solvers.empty())
        throw parameter_error("config: at least one solver is required");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open", path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Analytic complexity curves (the fig2 preset)
// ---------------------------------------------------------------------------

/// CSV of the two complexity predictions on a y grid over (0.01, 0.99).
inline std::string complexity_curves_csv(std::size_t n, double eps, std::size_t points) {
    std::string out = "y,rk_flops,rk_iterations,cgls_flops,cgls_iterations\n";
    for (std::size_t i = 0; i < points; ++i) {
        const double y = 0.01 + (0.98 * static_cast<double>(i)) /
                                    static_cast<double>(points - 1);
        const ComplexityEstimate rk = rk_complexity(n, y, eps);
        const ComplexityEstimate cg = cgls_complexity(n, y, eps);
        out += format_double(y) + "," + format_double(rk.flops) + "," +
               format_double(rk.iterations) + "," + format_double(cg.flops) + "," +
               format_double(cg.iterations) + "\n";
    }
    return out;
}

} // namespace kaczmarz::bench
