// Benchmark and prediction harness for the Kaczmarz solver family.
//
// Subcommands:
//   run <config-file>       run an experiment described by a config file
//   preset <name>           run a bundled experiment (fig1 fig2 fig3 fig4 relax)
//   cond <instance-file>    print condition numbers of a stored system
//   predict                 closed-form projection counts and error bounds
//   gen <family>            generate an instance file
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kaczmarz/kaczmarz.hpp"

namespace {

using namespace kaczmarz;

void emit_experiment(const bench::ExperimentResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/" + result.name;
    bench::emit_csv(result, base + ".csv");
    bench::emit_json(result, base + ".json");
    bench::emit_meta(result, base + ".meta.txt");
    std::cout << "wrote " << base << ".csv, .json, .meta.txt\n";
    for (const auto& solver : result.solvers) {
        std::cout << "  " << solver.solver
                  << ": mean steps to eps = " << result.mean_steps_to_eps(solver.solver)
                  << ", mean flops to eps = " << result.mean_flops_to_eps(solver.solver)
                  << "\n";
    }
    if (result.failed_trials)
        std::cout << "  failed trials: " << result.failed_trials << "\n";
}

void run_config(bench::ExperimentConfig cfg) {
    const bench::ExperimentResult result = bench::run_experiment(cfg);
    emit_experiment(result, cfg.out_dir);
}

void run_fig2(std::size_t n, double eps, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/fig2";
    bench::write_file(base + ".csv", bench::complexity_curves_csv(n, eps, 200));
    std::string meta;
    meta += "name = fig2\n";
    meta += "n = " + std::to_string(n) + "\n";
    meta += "epsilon = " + bench::format_double(eps) + "\n";
    meta += "points = 200\n";
    meta += "crossover_y = " + bench::format_double(crossover_ratio(eps)) + "\n";
    bench::write_file(base + ".meta.txt", meta);
    std::cout << "wrote " << base << ".csv, .meta.txt\n";
    std::cout << "  complexity crossover at y = " << crossover_ratio(eps) << "\n";
}

void print_condition_report(const std::string& path) {
    const LinearSystem sys = bench::load_instance(path);
    const ConditionReport rep = condition_numbers(sys.a);
    std::cout << "m = " << sys.rows() << "\n"
              << "n = " << sys.cols() << "\n"
              << "k = " << bench::format_double(rep.k) << "\n"
              << "kappa = " << bench::format_double(rep.kappa) << "\n"
              << "sigma_min = " << bench::format_double(rep.sigma_min) << "\n"
              << "sigma_max = " << bench::format_double(rep.sigma_max) << "\n"
              << "frobenius = " << bench::format_double(rep.frobenius) << "\n"
              << "kappa_over_sqrt_n = "
              << bench::format_double(rep.kappa / std::sqrt(static_cast<double>(sys.cols())))
              << "\n";
}

void print_prediction(double kappa, double eps) {
    const IterationEstimate est = projections_to_accuracy(kappa, eps);
    const auto k = static_cast<std::uint64_t>(std::ceil(est.exact));
    std::cout << "kappa = " << bench::format_double(kappa) << "\n"
              << "eps = " << bench::format_double(eps) << "\n"
              << "projections_exact = " << bench::format_double(est.exact) << "\n"
              << "projections_approx = " << bench::format_double(est.approx) << "\n"
              << "upper_bound_at_k" << k << " = "
              << bench::format_double(expected_sq_error_upper_bound(kappa, k, 1.0)) << "\n"
              << "lower_bound_at_k" << k << " = "
              << bench::format_double(expected_sq_error_lower_bound(kappa, k, 1.0)) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized Kaczmarz benchmark harness"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Run an experiment from a config file");
    std::string config_path;
    std::string out_override;
    run_cmd->add_option("config", config_path, "Config file (key = value lines)")
        ->required();
    run_cmd->add_option("--out", out_override, "Output directory override");

    // preset
    auto* preset_cmd = app.add_subcommand("preset", "Run a bundled experiment preset");
    std::string preset_name;
    std::uint64_t preset_seed = 0;
    bool seed_set = false;
    std::uint64_t preset_trials = 0;
    std::string preset_out = ".";
    double preset_eps = 0.0;
    preset_cmd->add_option("name", preset_name, "fig1|fig2|fig3|fig4|relax")->required();
    preset_cmd->add_option("--seed", preset_seed, "Master seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    preset_cmd->add_option("--trials", preset_trials, "Trial count override");
    preset_cmd->add_option("--out", preset_out, "Output directory");
    preset_cmd->add_option("--eps", preset_eps, "Accuracy target override");

    // cond
    auto* cond_cmd = app.add_subcommand("cond", "Print condition numbers of an instance");
    std::string instance_path;
    cond_cmd->add_option("instance", instance_path, "Instance file")->required();

    // predict
    auto* predict_cmd =
        app.add_subcommand("predict", "Expected projections and error bounds");
    double predict_kappa = 0.0, predict_eps = 0.0;
    predict_cmd->add_option("--kappa", predict_kappa, "Scaled condition number")
        ->required();
    predict_cmd->add_option("--eps", predict_eps, "Accuracy target")->required();

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "Generate an instance file");
    std::string gen_family;
    std::size_t gen_m = 0, gen_n = 0, gen_r = 0;
    double gen_kappa = 0.0, gen_sigma = 1e-8;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "instance.txt";
    gen_cmd->add_option("family", gen_family, "gaussian|trig|tightness|clustered")
        ->required();
    gen_cmd->add_option("--m", gen_m, "Rows");
    gen_cmd->add_option("--n", gen_n, "Columns");
    gen_cmd->add_option("--r", gen_r, "Trig degree (n = 2r + 1)");
    gen_cmd->add_option("--kappa", gen_kappa, "Tightness kappa");
    gen_cmd->add_option("--sigma", gen_sigma, "Clustered small singular value");
    gen_cmd->add_option("--seed", gen_seed, "Seed");
    gen_cmd->add_option("--out", gen_out, "Output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*run_cmd) {
            bench::ExperimentConfig cfg = bench::load_config(config_path);
            if (!out_override.empty()) cfg.out_dir = out_override;
            run_config(cfg);
        } else if (*preset_cmd) {
            if (preset_name == "fig2") {
                run_fig2(100, preset_eps > 0.0 ? preset_eps : 1e-14, preset_out);
            } else {
                bench::ExperimentConfig cfg = bench::make_preset(preset_name);
                if (seed_set) cfg.master_seed = preset_seed;
                if (preset_trials) cfg.trials = preset_trials;
                if (preset_eps > 0.0) cfg.epsilon = preset_eps;
                cfg.out_dir = preset_out;
                run_config(cfg);
            }
        } else if (*cond_cmd) {
            print_condition_report(instance_path);
        } else if (*predict_cmd) {
            print_prediction(predict_kappa, predict_eps);
        } else if (*gen_cmd) {
            RngStream rng(gen_seed);
            if (gen_family == "gaussian") {
                bench::save_instance(gaussian_system(gen_m, gen_n, rng), gen_out);
            } else if (gen_family == "trig") {
                std::vector<double> nodes = uniform_sorted_nodes(gen_m, rng);
                Vector coeff(2 * gen_r + 1);
                for (auto& c : coeff)
                    c = Scalar(rng.standard_normal(), rng.standard_normal());
                bench::save_instance(trig_system(gen_r, nodes, coeff).system, gen_out);
            } else if (gen_family == "tightness") {
                bench::save_instance(tightness_system(gen_n, gen_m, gen_kappa).system,
                                     gen_out);
            } else if (gen_family == "clustered") {
                bench::save_instance(clustered_spectrum_system(gen_n, gen_sigma, rng),
                                     gen_out);
            } else {
                std::cerr << "unknown family: " << gen_family << "\n";
                return 2;
            }
            std::cout << "wrote " << gen_out << "\n";
        }
    } catch (const kaczmarz::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
