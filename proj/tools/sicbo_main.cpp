// Batch experiment driver: single runs, benchmark success-rate grids and
// gradient-free network training, with JSON/CSV result emission.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sicbo/diagnostics.hpp"
#include "sicbo/io.hpp"
#include "sicbo/kernels.hpp"
#include "sicbo/nn.hpp"
#include "sicbo/solver.hpp"
#include "sicbo/testbed.hpp"

namespace {

using namespace sicbo;

struct CommonOpts {
    std::string out_dir = ".";
    std::string kernels = "auto";
    int workers = 1;
};

void apply_kernel_choice(const std::string& choice) {
    if (choice == "auto") {
        kernels::reset_backend();
    } else if (choice == "scalar") {
        kernels::force_backend(kernels::Backend::Scalar);
    } else if (choice == "avx2") {
        kernels::force_backend(kernels::Backend::Avx2);
    } else {
        throw CLI::ValidationError("--kernels", "expected auto, scalar or avx2");
    }
}

std::filesystem::path ensure_out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p;
}

// Per-problem experiment defaults; explicit flags override.
struct RunOpts {
    std::string problem;
    int dim = 0;  // 0 = problem default
    int n_particles = 0;
    double beta = 0.0;
    double gamma = 0.01;
    double zeta = 0.1;
    double mu0 = 1.0;
    std::string schedule = "inverse_power";
    double mu_exponent = 2.0;
    std::string stop = "step_norm_and_slope";
    double eps1 = 1e-10;
    double eps2 = 1e-10;
    std::int64_t stop_k = 0;
    std::int64_t max_iter = 20000;
    std::uint64_t seed = 1;
    double box_lo = 0.0, box_hi = 0.0;  // both 0 = problem default
    std::string noise = "shared";
    int n_samples = 10000;
    std::uint64_t landscape_seed = 424242;
    std::string normal_convention = "variance";
    bool full_trace = false;
};

MuSchedule make_schedule(const RunOpts& o) {
    if (o.schedule == "inverse_power") return MuSchedule::inverse_power(o.mu_exponent, o.mu0);
    if (o.schedule == "exponential") return MuSchedule::exponential(o.mu_exponent, o.mu0);
    throw CLI::ValidationError("--schedule", "expected inverse_power or exponential");
}

StopRule make_stop(const RunOpts& o) {
    if (o.stop == "step_norm_and_slope") return StopRule::step_norm_and_slope(o.eps1, o.eps2);
    if (o.stop == "step_norm") return StopRule::step_norm(o.eps1);
    if (o.stop == "fun_change") return StopRule::fun_change(o.eps1);
    if (o.stop == "max_iter_only") {
        return StopRule::max_iter_only(o.stop_k > 0 ? o.stop_k : o.max_iter);
    }
    throw CLI::ValidationError("--stop", "unknown stop rule");
}

NoiseMode make_noise(const std::string& s) {
    if (s == "shared") return NoiseMode::Shared;
    if (s == "per-particle" || s == "per_particle") return NoiseMode::PerParticle;
    throw CLI::ValidationError("--noise", "expected shared or per-particle");
}

BenchmarkProblem resolve_problem(RunOpts& o) {
    if (o.problem == "example1") {
        if (o.n_particles == 0) o.n_particles = 100;
        if (o.beta == 0.0) o.beta = 100.0;
        BenchmarkProblem p = example1_problem();
        if (o.box_lo != 0.0 || o.box_hi != 0.0) {
            p.init_box.assign(p.init_box.size(), Interval{o.box_lo, o.box_hi});
        }
        return p;
    }
    if (o.problem == "example2") {
        if (o.n_particles == 0) o.n_particles = 100;
        if (o.beta == 0.0) o.beta = 50.0;
        const auto conv = o.normal_convention == "std" ? NormalConvention::StdDev
                                                       : NormalConvention::Variance;
        Example2 ex = example2_objective(o.n_samples, o.landscape_seed, conv);
        return ex.problem;
    }
    const auto id = benchmark_id_from(o.problem);
    if (!id) {
        throw CLI::ValidationError("--problem",
                                   "expected one of f1..f8, example1, example2 (got '" +
                                       o.problem + "')");
    }
    if (o.dim == 0) o.dim = 3;
    if (o.n_particles == 0) o.n_particles = 200;
    if (o.beta == 0.0) o.beta = 1e15;
    BenchmarkProblem p = make_benchmark(*id, o.dim);
    if (o.box_lo != 0.0 || o.box_hi != 0.0) {
        p.init_box.assign(p.init_box.size(), Interval{o.box_lo, o.box_hi});
    }
    return p;
}

SicboConfig config_for(const RunOpts& o, const BenchmarkProblem& p) {
    SicboConfig cfg;
    cfg.n_particles = o.n_particles;
    cfg.beta = o.beta;
    cfg.gamma = o.gamma;
    cfg.zeta = o.zeta;
    cfg.schedule = make_schedule(o);
    cfg.stop = make_stop(o);
    cfg.max_iter = o.max_iter;
    cfg.seed = o.seed;
    cfg.init_box = p.init_box;
    cfg.noise = make_noise(o.noise);
    return cfg;
}

int cmd_run(const CommonOpts& common, RunOpts opts) {
    apply_kernel_choice(common.kernels);
    BenchmarkProblem problem = resolve_problem(opts);
    SicboConfig cfg = config_for(opts, problem);

    const RunReport report = run(cfg, problem.objective);

    const auto out_dir = ensure_out_dir(common.out_dir);
    nlohmann::json j = io::report_to_json(report, opts.full_trace);
    j["problem"] = problem.name;
    io::write_file((out_dir / "run_report.json").string(), j.dump(2) + "\n");

    std::printf("%s: %s after %lld iterations, final diameter %.3e, consensus (",
                problem.name.c_str(), report.iteration_capped ? "iteration-capped" : "stopped",
                static_cast<long long>(report.iterations), report.final_diameter);
    for (std::size_t l = 0; l < report.final_consensus.size(); ++l) {
        std::printf("%s%.6g", l ? ", " : "", report.final_consensus[l]);
    }
    std::printf("), best f %.6e, consensus condition %s (%.6g)\n",
                report.trace.best_value.empty() ? 0.0 : report.trace.best_value.back(),
                report.condition.satisfied ? "satisfied" : "violated", report.condition.contraction);
    std::printf("report written to %s\n", (out_dir / "run_report.json").c_str());
    return 0;
}

struct BenchOpts {
    std::vector<std::string> functions{"f1", "f4"};
    std::vector<int> n_list{200};
    std::vector<double> beta_list{1e15};
    int dim = 3;
    int trials = 20;
    std::uint64_t seed = 1;
    bool full_grid = false;
    std::string noise = "per-particle";
    std::string sol_err = "squared";
    double gamma = 0.01;
    double zeta = 0.1;
    std::int64_t max_iter = 20000;
};

int cmd_bench(const CommonOpts& common, BenchOpts opts) {
    apply_kernel_choice(common.kernels);
    // (N, beta) cells per function; the full grid covers the particle-count
    // sweep at beta = 1e15 and the beta sweep at N = 200, 100 trials each.
    std::vector<std::pair<int, double>> cells;
    if (opts.full_grid) {
        opts.functions = {"f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8"};
        opts.trials = 100;
        for (const int n : {50, 100, 200, 400}) cells.emplace_back(n, 1e15);
        for (const double b : {1e8, 1e12, 1e16, 1e20}) cells.emplace_back(200, b);
    } else {
        for (const int n : opts.n_list) {
            for (const double b : opts.beta_list) cells.emplace_back(n, b);
        }
    }
    const auto convention = opts.sol_err == "norm" ? SolErrConvention::Norm
                                                   : SolErrConvention::SquaredNorm;

    std::vector<io::BenchRow> rows;
    for (const std::string& fname : opts.functions) {
        const auto id = benchmark_id_from(fname);
        if (!id) throw CLI::ValidationError("--functions", "unknown function " + fname);
        const BenchmarkProblem problem = make_benchmark(*id, opts.dim);
        for (const auto& [n, beta] : cells) {
            {
                SicboConfig cfg;
                cfg.n_particles = n;
                cfg.beta = beta;
                cfg.gamma = opts.gamma;
                cfg.zeta = opts.zeta;
                cfg.schedule = MuSchedule::inverse_power(2.0, 1.0);
                cfg.stop = StopRule::step_norm_and_slope(1e-10, 1e-10);
                cfg.max_iter = opts.max_iter;
                cfg.init_box = problem.init_box;
                cfg.noise = make_noise(opts.noise);
                io::BenchRow row;
                row.function = fname;
                row.n_particles = n;
                row.beta = beta;
                row.base_seed = opts.seed;
                row.summary = run_success_experiment(problem, cfg, opts.trials, opts.seed,
                                                     convention, common.workers);
                std::printf("%s N=%d beta=%.3g: suc-rat %.0f%%, sol-err %.3e, fun-err %.3e\n",
                            fname.c_str(), n, beta, 100.0 * row.summary.suc_rat,
                            row.summary.mean_sol_err, row.summary.mean_fun_err);
                rows.push_back(std::move(row));
            }
        }
    }

    const auto out_dir = ensure_out_dir(common.out_dir);
    io::write_file((out_dir / "bench_results.csv").string(), io::bench_csv(rows));
    std::printf("results written to %s\n", (out_dir / "bench_results.csv").c_str());
    return 0;
}

struct NnOpts {
    std::vector<int> widths{5, 10, 10, 10, 1};
    int n_particles = 200;
    double beta = 1e20;
    double gamma = 0.01;
    double zeta = 0.1;
    double mu0 = 1.0;
    double mu_rate = 0.1;
    double eps = 1e-6;
    std::int64_t max_iter = 2000;
    std::uint64_t seed = 1;
    std::uint64_t teacher_seed = 9;
    std::uint64_t sample_seed = 2024;
    int trace_every = 1;
    std::string noise = "shared";
    std::string export_dataset;
};

int cmd_nn(const CommonOpts& common, NnOpts opts) {
    apply_kernel_choice(common.kernels);
    nn::MlpShape shape{opts.widths};
    const int pcount = nn::param_count(shape);

    const nn::SyntheticDataset data =
        nn::generate_dataset(shape, opts.teacher_seed, opts.sample_seed);
    const nn::MlpBatchEvaluator eval(shape, data);

    SicboConfig cfg;
    cfg.n_particles = opts.n_particles;
    cfg.beta = opts.beta;
    cfg.gamma = opts.gamma;
    cfg.zeta = opts.zeta;
    cfg.schedule = MuSchedule::exponential(opts.mu_rate, opts.mu0);
    cfg.stop = StopRule::step_norm_and_slope(opts.eps, opts.eps);
    cfg.max_iter = opts.max_iter;
    cfg.seed = opts.seed;
    cfg.init_box.assign(static_cast<std::size_t>(pcount), Interval{-1.0, 1.0});
    cfg.noise = make_noise(opts.noise);

    // Per-iteration particle-averaged train/test errors with the exact ReLU.
    std::string trace_csv = "iteration,err_train,err_test\n";
    const auto observer = [&](const ParticleEnsemble& e) {
        if (opts.trace_every <= 0 ||
            (e.iteration % opts.trace_every) != 0) {
            return;
        }
        double tr = 0.0, te = 0.0;
        for (std::size_t i = 0; i < e.n_particles; ++i) {
            tr += eval.mse(e.particle(i), nn::Slice::Train, 0.0);
            te += eval.mse(e.particle(i), nn::Slice::Test, 0.0);
        }
        tr /= static_cast<double>(e.n_particles);
        te /= static_cast<double>(e.n_particles);
        trace_csv += std::to_string(e.iteration);
        trace_csv += ',';
        trace_csv += io::format_double(tr);
        trace_csv += ',';
        trace_csv += io::format_double(te);
        trace_csv += '\n';
    };

    const nn::TrainResult result = nn::train_with_sicbo(shape, data, cfg, observer);

    const auto out_dir = ensure_out_dir(common.out_dir);
    io::write_file((out_dir / "nn_trace.csv").string(), trace_csv);
    if (!opts.export_dataset.empty()) {
        nn::write_dataset_csv((out_dir / opts.export_dataset).string(), data);
    }

    nlohmann::json j;
    j["schema_version"] = io::kReportSchemaVersion;
    j["err_train"] = result.err_train;
    if (result.err_test) j["err_test"] = *result.err_test;
    j["iterations"] = result.report.iterations;
    j["iteration_capped"] = result.report.iteration_capped;
    j["param_count"] = pcount;
    j["teacher_seed"] = opts.teacher_seed;
    j["sample_seed"] = opts.sample_seed;
    j["config"] = io::config_to_json(result.report.config);
    io::write_file((out_dir / "nn_summary.json").string(), j.dump(2) + "\n");

    std::printf("nn: %s after %lld iterations, err_train %.3e, err_test %s\n",
                result.report.iteration_capped ? "iteration-capped" : "stopped",
                static_cast<long long>(result.report.iterations), result.err_train,
                result.err_test ? io::format_double(*result.err_test).c_str() : "absent");
    std::printf("trace written to %s\n", (out_dir / "nn_trace.csv").c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SICBO derivative-free global optimization toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config");

    CommonOpts common;
    app.add_option("--out", common.out_dir, "output directory")->capture_default_str();
    app.add_option("--workers", common.workers, "worker threads for trial execution")
        ->capture_default_str();
    app.add_option("--kernels", common.kernels, "kernel backend: auto|scalar|avx2")
        ->capture_default_str();

    RunOpts run_opts;
    CLI::App* runc = app.add_subcommand("run", "single seeded SICBO run, JSON report");
    runc->add_option("--problem", run_opts.problem, "f1..f8 | example1 | example2")->required();
    runc->add_option("--dim", run_opts.dim, "problem dimension (f1..f8)");
    runc->add_option("--n", run_opts.n_particles, "number of particles");
    runc->add_option("--beta", run_opts.beta, "exponential weight");
    runc->add_option("--gamma", run_opts.gamma, "drift rate")->capture_default_str();
    runc->add_option("--zeta", run_opts.zeta, "noise scale")->capture_default_str();
    runc->add_option("--schedule", run_opts.schedule, "inverse_power|exponential")
        ->capture_default_str();
    runc->add_option("--mu-exponent", run_opts.mu_exponent, "schedule exponent p or rate r")
        ->capture_default_str();
    runc->add_option("--mu0", run_opts.mu0, "initial smoothing parameter")->capture_default_str();
    runc->add_option("--stop", run_opts.stop,
                     "max_iter_only|step_norm|step_norm_and_slope|fun_change")
        ->capture_default_str();
    runc->add_option("--eps1", run_opts.eps1, "first stop tolerance")->capture_default_str();
    runc->add_option("--eps2", run_opts.eps2, "second stop tolerance")->capture_default_str();
    runc->add_option("--stop-k", run_opts.stop_k, "iteration bound for max_iter_only");
    runc->add_option("--max-iter", run_opts.max_iter, "iteration cap")->capture_default_str();
    runc->add_option("--seed", run_opts.seed, "run seed")->capture_default_str();
    runc->add_option("--box-lo", run_opts.box_lo, "init box lower bound (all coordinates)");
    runc->add_option("--box-hi", run_opts.box_hi, "init box upper bound (all coordinates)");
    runc->add_option("--noise", run_opts.noise, "shared|per-particle")->capture_default_str();
    runc->add_option("--samples", run_opts.n_samples, "example2 sample count")
        ->capture_default_str();
    runc->add_option("--landscape-seed", run_opts.landscape_seed,
                     "example2 sample draw seed (fixes the landscape instance)")
        ->capture_default_str();
    runc->add_option("--normal-convention", run_opts.normal_convention,
                     "example2 N(0,0.1) reading: variance|std")
        ->capture_default_str();
    runc->add_flag("--full-trace", run_opts.full_trace,
                   "include realized factors in the JSON report");

    BenchOpts bench_opts;
    CLI::App* benchc = app.add_subcommand("bench", "success-rate grid, CSV output");
    benchc->add_option("--functions", bench_opts.functions, "benchmark functions")
        ->delimiter(',')
        ->capture_default_str();
    benchc->add_option("--n-list", bench_opts.n_list, "particle counts")
        ->delimiter(',')
        ->capture_default_str();
    benchc->add_option("--beta-list", bench_opts.beta_list, "beta values")
        ->delimiter(',')
        ->capture_default_str();
    benchc->add_option("--dim", bench_opts.dim, "problem dimension")->capture_default_str();
    benchc->add_option("--trials", bench_opts.trials, "trials per grid cell")
        ->capture_default_str();
    benchc->add_option("--seed", bench_opts.seed, "base seed")->capture_default_str();
    benchc->add_flag("--full-grid", bench_opts.full_grid,
                     "run the full 8-function, 4-setting grid at 100 trials");
    benchc->add_option("--noise", bench_opts.noise, "shared|per-particle")->capture_default_str();
    benchc->add_option("--sol-err-convention", bench_opts.sol_err, "norm|squared")
        ->capture_default_str();
    benchc->add_option("--gamma", bench_opts.gamma, "drift rate")->capture_default_str();
    benchc->add_option("--zeta", bench_opts.zeta, "noise scale")->capture_default_str();
    benchc->add_option("--max-iter", bench_opts.max_iter, "iteration cap")->capture_default_str();

    NnOpts nn_opts;
    CLI::App* nnc = app.add_subcommand("nn", "train the ReLU network, CSV trace + JSON summary");
    nnc->add_option("--widths", nn_opts.widths, "layer widths")->delimiter(',')
        ->capture_default_str();
    nnc->add_option("--n", nn_opts.n_particles, "number of particles")->capture_default_str();
    nnc->add_option("--beta", nn_opts.beta, "exponential weight")->capture_default_str();
    nnc->add_option("--gamma", nn_opts.gamma, "drift rate")->capture_default_str();
    nnc->add_option("--zeta", nn_opts.zeta, "noise scale")->capture_default_str();
    nnc->add_option("--mu0", nn_opts.mu0, "initial smoothing parameter")->capture_default_str();
    nnc->add_option("--mu-rate", nn_opts.mu_rate, "exponential schedule rate")
        ->capture_default_str();
    nnc->add_option("--eps", nn_opts.eps, "stop tolerance")->capture_default_str();
    nnc->add_option("--max-iter", nn_opts.max_iter, "iteration cap")->capture_default_str();
    nnc->add_option("--seed", nn_opts.seed, "solver seed")->capture_default_str();
    nnc->add_option("--teacher-seed", nn_opts.teacher_seed, "teacher parameter seed")
        ->capture_default_str();
    nnc->add_option("--sample-seed", nn_opts.sample_seed, "input/noise sample seed")
        ->capture_default_str();
    nnc->add_option("--trace-every", nn_opts.trace_every, "error trace stride (0 disables)")
        ->capture_default_str();
    nnc->add_option("--noise", nn_opts.noise, "shared|per-particle")->capture_default_str();
    nnc->add_option("--export-dataset", nn_opts.export_dataset,
                    "also write the dataset CSV under this name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (runc->parsed()) return cmd_run(common, run_opts);
        if (benchc->parsed()) return cmd_bench(common, bench_opts);
        if (nnc->parsed()) return cmd_nn(common, nn_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
