#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sicbo/diagnostics.hpp"
#include "sicbo/smoothing.hpp"
#include "sicbo/solver.hpp"

// Benchmark problems, the stochastic subgradient baseline and the seeded
// success-rate experiment harness. Trials are embarrassingly parallel; each
// owns its generator and aggregation is a deterministic fold over trial
// index order.

namespace sicbo {

enum class BenchmarkId { F1, F2, F3, F4, F5, F6, F7, F8 };

const char* benchmark_name(BenchmarkId id);
std::optional<BenchmarkId> benchmark_id_from(const std::string& name);

// Raw test-function value; dimension is taken from x.
double eval_benchmark(BenchmarkId id, std::span<const double> x);
// Smoothed counterpart: every |.| is replaced by its quadratic-capped
// smoothing, outer compositions kept intact. mu <= 0 falls back to raw.
double eval_benchmark_smoothed(BenchmarkId id, std::span<const double> x, double mu);

struct BenchmarkProblem {
    std::string name;
    int dim = 0;
    SmoothedObjective objective;
    std::vector<double> minimizer;
    double min_value = 0.0;
    std::vector<Interval> init_box;
    double success_threshold = 1e-2;
};

// Test function on [-3,3]^dim with the origin minimizer, threshold 1e-2.
BenchmarkProblem make_benchmark(BenchmarkId id, int dim);

// The 4-dimensional consensus demo: f1 on [-5,5]^4.
BenchmarkProblem example1_problem();

// The randomized one-dimensional landscape: empirical average of
//   g(x, s_i) = exp(sin(2(x+pi/2)^2)) + |x - s_i|/10
// over n draws s_i. The sampled-term sums are evaluated through sorted
// prefix sums, so a single evaluation costs O(log n) plus the smoothing
// window.
enum class NormalConvention { Variance, StdDev };  // reading of N(0, 0.1)

struct Example2 {
    BenchmarkProblem problem;  // dim 1, box [-3,3], threshold 5e-3
    std::vector<double> sorted_samples;
    std::vector<double> prefix;  // prefix[j] = sum of the j smallest samples
    int n_samples = 0;

    double sum_abs(double x) const;
    double raw(double x) const;
    double smoothed(double x, double mu) const;
    // Per-sample term and its subgradient (0 at the kink).
    static double g_term(double x, double sample);
    static double g_subgrad(double x, double sample);
};

// Draws the samples from noise_seed, then locates the instance's global
// minimizer by dense grid search (step 1e-5 on [-3,3]).
Example2 example2_objective(int n_samples, std::uint64_t noise_seed,
                            NormalConvention convention = NormalConvention::Variance);

// One stochastic subgradient step on the Example2 landscape.
double ssd_step(double x, std::span<const std::size_t> batch, const Example2& problem,
                double step_len);

struct SsdConfig {
    double step_len = 0.01;
    int batch_size = 20;
    int max_iter = 2000;
};

// Uniform start on the problem box, fixed iteration budget; returns the
// final iterate.
double run_ssd(const Example2& problem, Rng& rng, const SsdConfig& config = {});

// k distinct indices from {0..n-1}, sorted ascending.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

struct TrialOutcome {
    bool success = false;
    double sol_err = 0.0;
    double fun_err = 0.0;
    std::int64_t iterations = 0;
    std::uint64_t seed = 0;
};

struct ExperimentSummary {
    double suc_rat = 0.0;
    double mean_sol_err = 0.0;
    double mean_fun_err = 0.0;
    int n_trials = 0;
    std::string config_digest;
};

// n_trials seeded runs (seed_t = splitmix64(base_seed + t)); a trial
// succeeds when max_i ||x_i - x*|| < problem.success_threshold at
// termination. Results are identical for any worker count.
ExperimentSummary run_success_experiment(const BenchmarkProblem& problem,
                                         const SicboConfig& base_config, int n_trials,
                                         std::uint64_t base_seed,
                                         SolErrConvention convention = SolErrConvention::Norm,
                                         int workers = 1,
                                         std::vector<TrialOutcome>* outcomes = nullptr);

std::string config_digest(const SicboConfig& config);

}  // namespace sicbo
