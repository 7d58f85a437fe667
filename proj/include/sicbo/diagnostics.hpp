#pragma once

#include <cstddef>
#include <span>

#include "sicbo/solver.hpp"
#include "sicbo/trace.hpp"

// Empirical checks of the solver's contraction behavior: ensemble diameters,
// the per-path dispersion bound, geometric-rate fitting and optimality gaps.
// Pure functions over immutable traces; safe for concurrent use.

namespace sicbo {

struct BenchmarkProblem;  // testbed.hpp

// Max pairwise l2 distance; exact O(n^2 d). Throws std::invalid_argument for
// n < 2.
double ensemble_diameter(const double* positions, std::size_t n, std::size_t d);
double ensemble_diameter(const ParticleEnsemble& ensemble);

// Per-coordinate max squared deviation from the ensemble's arithmetic mean.
Dispersion initial_dispersion(const double* positions, std::size_t n, std::size_t d);

struct BoundReport {
    double max_rel_violation = 0.0;  // max over k of (msd_k - bound_k)/bound_k, clipped at 0
    std::int64_t worst_iteration = -1;
    std::int64_t iterations_checked = 0;
};

// Per-path form of the dispersion bound: for every recorded iteration k,
//   mean_sq_dev(k) <= 2 * sum_l D_l * prod_{n<k} (1 - gamma - eta_l^n)^2,
// evaluated with the recorded factors. Requires a shared-noise trace;
// throws std::invalid_argument when factors are missing.
BoundReport pathwise_dispersion_bound(const ConsensusTrace& trace, const Dispersion& dispersion);

// Least-squares slope of log(series) over [burn_in, end), exponentiated to a
// per-step ratio. Throws std::invalid_argument if fewer than 10 entries
// remain after burn_in or any entry in the window is not positive.
double fit_geometric_rate(std::span<const double> series, std::size_t burn_in);

// Mean of consecutive ratios series[k+1]/series[k] over [burn_in, end).
double mean_step_ratio(std::span<const double> series, std::size_t burn_in);

enum class SolErrConvention {
    Norm,         // (1/N) sum_i ||x_i - x*||
    SquaredNorm,  // (1/N) sum_i ||x_i - x*||^2
};

struct OptimalityGap {
    double sol_err = 0.0;
    double fun_err = 0.0;  // (1/N) sum_i |f(x_i) - f(x*)|
};

OptimalityGap optimality_gap(const RunReport& report, const BenchmarkProblem& problem,
                             SolErrConvention convention = SolErrConvention::Norm);

}  // namespace sicbo
