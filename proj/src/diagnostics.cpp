#include "sicbo/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sicbo/kernels.hpp"
#include "sicbo/testbed.hpp"

namespace sicbo {

double ensemble_diameter(const double* positions, std::size_t n, std::size_t d) {
    if (n < 2) throw std::invalid_argument("ensemble_diameter needs at least 2 particles");
    return std::sqrt(kernels::max_pairwise_sqdist(positions, n, d));
}

double ensemble_diameter(const ParticleEnsemble& ensemble) {
    return ensemble_diameter(ensemble.data(), ensemble.n_particles, ensemble.dim);
}

Dispersion initial_dispersion(const double* positions, std::size_t n, std::size_t d) {
    Dispersion disp;
    disp.d_l.assign(d, 0.0);
    for (std::size_t l = 0; l < d; ++l) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += positions[i * d + l];
        mean /= static_cast<double>(n);
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = positions[i * d + l] - mean;
            best = std::max(best, t * t);
        }
        disp.d_l[l] = best;
    }
    return disp;
}

BoundReport pathwise_dispersion_bound(const ConsensusTrace& trace, const Dispersion& dispersion) {
    if (!trace.has_factors()) {
        throw std::invalid_argument(
            "pathwise_dispersion_bound: trace has no realized factors (per-particle noise run?)");
    }
    const std::size_t d = trace.dim;
    if (dispersion.d_l.size() != d) {
        throw std::invalid_argument("pathwise_dispersion_bound: dispersion dimension mismatch");
    }
    const std::size_t iters = trace.iterations();
    if (trace.factors.size() != iters * d) {
        throw std::invalid_argument("pathwise_dispersion_bound: factor series length mismatch");
    }

    BoundReport rep;
    rep.iterations_checked = static_cast<std::int64_t>(iters);
    std::vector<double> prod(d, 1.0);  // prod_{n<k} (1 - gamma - eta_l^n)^2
    for (std::size_t k = 0; k < iters; ++k) {
        double bound = 0.0;
        for (std::size_t l = 0; l < d; ++l) bound += dispersion.d_l[l] * prod[l];
        bound *= 2.0;
        const double msd = trace.mean_sq_dev[k];
        double violation = 0.0;
        if (bound > 0.0) {
            violation = (msd - bound) / bound;
        } else if (msd > 0.0) {
            violation = std::numeric_limits<double>::infinity();
        }
        if (violation > rep.max_rel_violation) {
            rep.max_rel_violation = violation;
            rep.worst_iteration = static_cast<std::int64_t>(k);
        }
        for (std::size_t l = 0; l < d; ++l) {
            const double f = trace.factors[k * d + l];
            prod[l] *= f * f;
        }
    }
    return rep;
}

namespace {

void check_fit_window(std::span<const double> series, std::size_t burn_in) {
    if (series.size() < burn_in + 10) {
        throw std::invalid_argument("rate fit: need at least 10 entries after burn-in");
    }
    for (std::size_t k = burn_in; k < series.size(); ++k) {
        if (!(series[k] > 0.0)) {
            throw std::invalid_argument(
                "rate fit: nonpositive entry in window (consensus reached machine precision; "
                "shorten the window)");
        }
    }
}

}  // namespace

double fit_geometric_rate(std::span<const double> series, std::size_t burn_in) {
    check_fit_window(series, burn_in);
    const std::size_t m = series.size() - burn_in;
    double kbar = 0.0, ybar = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        kbar += static_cast<double>(j);
        ybar += std::log(series[burn_in + j]);
    }
    kbar /= static_cast<double>(m);
    ybar /= static_cast<double>(m);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double dk = static_cast<double>(j) - kbar;
        num += dk * (std::log(series[burn_in + j]) - ybar);
        den += dk * dk;
    }
    return std::exp(num / den);
}

double mean_step_ratio(std::span<const double> series, std::size_t burn_in) {
    check_fit_window(series, burn_in);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = burn_in; k + 1 < series.size(); ++k) {
        sum += series[k + 1] / series[k];
        ++count;
    }
    return sum / static_cast<double>(count);
}

OptimalityGap optimality_gap(const RunReport& report, const BenchmarkProblem& problem,
                             SolErrConvention convention) {
    const ParticleEnsemble& e = report.final_state;
    const std::size_t n = e.n_particles;
    const std::size_t d = e.dim;
    if (problem.minimizer.size() != d) {
        throw std::invalid_argument("optimality_gap: minimizer dimension mismatch");
    }
    OptimalityGap gap;
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = e.data() + i * d;
        double s = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            const double t = xi[l] - problem.minimizer[l];
            s += t * t;
        }
        gap.sol_err += convention == SolErrConvention::Norm ? std::sqrt(s) : s;
        gap.fun_err += std::abs(problem.objective.eval_raw(e.particle(i)) - problem.min_value);
    }
    gap.sol_err /= static_cast<double>(n);
    gap.fun_err /= static_cast<double>(n);
    return gap;
}

}  // namespace sicbo
