#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

// Smoothing approximations for nonsmooth building blocks, the mu-schedule
// driving them to zero along the iteration, and a numeric admissibility
// check for the schedule's summability requirements.
//
// All functions here are pure; safe to call concurrently.

namespace sicbo {

// Declared metadata of a smoothed objective: |f~(x,mu) - f(x)| <= kappa*mu^(1-q)
// on bounded sets, Hessian bound nu*mu^(-q-1), schedule ceiling mu_bar.
// The constants are supplied by whoever builds the objective, not estimated.
struct SmoothingParams {
    double kappa = 1.0;
    double nu = 1.0;
    double q = 0.0;  // in [0,1)
    double mu_bar = 1.0;

    void validate() const;  // throws std::invalid_argument on violation
    double gap_bound(double mu) const;  // kappa * mu^(1-q)
};

// Piecewise smoothing of |s|: |s| outside the cap, quadratic inside.
// result - |s| lies in [0, mu/2]; even in s; exact for |s| > mu.
double phi1_abs(double s, double mu);

// d/ds phi1_abs: sign(s) outside the cap, s/mu inside.
double phi1_abs_deriv(double s, double mu);

// Piecewise smoothing of max{0,s}: exact for |s| >= mu/2, quadratic inside.
// result - max{0,s} lies in [0, mu/8].
double phi2_relu(double s, double mu);

// phi1_abs(s,mu)^p, a smoothing of |s|^p for p in (0,1] with exponent q = 1-p.
double abs_power(double s, double mu, double p);

struct MuSchedule {
    enum class Kind { InversePower, Exponential };

    Kind kind = Kind::InversePower;
    double exponent = 2.0;  // p for InversePower, r for Exponential
    double mu0 = 1.0;

    // Admissible schedules need exponent > 0; zero/negative exponents are
    // representable (constant or increasing sequences) so validate_schedule
    // has something to render a verdict on.
    static MuSchedule inverse_power(double p, double mu0 = 1.0);
    static MuSchedule exponential(double r, double mu0 = 1.0);

    double at(std::int64_t k) const;
    std::string describe() const;
};

inline double mu_at(const MuSchedule& s, std::int64_t k) { return s.at(k); }

struct SmoothedObjective {
    std::function<double(std::span<const double>)> raw;
    std::function<double(std::span<const double>, double)> smoothed;
    SmoothingParams params;

    double eval_raw(std::span<const double> x) const { return raw(x); }
    // mu <= 0 falls back to the raw objective (the zero-smoothing limit).
    double eval_smoothed(std::span<const double> x, double mu) const {
        return mu > 0.0 ? smoothed(x, mu) : raw(x);
    }
};

struct ScheduleReport {
    double s1 = 0.0;  // partial sum of mu_{k+1}^(-q) * (mu_k - mu_{k+1})
    double s2 = 0.0;  // partial sum of exp(-(2g-g^2-z^2)k) * mu_k^(-1-q)
    double s1_tail_rel = 0.0;  // last-quarter increment relative to the total
    double s2_tail_rel = 0.0;
    std::int64_t terms = 0;
    bool admissible = false;
    std::string reason;
};

// Evaluates the schedule's partial sums up to K terms and renders a
// boundedness verdict: admissible when the sequence decreases to zero,
// mu0 <= params.mu_bar, and both partial sums plateau (last-quarter
// increment below plateau_tol relative).
// Preconditions: (1-gamma)^2 + zeta^2 < 1, K >= 1.
// Throws std::invalid_argument for schedules that are not non-increasing.
ScheduleReport validate_schedule(const MuSchedule& schedule, const SmoothingParams& params,
                                 double gamma, double zeta, std::int64_t K,
                                 double plateau_tol = 1e-6);

}  // namespace sicbo
