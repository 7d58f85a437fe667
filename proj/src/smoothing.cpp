#include "sicbo/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace sicbo {

namespace {

void require_positive_mu(double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("smoothing parameter mu must be positive");
}

}  // namespace

void SmoothingParams::validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("q must lie in [0,1)");
    if (!(mu_bar > 0.0)) throw std::invalid_argument("mu_bar must be positive");
}

double SmoothingParams::gap_bound(double mu) const { return kappa * std::pow(mu, 1.0 - q); }

double phi1_abs(double s, double mu) {
    require_positive_mu(mu);
    const double a = std::abs(s);
    if (a > mu) return a;
    return (s * s) / (2.0 * mu) + 0.5 * mu;
}

double phi1_abs_deriv(double s, double mu) {
    require_positive_mu(mu);
    if (std::abs(s) > mu) return s > 0.0 ? 1.0 : -1.0;
    return s / mu;
}

double phi2_relu(double s, double mu) {
    require_positive_mu(mu);
    if (std::abs(s) >= 0.5 * mu) return s > 0.0 ? s : 0.0;
    return (s * s) / (2.0 * mu) + 0.5 * s + 0.125 * mu;
}

double abs_power(double s, double mu, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("exponent p must lie in (0,1]");
    const double base = phi1_abs(s, mu);
    if (p == 1.0) return base;
    return std::pow(base, p);
}

MuSchedule MuSchedule::inverse_power(double p, double mu0) {
    if (!(mu0 > 0.0)) throw std::invalid_argument("mu0 must be positive");
    return MuSchedule{Kind::InversePower, p, mu0};
}

MuSchedule MuSchedule::exponential(double r, double mu0) {
    if (!(mu0 > 0.0)) throw std::invalid_argument("mu0 must be positive");
    return MuSchedule{Kind::Exponential, r, mu0};
}

double MuSchedule::at(std::int64_t k) const {
    const double kk = static_cast<double>(k);
    double v = mu0;
    switch (kind) {
        case Kind::InversePower:
            v = mu0 / std::pow(1.0 + kk, exponent);
            break;
        case Kind::Exponential:
            v = mu0 * std::exp(-exponent * kk);
            break;
    }
    // Floored at the smallest normal double: the schedule stays positive in
    // floating point no matter how far the iteration runs.
    return std::max(v, std::numeric_limits<double>::min());
}

std::string MuSchedule::describe() const {
    char buf[96];
    if (kind == Kind::InversePower) {
        std::snprintf(buf, sizeof buf, "mu0/(1+k)^%g, mu0=%g", exponent, mu0);
    } else {
        std::snprintf(buf, sizeof buf, "mu0*exp(-%g*k), mu0=%g", exponent, mu0);
    }
    return buf;
}

ScheduleReport validate_schedule(const MuSchedule& schedule, const SmoothingParams& params,
                                 double gamma, double zeta, std::int64_t K, double plateau_tol) {
    params.validate();
    const double contraction = (1.0 - gamma) * (1.0 - gamma) + zeta * zeta;
    if (!(contraction < 1.0)) {
        throw std::invalid_argument("validate_schedule requires (1-gamma)^2 + zeta^2 < 1");
    }
    if (K < 1) throw std::invalid_argument("validate_schedule requires K >= 1");

    // Hard invariant: the sequence must be non-increasing. Increasing
    // schedules (negative exponents) are rejected outright.
    if (schedule.exponent < 0.0) {
        throw std::invalid_argument("invalid schedule: mu_k increases with k");
    }

    const double q = params.q;
    const double rate = 2.0 * gamma - gamma * gamma - zeta * zeta;  // > 0 given the precondition

    ScheduleReport rep;
    rep.terms = K;
    const std::int64_t cut = K - K / 4;  // start of the last quarter
    double s1_cut = 0.0, s2_cut = 0.0;
    double mu_k = schedule.at(0);
    bool diverged = false;
    for (std::int64_t k = 0; k < K; ++k) {
        const double mu_next = schedule.at(k + 1);
        if (mu_next > mu_k) {
            throw std::invalid_argument("invalid schedule: mu_k increases with k");
        }
        const double t1 = std::pow(mu_next, -q) * (mu_k - mu_next);
        const double t2 = std::exp(-rate * static_cast<double>(k)) * std::pow(mu_k, -1.0 - q);
        if (!std::isfinite(t1) || !std::isfinite(t2)) {
            rep.s1 = std::numeric_limits<double>::infinity();
            rep.s2 = std::numeric_limits<double>::infinity();
            diverged = true;
            break;
        }
        rep.s1 += t1;
        rep.s2 += t2;
        if (k + 1 == cut) {
            s1_cut = rep.s1;
            s2_cut = rep.s2;
        }
        mu_k = mu_next;
    }

    if (diverged) {
        rep.s1_tail_rel = rep.s2_tail_rel = 1.0;
        rep.admissible = false;
        rep.reason = "partial sums overflow: series diverges";
        return rep;
    }

    rep.s1_tail_rel = rep.s1 > 0.0 ? (rep.s1 - s1_cut) / rep.s1 : 0.0;
    rep.s2_tail_rel = rep.s2 > 0.0 ? (rep.s2 - s2_cut) / rep.s2 : 0.0;

    const bool decreases_to_zero = schedule.exponent > 0.0;
    if (!decreases_to_zero) {
        rep.admissible = false;
        rep.reason = "mu_k does not decrease to zero";
        return rep;
    }
    if (schedule.mu0 > params.mu_bar) {
        rep.admissible = false;
        rep.reason = "mu0 exceeds mu_bar";
        return rep;
    }
    const bool s1_plateau = rep.s1_tail_rel < plateau_tol;
    const bool s2_plateau = rep.s2_tail_rel < plateau_tol;
    if (s1_plateau && s2_plateau) {
        rep.admissible = true;
        rep.reason = "partial sums plateau";
    } else {
        rep.admissible = false;
        rep.reason = s2_plateau ? "S1 partial sums still growing" : "S2 partial sums still growing";
    }
    return rep;
}

}  // namespace sicbo
