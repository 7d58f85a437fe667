#include "sicbo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sicbo/diagnostics.hpp"
#include "sicbo/kernels.hpp"

namespace sicbo {

StopRule StopRule::max_iter_only(std::int64_t k) {
    StopRule r;
    r.kind = Kind::MaxIterOnly;
    r.max_k = k;
    return r;
}

StopRule StopRule::step_norm(double eps) {
    StopRule r;
    r.kind = Kind::StepNorm;
    r.eps1 = eps;
    return r;
}

StopRule StopRule::step_norm_and_slope(double eps1, double eps2) {
    StopRule r;
    r.kind = Kind::StepNormAndSlope;
    r.eps1 = eps1;
    r.eps2 = eps2;
    return r;
}

StopRule StopRule::fun_change(double eps) {
    StopRule r;
    r.kind = Kind::FunChange;
    r.eps1 = eps;
    return r;
}

void StopRule::validate() const {
    switch (kind) {
        case Kind::MaxIterOnly:
            if (max_k < 1) throw std::invalid_argument("stop rule: iteration bound must be >= 1");
            break;
        case Kind::StepNorm:
        case Kind::FunChange:
            if (!(eps1 > 0.0)) throw std::invalid_argument("stop rule: tolerance must be positive");
            break;
        case Kind::StepNormAndSlope:
            if (!(eps1 > 0.0 && eps2 > 0.0)) {
                throw std::invalid_argument("stop rule: tolerances must be positive");
            }
            break;
    }
}

void SicboConfig::validate() const {
    if (n_particles < 2) throw std::invalid_argument("config: need at least 2 particles");
    if (!(beta > 0.0)) throw std::invalid_argument("config: beta must be positive");
    if (!(zeta >= 0.0)) throw std::invalid_argument("config: zeta must be nonnegative");
    if (!std::isfinite(gamma)) throw std::invalid_argument("config: gamma must be finite");
    if (max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
    if (init_box.empty()) throw std::invalid_argument("config: init_box must be nonempty");
    for (const Interval& iv : init_box) {
        if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi)) {
            throw std::invalid_argument("config: init_box intervals must be finite with lo <= hi");
        }
    }
    if (!(schedule.mu0 > 0.0)) throw std::invalid_argument("config: schedule mu0 must be positive");
    stop.validate();
}

InvalidObjectiveError::InvalidObjectiveError(std::size_t particle, double v)
    : std::runtime_error("objective returned a non-finite value (particle " +
                         std::to_string(particle) + ")"),
      particle_index(particle),
      value(v) {}

ConsensusCondition check_consensus_condition(double gamma, double zeta) {
    ConsensusCondition c;
    c.contraction = (1.0 - gamma) * (1.0 - gamma) + zeta * zeta;
    c.satisfied = c.contraction < 1.0;
    return c;
}

std::vector<double> consensus_point(const double* positions, std::size_t n, std::size_t d,
                                    std::span<const double> smoothed_values, double beta) {
    if (n == 0 || smoothed_values.size() != n) {
        throw std::invalid_argument("consensus_point: need one smoothed value per particle");
    }
    double vmin = smoothed_values[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double v = smoothed_values[i];
        if (!std::isfinite(v)) throw InvalidObjectiveError(i, v);
        vmin = std::min(vmin, v);
    }

    // Shifted Gibbs weights: the minimum maps to weight exactly 1, so the
    // denominator is at least 1 even at beta ~ 1e20.
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        weights[i] = std::exp(-beta * (smoothed_values[i] - vmin));
    }

    std::vector<double> acc(d, 0.0);
    double wsum = 0.0;
    kernels::weighted_accumulate(positions, weights.data(), n, d, acc.data(), wsum);

    for (std::size_t l = 0; l < d; ++l) {
        double lo = positions[l], hi = positions[l];
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, positions[i * d + l]);
            hi = std::max(hi, positions[i * d + l]);
        }
        acc[l] = std::clamp(acc[l] / wsum, lo, hi);
    }
    return acc;
}

std::vector<double> consensus_point(const ParticleEnsemble& ensemble,
                                    std::span<const double> smoothed_values, double beta) {
    return consensus_point(ensemble.data(), ensemble.n_particles, ensemble.dim, smoothed_values,
                           beta);
}

StepNoise draw_noise(Rng& rng, std::size_t d, double zeta) {
    StepNoise noise;
    noise.values.assign(d, 0.0);
    if (zeta > 0.0) {
        rng.normals(noise.values.data(), d);
        for (double& v : noise.values) v *= zeta;
    }
    return noise;
}

namespace {

std::vector<double> evaluate_all(const ParticleEnsemble& e,
                                 const std::function<double(std::span<const double>)>& f) {
    std::vector<double> values(e.n_particles);
    for (std::size_t i = 0; i < e.n_particles; ++i) {
        const double v = f(e.particle(i));
        if (!std::isfinite(v)) throw InvalidObjectiveError(i, v);
        values[i] = v;
    }
    return values;
}

ParticleEnsemble do_step(const ParticleEnsemble& ensemble, const SicboConfig& config,
                         const SmoothedObjective& objective, Rng& rng, ConsensusTrace* record,
                         const std::vector<double>* raw_values) {
    const std::size_t n = ensemble.n_particles;
    const std::size_t d = ensemble.dim;
    const double mu = config.schedule.at(ensemble.iteration);

    std::vector<double> smoothed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = objective.eval_smoothed(ensemble.particle(i), mu);
        if (!std::isfinite(v)) throw InvalidObjectiveError(i, v);
        smoothed[i] = v;
    }
    const std::vector<double> consensus = consensus_point(ensemble, smoothed, config.beta);

    if (record) {
        std::vector<double> raw_local;
        if (!raw_values) {
            raw_local = evaluate_all(ensemble, objective.raw);
            raw_values = &raw_local;
        }
        record->mu.push_back(mu);
        record->diameter.push_back(
            std::sqrt(kernels::max_pairwise_sqdist(ensemble.data(), n, d)));
        record->mean_sq_dev.push_back(
            kernels::mean_sqdist_from(ensemble.data(), n, d, consensus.data()));
        double best = (*raw_values)[0], mean = 0.0;
        for (const double v : *raw_values) {
            best = std::min(best, v);
            mean += v;
        }
        record->best_value.push_back(best);
        record->mean_value.push_back(mean / static_cast<double>(n));
        record->dim = d;
    }

    ParticleEnsemble next = ensemble;
    if (config.noise == NoiseMode::Shared) {
        const StepNoise noise = draw_noise(rng, d, config.zeta);
        std::vector<double> t(d);
        for (std::size_t l = 0; l < d; ++l) t[l] = config.gamma + noise.values[l];
        kernels::update_toward(next.data(), n, d, consensus.data(), t.data());
        if (record) {
            for (std::size_t l = 0; l < d; ++l) {
                record->factors.push_back(1.0 - config.gamma - noise.values[l]);
            }
        }
    } else {
        // Per-particle factors, drawn particle-major before any update.
        std::vector<double> t(n * d, 0.0);
        if (config.zeta > 0.0) {
            for (std::size_t i = 0; i < n; ++i) rng.normals(t.data() + i * d, d);
        }
        for (double& v : t) v = config.gamma + v * config.zeta;
        kernels::update_toward_rowwise(next.data(), n, d, consensus.data(), t.data());
    }
    next.iteration = ensemble.iteration + 1;

    for (const double v : next.positions) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("particle positions became non-finite after update");
        }
    }
    return next;
}

bool should_stop_with_values(const StopRule& rule, const ParticleEnsemble& prev,
                             const ParticleEnsemble& next, const std::vector<double>& f_prev,
                             const std::vector<double>& f_next) {
    if (rule.kind == StopRule::Kind::MaxIterOnly) return next.iteration >= rule.max_k;

    const std::size_t n = prev.n_particles;
    const std::size_t d = prev.dim;
    double max_step = 0.0, max_slope = 0.0, max_fchange = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = prev.data() + i * d;
        const double* b = next.data() + i * d;
        double s = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            const double t = b[l] - a[l];
            s += t * t;
        }
        const double step_norm = std::sqrt(s);
        max_step = std::max(max_step, step_norm);
        if (rule.kind == StopRule::Kind::StepNormAndSlope ||
            rule.kind == StopRule::Kind::FunChange) {
            const double df = std::abs(f_next[i] - f_prev[i]);
            max_fchange = std::max(max_fchange, df);
            if (step_norm > 0.0) max_slope = std::max(max_slope, df / step_norm);
        }
    }
    switch (rule.kind) {
        case StopRule::Kind::StepNorm:
            return max_step <= rule.eps1;
        case StopRule::Kind::StepNormAndSlope:
            return max_step <= rule.eps1 && max_slope <= rule.eps2;
        case StopRule::Kind::FunChange:
            return max_fchange <= rule.eps1;
        case StopRule::Kind::MaxIterOnly:
            break;
    }
    return false;
}

}  // namespace

ParticleEnsemble step(const ParticleEnsemble& ensemble, const SicboConfig& config,
                      const SmoothedObjective& objective, Rng& rng, ConsensusTrace* record) {
    return do_step(ensemble, config, objective, rng, record, nullptr);
}

bool should_stop(const StopRule& rule, const ParticleEnsemble& prev, const ParticleEnsemble& next,
                 const std::function<double(std::span<const double>)>& raw_objective) {
    if (rule.kind == StopRule::Kind::MaxIterOnly) return next.iteration >= rule.max_k;
    std::vector<double> f_prev, f_next;
    if (rule.kind != StopRule::Kind::StepNorm) {
        f_prev = evaluate_all(prev, raw_objective);
        f_next = evaluate_all(next, raw_objective);
    }
    return should_stop_with_values(rule, prev, next, f_prev, f_next);
}

RunReport run(const SicboConfig& config, const SmoothedObjective& objective,
              const StepObserver& observer) {
    config.validate();
    const std::size_t n = static_cast<std::size_t>(config.n_particles);
    const std::size_t d = config.dim();

    Rng rng(config.seed);
    ParticleEnsemble ensemble;
    ensemble.n_particles = n;
    ensemble.dim = d;
    ensemble.iteration = 0;
    ensemble.positions.resize(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < d; ++l) {
            ensemble.positions[i * d + l] = rng.uniform(config.init_box[l].lo, config.init_box[l].hi);
        }
    }

    RunReport report;
    report.config = config;
    report.condition = check_consensus_condition(config.gamma, config.zeta);
    report.initial_dispersion = initial_dispersion(ensemble.data(), n, d);

    std::vector<double> raw_now = evaluate_all(ensemble, objective.raw);

    bool stopped = false;
    while (ensemble.iteration < config.max_iter) {
        ParticleEnsemble next = do_step(ensemble, config, objective, rng, &report.trace, &raw_now);
        // Reused by the next iteration's trace record and by the stop rules.
        std::vector<double> raw_next = evaluate_all(next, objective.raw);
        if (observer) observer(next);
        const bool stop_now =
            should_stop_with_values(config.stop, ensemble, next, raw_now, raw_next);
        ensemble = std::move(next);
        raw_now = std::move(raw_next);
        if (stop_now) {
            stopped = true;
            break;
        }
    }

    report.iterations = ensemble.iteration;
    report.iteration_capped = !stopped;

    // Consensus of the final state, at the final iteration's mu.
    {
        const double mu = config.schedule.at(ensemble.iteration);
        std::vector<double> smoothed(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = objective.eval_smoothed(ensemble.particle(i), mu);
            if (!std::isfinite(v)) throw InvalidObjectiveError(i, v);
            smoothed[i] = v;
        }
        report.final_consensus = consensus_point(ensemble, smoothed, config.beta);
    }
    report.final_diameter = std::sqrt(kernels::max_pairwise_sqdist(ensemble.data(), n, d));
    report.final_state = std::move(ensemble);
    return report;
}

}  // namespace sicbo
