#include "sicbo/testbed.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace sicbo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unchecked variant of the |.| smoothing for the hot evaluation path.
inline double sphi1(double s, double mu) {
    const double a = std::abs(s);
    if (a > mu) return a;
    return (s * s) / (2.0 * mu) + 0.5 * mu;
}

double eval_f(BenchmarkId id, std::span<const double> x, double mu) {
    // mu == 0 selects the raw |.|; the formulas below otherwise substitute
    // the smoothing in place of every |.|.
    const auto av = [mu](double s) { return mu > 0.0 ? sphi1(s, mu) : std::abs(s); };
    const std::size_t d = x.size();
    const double dd = static_cast<double>(d);
    switch (id) {
        case BenchmarkId::F1: {
            double s = 0.0;
            for (const double xl : x) s += av(xl) - 10.0 * std::cos(kTwoPi * xl) + 10.0;
            return s / dd;
        }
        case BenchmarkId::F2: {
            double sa = 0.0, sc = 0.0;
            for (const double xl : x) {
                sa += av(xl);
                sc += std::cos(kTwoPi * xl);
            }
            return -10.0 * std::exp(-0.2 * std::sqrt(sa / dd)) - std::exp(sc / dd) + 10.0 +
                   std::exp(1.0);
        }
        case BenchmarkId::F3: {
            double ssin = 0.0, ssq = 0.0, sroot = 0.0;
            for (const double xl : x) {
                const double s = std::sin(xl);
                ssin += s * s;
                ssq += xl * xl;
                const double r = std::sin(std::sqrt(av(xl)));
                sroot += r * r;
            }
            return (ssin - std::exp(-ssq)) * std::exp(-sroot) + 1.0;
        }
        case BenchmarkId::F4: {
            double s = 0.0, p = 1.0;
            for (std::size_t l = 0; l < d; ++l) {
                s += av(x[l]);
                p *= std::cos(x[l] / std::sqrt(static_cast<double>(l + 1)));
            }
            return s / 4000.0 - p + 1.0;
        }
        case BenchmarkId::F5: {
            double s = 0.0, p = 1.0;
            for (const double xl : x) {
                const double a = av(xl);
                s += a;
                p *= a;
            }
            return s + p;
        }
        case BenchmarkId::F6: {
            double s = 0.0;
            for (const double xl : x) s += av(xl * std::sin(10.0 * xl) - 0.1 * xl);
            return 10.0 * s;
        }
        case BenchmarkId::F7: {
            double p = 1.0;
            for (const double xl : x) p *= std::cos(xl) * std::exp(-av(xl));
            return 1.0 - p;
        }
        case BenchmarkId::F8: {
            double sa = 0.0, ssq = 0.0;
            for (const double xl : x) {
                sa += av(xl);
                ssq += xl * xl;
            }
            return 1.0 - std::cos(kTwoPi * std::sqrt(ssq)) + 0.1 * std::sqrt(sa);
        }
    }
    throw std::invalid_argument("unknown benchmark id");
}

// Declared smoothing metadata for make_benchmark; box half-width 3, mu_bar 1.
SmoothingParams benchmark_params(BenchmarkId id, int dim) {
    const double d = dim;
    SmoothingParams p;
    p.mu_bar = 1.0;
    switch (id) {
        case BenchmarkId::F1:
            p.kappa = 0.5;
            break;
        case BenchmarkId::F2:
            p.kappa = std::sqrt(2.0);
            p.q = 0.5;
            break;
        case BenchmarkId::F3:
            p.kappa = d * d / std::sqrt(2.0);
            p.q = 0.5;
            break;
        case BenchmarkId::F4:
            p.kappa = d / 8000.0;
            break;
        case BenchmarkId::F5:
            p.kappa = 0.5 * d * (1.0 + std::pow(3.5, d - 1));
            break;
        case BenchmarkId::F6:
            p.kappa = 5.0 * d;
            break;
        case BenchmarkId::F7:
            p.kappa = 0.5 * d;
            break;
        case BenchmarkId::F8:
            p.kappa = 0.1 * std::sqrt(0.5 * d);
            p.q = 0.5;
            break;
    }
    return p;
}

constexpr BenchmarkId kAllIds[] = {BenchmarkId::F1, BenchmarkId::F2, BenchmarkId::F3,
                                   BenchmarkId::F4, BenchmarkId::F5, BenchmarkId::F6,
                                   BenchmarkId::F7, BenchmarkId::F8};

}  // namespace

const char* benchmark_name(BenchmarkId id) {
    static const char* names[] = {"f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8"};
    return names[static_cast<int>(id)];
}

std::optional<BenchmarkId> benchmark_id_from(const std::string& name) {
    for (const BenchmarkId id : kAllIds) {
        if (name == benchmark_name(id)) return id;
    }
    return std::nullopt;
}

double eval_benchmark(BenchmarkId id, std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("benchmark input must be nonempty");
    return eval_f(id, x, 0.0);
}

double eval_benchmark_smoothed(BenchmarkId id, std::span<const double> x, double mu) {
    if (x.empty()) throw std::invalid_argument("benchmark input must be nonempty");
    return eval_f(id, x, mu > 0.0 ? mu : 0.0);
}

BenchmarkProblem make_benchmark(BenchmarkId id, int dim) {
    if (dim < 1) throw std::invalid_argument("benchmark dimension must be >= 1");
    BenchmarkProblem p;
    p.name = benchmark_name(id);
    p.dim = dim;
    p.minimizer.assign(dim, 0.0);
    p.min_value = 0.0;
    p.init_box.assign(dim, Interval{-3.0, 3.0});
    p.success_threshold = 1e-2;
    const std::size_t want = static_cast<std::size_t>(dim);
    p.objective.raw = [id, want](std::span<const double> x) {
        if (x.size() != want) throw std::invalid_argument("benchmark input dimension mismatch");
        return eval_f(id, x, 0.0);
    };
    p.objective.smoothed = [id, want](std::span<const double> x, double mu) {
        if (x.size() != want) throw std::invalid_argument("benchmark input dimension mismatch");
        return eval_f(id, x, mu);
    };
    p.objective.params = benchmark_params(id, dim);
    return p;
}

BenchmarkProblem example1_problem() {
    BenchmarkProblem p = make_benchmark(BenchmarkId::F1, 4);
    p.name = "example1";
    p.init_box.assign(4, Interval{-5.0, 5.0});
    return p;
}

double Example2::sum_abs(double x) const {
    const auto it = std::lower_bound(sorted_samples.begin(), sorted_samples.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - sorted_samples.begin());
    const double below = prefix[j];
    const double total = prefix[sorted_samples.size()];
    // sum_{s<=x}(x-s) + sum_{s>x}(s-x)
    return x * (2.0 * static_cast<double>(j) - static_cast<double>(n_samples)) - 2.0 * below +
           total;
}

double Example2::raw(double x) const {
    const double t = x + 0.5 * std::numbers::pi;
    return std::exp(std::sin(2.0 * t * t)) + 0.1 * sum_abs(x) / static_cast<double>(n_samples);
}

double Example2::smoothed(double x, double mu) const {
    if (!(mu > 0.0)) return raw(x);
    // phi1 deviates from |.| only inside |x - s| <= mu; correct just that window.
    double corr = 0.0;
    const auto lo = std::lower_bound(sorted_samples.begin(), sorted_samples.end(), x - mu);
    const auto hi = std::upper_bound(sorted_samples.begin(), sorted_samples.end(), x + mu);
    for (auto it = lo; it != hi; ++it) {
        const double s = x - *it;
        corr += (s * s) / (2.0 * mu) + 0.5 * mu - std::abs(s);
    }
    const double t = x + 0.5 * std::numbers::pi;
    return std::exp(std::sin(2.0 * t * t)) +
           0.1 * (sum_abs(x) + corr) / static_cast<double>(n_samples);
}

double Example2::g_term(double x, double sample) {
    const double t = x + 0.5 * std::numbers::pi;
    return std::exp(std::sin(2.0 * t * t)) + 0.1 * std::abs(x - sample);
}

double Example2::g_subgrad(double x, double sample) {
    const double t = x + 0.5 * std::numbers::pi;
    const double arg = 2.0 * t * t;
    const double smooth_part = std::exp(std::sin(arg)) * std::cos(arg) * 4.0 * t;
    const double diff = x - sample;
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    return smooth_part + 0.1 * sign;
}

Example2 example2_objective(int n_samples, std::uint64_t noise_seed, NormalConvention convention) {
    if (n_samples < 1) throw std::invalid_argument("example2 needs at least one sample");
    Example2 ex;
    ex.n_samples = n_samples;
    ex.sorted_samples.resize(static_cast<std::size_t>(n_samples));
    Rng rng(noise_seed);
    // N(0, 0.1) read as variance 0.1 by default (StdDev reads it as sigma).
    const double sigma = convention == NormalConvention::Variance ? std::sqrt(0.1) : 0.1;
    rng.normals(ex.sorted_samples.data(), ex.sorted_samples.size());
    for (double& s : ex.sorted_samples) s *= sigma;
    std::sort(ex.sorted_samples.begin(), ex.sorted_samples.end());
    ex.prefix.resize(ex.sorted_samples.size() + 1);
    ex.prefix[0] = 0.0;
    for (std::size_t j = 0; j < ex.sorted_samples.size(); ++j) {
        ex.prefix[j + 1] = ex.prefix[j] + ex.sorted_samples[j];
    }

    // The sampled terms shift the optimum per instance; locate it by dense
    // grid search on the raw objective.
    const double step = 1e-5;
    double best_x = -3.0, best_v = ex.raw(-3.0);
    const std::int64_t steps = static_cast<std::int64_t>(std::llround(6.0 / step));
    for (std::int64_t k = 1; k <= steps; ++k) {
        const double x = -3.0 + step * static_cast<double>(k);
        const double v = ex.raw(x);
        if (v < best_v) {
            best_v = v;
            best_x = x;
        }
    }

    BenchmarkProblem& p = ex.problem;
    p.name = "example2";
    p.dim = 1;
    p.minimizer = {best_x};
    p.min_value = best_v;
    p.init_box = {Interval{-3.0, 3.0}};
    p.success_threshold = 5e-3;
    // The closures share one immutable copy of the sample tables, so the
    // problem stays valid after the Example2 wrapper goes away.
    auto view = std::make_shared<Example2>();
    view->sorted_samples = ex.sorted_samples;
    view->prefix = ex.prefix;
    view->n_samples = ex.n_samples;
    p.objective.raw = [view](std::span<const double> x) {
        if (x.size() != 1) throw std::invalid_argument("example2 is one-dimensional");
        return view->raw(x[0]);
    };
    p.objective.smoothed = [view](std::span<const double> x, double mu) {
        if (x.size() != 1) throw std::invalid_argument("example2 is one-dimensional");
        return view->smoothed(x[0], mu);
    };
    p.objective.params.kappa = 0.05;  // (1/10) * mu/2 per averaged term
    p.objective.params.q = 0.0;
    p.objective.params.mu_bar = 1.0;
    return ex;
}

double ssd_step(double x, std::span<const std::size_t> batch, const Example2& problem,
                double step_len) {
    if (batch.empty()) throw std::invalid_argument("ssd_step: batch must be nonempty");
    double grad = 0.0;
    for (const std::size_t idx : batch) grad += Example2::g_subgrad(x, problem.sorted_samples[idx]);
    return x - step_len * grad / static_cast<double>(batch.size());
}

std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("cannot sample more indices than available");
    // Floyd's algorithm; sorted output so downstream sums are order-stable.
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t j = n - k; j < n; ++j) {
        const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
        if (std::find(out.begin(), out.end(), t) != out.end()) {
            out.push_back(j);
        } else {
            out.push_back(t);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double run_ssd(const Example2& problem, Rng& rng, const SsdConfig& config) {
    const Interval box = problem.problem.init_box[0];
    double x = rng.uniform(box.lo, box.hi);
    const std::size_t n = problem.sorted_samples.size();
    for (int k = 0; k < config.max_iter; ++k) {
        const auto batch =
            sample_without_replacement(rng, n, static_cast<std::size_t>(config.batch_size));
        x = ssd_step(x, batch, problem, config.step_len);
    }
    return x;
}

std::string config_digest(const SicboConfig& c) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "N=%d beta=%.17g gamma=%.17g zeta=%.17g sched=%d:%.17g:%.17g "
                  "stop=%d:%.17g:%.17g:%lld max=%lld noise=%d d=%zu",
                  c.n_particles, c.beta, c.gamma, c.zeta, static_cast<int>(c.schedule.kind),
                  c.schedule.exponent, c.schedule.mu0, static_cast<int>(c.stop.kind), c.stop.eps1,
                  c.stop.eps2, static_cast<long long>(c.stop.max_k),
                  static_cast<long long>(c.max_iter), static_cast<int>(c.noise), c.dim());
    // FNV-1a over the canonical field string plus the box.
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](const char* data, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 1099511628211ULL;
        }
    };
    mix(buf, std::char_traits<char>::length(buf));
    for (const Interval& iv : c.init_box) {
        mix(reinterpret_cast<const char*>(&iv.lo), sizeof(double));
        mix(reinterpret_cast<const char*>(&iv.hi), sizeof(double));
    }
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentSummary run_success_experiment(const BenchmarkProblem& problem,
                                         const SicboConfig& base_config, int n_trials,
                                         std::uint64_t base_seed, SolErrConvention convention,
                                         int workers, std::vector<TrialOutcome>* outcomes) {
    if (n_trials < 1) throw std::invalid_argument("need at least one trial");
    std::vector<TrialOutcome> results(static_cast<std::size_t>(n_trials));

    const auto run_trial = [&](int t) {
        SicboConfig cfg = base_config;
        cfg.seed = trial_seed(base_seed, static_cast<std::uint64_t>(t));
        const RunReport report = run(cfg, problem.objective);
        TrialOutcome out;
        out.seed = cfg.seed;
        out.iterations = report.iterations;
        const OptimalityGap gap = optimality_gap(report, problem, convention);
        out.sol_err = gap.sol_err;
        out.fun_err = gap.fun_err;
        double worst = 0.0;
        const ParticleEnsemble& e = report.final_state;
        for (std::size_t i = 0; i < e.n_particles; ++i) {
            double s = 0.0;
            for (std::size_t l = 0; l < e.dim; ++l) {
                const double dlt = e.positions[i * e.dim + l] - problem.minimizer[l];
                s += dlt * dlt;
            }
            worst = std::max(worst, s);
        }
        out.success = std::sqrt(worst) < problem.success_threshold;
        results[static_cast<std::size_t>(t)] = out;
    };

    if (workers <= 1 || n_trials == 1) {
        for (int t = 0; t < n_trials; ++t) run_trial(t);
    } else {
        std::atomic<int> next{0};
        const int pool = std::min(workers, n_trials);
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(pool));
        for (int w = 0; w < pool; ++w) {
            threads.emplace_back([&] {
                for (int t = next.fetch_add(1); t < n_trials; t = next.fetch_add(1)) run_trial(t);
            });
        }
        for (std::thread& th : threads) th.join();
    }

    ExperimentSummary summary;
    summary.n_trials = n_trials;
    summary.config_digest = config_digest(base_config);
    int successes = 0;
    for (const TrialOutcome& out : results) {
        successes += out.success ? 1 : 0;
        summary.mean_sol_err += out.sol_err;
        summary.mean_fun_err += out.fun_err;
    }
    summary.suc_rat = static_cast<double>(successes) / static_cast<double>(n_trials);
    summary.mean_sol_err /= static_cast<double>(n_trials);
    summary.mean_fun_err /= static_cast<double>(n_trials);
    if (outcomes) *outcomes = std::move(results);
    return summary;
}

}  // namespace sicbo
