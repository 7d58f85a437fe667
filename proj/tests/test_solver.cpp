#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "sicbo/diagnostics.hpp"
#include "sicbo/rng.hpp"
#include "sicbo/smoothing.hpp"
#include "sicbo/solver.hpp"

using namespace sicbo;

namespace {

SmoothedObjective quadratic_objective() {
    SmoothedObjective obj;
    obj.raw = [](std::span<const double> x) {
        double s = 0.0;
        for (const double v : x) s += v * v;
        return s;
    };
    obj.smoothed = [obj](std::span<const double> x, double) {
        double s = 0.0;
        for (const double v : x) s += v * v;
        return s;
    };
    return obj;
}

ParticleEnsemble make_ensemble(std::vector<double> positions, std::size_t n, std::size_t d) {
    ParticleEnsemble e;
    e.n_particles = n;
    e.dim = d;
    e.positions = std::move(positions);
    return e;
}

SicboConfig base_config(std::size_t d) {
    SicboConfig cfg;
    cfg.n_particles = 8;
    cfg.beta = 10.0;
    cfg.gamma = 0.01;
    cfg.zeta = 0.1;
    cfg.schedule = MuSchedule::inverse_power(2.0, 1.0);
    cfg.stop = StopRule::step_norm_and_slope(1e-10, 1e-10);
    cfg.max_iter = 1000;
    cfg.seed = 5;
    cfg.init_box.assign(d, Interval{-3.0, 3.0});
    return cfg;
}

double ulp_at(double scale) { return std::nextafter(scale, 1e300) - scale; }

}  // namespace

TEST_CASE("consensus point of identical particles is that point, exactly") {
    const std::vector<double> pos = {1.25, -0.7, 1.25, -0.7, 1.25, -0.7};
    const auto e = make_ensemble(pos, 3, 2);
    const std::vector<double> vals = {0.3, 0.3, 0.3};
    const auto c = consensus_point(e, vals, 7.0);
    CHECK(c[0] == 1.25);
    CHECK(c[1] == -0.7);
}

TEST_CASE("two-particle consensus with beta = 1") {
    // weights (1, 1/2) after shifting; (0*1 + 1*0.5)/1.5
    const auto e = make_ensemble({0.0, 1.0}, 2, 1);
    const std::vector<double> vals = {0.0, std::log(2.0)};
    const auto c = consensus_point(e, vals, 1.0);
    CHECK(c[0] == 0.5 / 1.5);
}

TEST_CASE("huge beta selects the minimal particle exactly") {
    const auto e = make_ensemble({0.125, 0.7, -2.5}, 3, 1);
    const std::vector<double> vals = {1.0, 1.0 + 1e-15, 2.0};
    const auto c = consensus_point(e, vals, 1e20);
    CHECK(c[0] == 0.125);
}

TEST_CASE("consensus point stays in the particle hull") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(9);
        const std::size_t d = 1 + rng.below(5);
        std::vector<double> pos(n * d);
        for (double& p : pos) p = rng.uniform(-5, 5);
        std::vector<double> vals(n);
        for (double& v : vals) v = rng.uniform(0, 3);
        const auto e = make_ensemble(pos, n, d);
        const auto c = consensus_point(e, vals, std::exp(rng.uniform(0, 20)));
        for (std::size_t l = 0; l < d; ++l) {
            double lo = pos[l], hi = pos[l];
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, pos[i * d + l]);
                hi = std::max(hi, pos[i * d + l]);
            }
            CHECK(c[l] >= lo);
            CHECK(c[l] <= hi);
        }
    }
}

TEST_CASE("consensus point is exactly invariant under value shifts") {
    // Values and shifts on a coarse dyadic grid keep every addition exact,
    // so the shifted weights cancel the constant with no rounding at all.
    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.below(7);
        std::vector<double> pos(n * 2);
        for (double& p : pos) p = rng.uniform(-4, 4);
        std::vector<double> vals(n), shifted(n);
        const double c_shift = (static_cast<double>(rng.below(4096)) - 2048.0) / 64.0;
        for (std::size_t i = 0; i < n; ++i) {
            vals[i] = static_cast<double>(rng.below(4096)) / 64.0;
            shifted[i] = vals[i] + c_shift;
        }
        const auto e = make_ensemble(pos, n, 2);
        const auto c1 = consensus_point(e, vals, 3.0);
        const auto c2 = consensus_point(e, shifted, 3.0);
        CHECK(c1 == c2);
    }
}

TEST_CASE("non-finite objective values are rejected with the particle index") {
    const auto e = make_ensemble({0.0, 1.0, 2.0}, 3, 1);
    std::vector<double> vals = {0.0, std::nan(""), 1.0};
    CHECK_THROWS_AS(consensus_point(e, vals, 1.0), InvalidObjectiveError);
    try {
        consensus_point(e, vals, 1.0);
    } catch (const InvalidObjectiveError& err) {
        CHECK(err.particle_index == 1);
    }
}

TEST_CASE("draw_noise basics") {
    SUBCASE("zeta = 0 gives zeros") {
        Rng rng(1);
        const auto noise = draw_noise(rng, 5, 0.0);
        for (const double v : noise.values) CHECK(v == 0.0);
    }
    SUBCASE("same seed, same stream") {
        Rng a(99), b(99);
        const auto na = draw_noise(a, 4, 0.1);
        const auto nb = draw_noise(b, 4, 0.1);
        CHECK(na.values == nb.values);
    }
    SUBCASE("sampling statistics at zeta = 0.1") {
        Rng rng(2024);
        const std::size_t n = 100000;
        std::vector<double> all(n);
        rng.normals(all.data(), n);
        double mean = 0.0;
        for (const double z : all) mean += 0.1 * z;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const double z : all) var += (0.1 * z - mean) * (0.1 * z - mean);
        var /= static_cast<double>(n - 1);
        CHECK(std::abs(mean) <= 3.0 * 0.1 / std::sqrt(static_cast<double>(n)));
        CHECK(std::sqrt(var) == doctest::Approx(0.1).epsilon(0.02));
    }
}

TEST_CASE("check_consensus_condition") {
    const auto a = check_consensus_condition(0.01, 0.1);
    CHECK(a.contraction == doctest::Approx(0.9901).epsilon(1e-12));
    CHECK(a.satisfied);
    const auto b = check_consensus_condition(0.0, 0.0);
    CHECK(b.contraction == 1.0);
    CHECK_FALSE(b.satisfied);
    const auto c = check_consensus_condition(1.0, 0.0);
    CHECK(c.contraction == 0.0);
    CHECK(c.satisfied);
}

TEST_CASE("a fully collapsed ensemble is a fixed point of step") {
    auto cfg = base_config(3);
    cfg.n_particles = 5;
    cfg.beta = 1e20;
    std::vector<double> pos;
    for (int i = 0; i < 5; ++i) pos.insert(pos.end(), {0.3, -1.7, 2.2});
    const auto e = make_ensemble(pos, 5, 3);
    const auto obj = quadratic_objective();
    Rng rng(1);
    const auto next = step(e, cfg, obj, rng);
    CHECK(next.positions == e.positions);
    CHECK(next.iteration == e.iteration + 1);
}

TEST_CASE("gamma = 1, zeta = 0 collapses in one step") {
    auto cfg = base_config(2);
    cfg.gamma = 1.0;
    cfg.zeta = 0.0;
    cfg.n_particles = 6;
    const auto obj = quadratic_objective();
    Rng rng(3);
    std::vector<double> pos(12);
    for (double& p : pos) p = rng.uniform(-3, 3);
    const auto next = step(make_ensemble(pos, 6, 2), cfg, obj, rng);
    CHECK(ensemble_diameter(next) == 0.0);
}

TEST_CASE("pairwise differences contract by the shared factor") {
    // x_l' difference between any two particles equals the recorded factor
    // times the previous difference, to within a couple of ulp at the scale
    // of the quantities entering the update.
    auto cfg = base_config(3);
    cfg.n_particles = 8;
    cfg.beta = 50.0;
    const auto obj = quadratic_objective();
    Rng rng(31);
    std::vector<double> pos(8 * 3);
    for (double& p : pos) p = rng.uniform(-3, 3);
    ParticleEnsemble e = make_ensemble(pos, 8, 3);

    double worst_ratio = 0.0;
    for (int k = 0; k < 300; ++k) {
        ConsensusTrace rec;
        const double mu = cfg.schedule.at(e.iteration);
        std::vector<double> vals(e.n_particles);
        for (std::size_t i = 0; i < e.n_particles; ++i) {
            vals[i] = obj.eval_smoothed(e.particle(i), mu);
        }
        const auto c = consensus_point(e, vals, cfg.beta);
        const auto next = step(e, cfg, obj, rng, &rec);
        REQUIRE(rec.factors.size() == 3);
        for (std::size_t i = 0; i < e.n_particles; ++i) {
            for (std::size_t j = i + 1; j < e.n_particles; ++j) {
                for (std::size_t l = 0; l < 3; ++l) {
                    const double f = rec.factors[l];
                    const double ai = e.positions[i * 3 + l], aj = e.positions[j * 3 + l];
                    const double bi = next.positions[i * 3 + l], bj = next.positions[j * 3 + l];
                    const double lhs = bi - bj;
                    const double rhs = f * (ai - aj);
                    const double t = 1.0 - f;
                    const double scale = std::abs(ai) + std::abs(aj) +
                                         std::abs(t) * (std::abs(ai - c[l]) + std::abs(aj - c[l]));
                    const double tol = 2.0 * ulp_at(scale);
                    CHECK(std::abs(lhs - rhs) <= tol);
                    if (tol > 0.0) worst_ratio = std::max(worst_ratio, std::abs(lhs - rhs) / tol);
                }
            }
        }
        e = next;
    }
    MESSAGE("worst |lhs-rhs| / tolerance ratio: ", worst_ratio);
}

TEST_CASE("stop rules") {
    const auto obj = quadratic_objective();
    auto a = make_ensemble({0.0, 1.0}, 2, 1);
    auto b = a;
    b.iteration = 1;

    SUBCASE("identical consecutive ensembles satisfy the step-norm rule") {
        CHECK(should_stop(StopRule::step_norm(1e-10), a, b, obj.raw));
        CHECK(should_stop(StopRule::step_norm_and_slope(1e-10, 1e-10), a, b, obj.raw));
    }
    SUBCASE("a unit step does not") {
        auto moved = b;
        moved.positions[0] += 1.0;
        CHECK_FALSE(should_stop(StopRule::step_norm(1e-10), a, moved, obj.raw));
    }
    SUBCASE("max-iteration rule fires on the iteration counter") {
        CHECK_FALSE(should_stop(StopRule::max_iter_only(5), a, b, obj.raw));
        b.iteration = 5;
        CHECK(should_stop(StopRule::max_iter_only(5), a, b, obj.raw));
    }
    SUBCASE("function-change rule") {
        auto moved = b;
        moved.positions[1] = 1.1;  // f changes by 0.21
        CHECK_FALSE(should_stop(StopRule::fun_change(1e-3), a, moved, obj.raw));
        CHECK(should_stop(StopRule::fun_change(0.5), a, moved, obj.raw));
    }
}

TEST_CASE("run: degenerate initialization stops immediately") {
    auto cfg = base_config(2);
    cfg.n_particles = 2;
    cfg.init_box.assign(2, Interval{1.5, 1.5});  // zero-width box
    cfg.stop = StopRule::step_norm(1e-10);
    const auto report = run(cfg, quadratic_objective());
    CHECK(report.iterations == 1);
    CHECK_FALSE(report.iteration_capped);
    CHECK(report.final_diameter == 0.0);
    CHECK(report.trace.iterations() == 1);
}

TEST_CASE("run: one-step collapse at gamma = 1, zeta = 0") {
    auto cfg = base_config(3);
    cfg.gamma = 1.0;
    cfg.zeta = 0.0;
    cfg.stop = StopRule::step_norm(1e-12);
    const auto report = run(cfg, quadratic_objective());
    CHECK(report.final_diameter == 0.0);
    CHECK(report.iterations <= 2);
}

TEST_CASE("run is deterministic byte for byte") {
    auto cfg = base_config(3);
    cfg.max_iter = 120;
    cfg.stop = StopRule::max_iter_only(120);
    const auto r1 = run(cfg, quadratic_objective());
    const auto r2 = run(cfg, quadratic_objective());
    REQUIRE(r1.final_state.positions.size() == r2.final_state.positions.size());
    CHECK(std::memcmp(r1.final_state.positions.data(), r2.final_state.positions.data(),
                      r1.final_state.positions.size() * sizeof(double)) == 0);
    CHECK(r1.trace.diameter == r2.trace.diameter);
    CHECK(r1.trace.factors == r2.trace.factors);
    CHECK(r1.trace.best_value == r2.trace.best_value);
}

TEST_CASE("run flags the iteration cap") {
    auto cfg = base_config(2);
    cfg.max_iter = 5;
    cfg.stop = StopRule::step_norm(1e-300);
    const auto report = run(cfg, quadratic_objective());
    CHECK(report.iterations == 5);
    CHECK(report.iteration_capped);

    cfg.stop = StopRule::max_iter_only(5);
    const auto by_rule = run(cfg, quadratic_objective());
    CHECK(by_rule.iterations == 5);
    CHECK_FALSE(by_rule.iteration_capped);
}

TEST_CASE("config validation") {
    auto cfg = base_config(2);
    cfg.n_particles = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_config(2);
    cfg.beta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_config(2);
    cfg.zeta = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_config(2);
    cfg.init_box.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("seed-averaged squared diameter contracts at the predicted rate") {
    // 100 seeded runs on a smooth quadratic, gamma = 0.01, zeta = 0.1: the
    // mean per-step ratio of the averaged squared diameter over iterations
    // 10..200 sits within 0.01 of (1-gamma)^2 + zeta^2 = 0.9901.
    auto cfg = base_config(4);
    cfg.n_particles = 20;
    cfg.beta = 1.0;
    cfg.max_iter = 210;
    cfg.stop = StopRule::max_iter_only(210);
    const auto obj = quadratic_objective();

    std::vector<double> avg(210, 0.0);
    const int runs = 100;
    for (int r = 0; r < runs; ++r) {
        cfg.seed = trial_seed(4242, static_cast<std::uint64_t>(r));
        const auto report = run(cfg, obj);
        REQUIRE(report.trace.iterations() == 210);
        for (std::size_t k = 0; k < 210; ++k) {
            avg[k] += report.trace.diameter[k] * report.trace.diameter[k];
        }
    }
    for (double& v : avg) v /= runs;
    const double ratio = mean_step_ratio({avg.data(), 200}, 10);
    CHECK(ratio >= 0.9801);
    CHECK(ratio <= 1.0);
    CHECK(std::abs(ratio - 0.9901) <= 0.01);
    const double fitted = fit_geometric_rate({avg.data(), 200}, 10);
    CHECK(std::abs(fitted - 0.9901) <= 0.01);
}

TEST_CASE("per-particle noise mode leaves no shared factors and still collapses") {
    auto cfg = base_config(2);
    cfg.noise = NoiseMode::PerParticle;
    cfg.max_iter = 2000;
    cfg.stop = StopRule::step_norm(1e-8);
    const auto report = run(cfg, quadratic_objective());
    CHECK_FALSE(report.trace.has_factors());
    CHECK(report.final_diameter < 1e-6);

    const auto again = run(cfg, quadratic_objective());
    CHECK(again.final_state.positions == report.final_state.positions);
}

TEST_CASE("run propagates objective failures with the particle index") {
    auto cfg = base_config(2);
    SmoothedObjective bad;
    bad.raw = [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); };
    bad.smoothed = [](std::span<const double>, double) { return 0.0; };
    CHECK_THROWS_AS(run(cfg, bad), InvalidObjectiveError);
}
