#include <doctest.h>

#include <cmath>
#include <vector>

#include "sicbo/diagnostics.hpp"
#include "sicbo/rng.hpp"
#include "sicbo/solver.hpp"
#include "sicbo/testbed.hpp"

using namespace sicbo;

namespace {

double brute_force_diameter(const std::vector<double>& x, std::size_t n, std::size_t d) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < d; ++l) {
                const double t = x[i * d + l] - x[j * d + l];
                s += t * t;
            }
            best = std::max(best, s);
        }
    }
    return std::sqrt(best);
}

}  // namespace

TEST_CASE("ensemble diameter") {
    SUBCASE("all equal") {
        const std::vector<double> x = {1.0, 2.0, 1.0, 2.0, 1.0, 2.0};
        CHECK(ensemble_diameter(x.data(), 3, 2) == 0.0);
    }
    SUBCASE("3-4-5 triangle") {
        const std::vector<double> x = {0.0, 0.0, 3.0, 4.0};
        CHECK(ensemble_diameter(x.data(), 2, 2) == 5.0);
    }
    SUBCASE("three collinear points") {
        const std::vector<double> x = {0.0, 1.0, 2.0};
        CHECK(ensemble_diameter(x.data(), 3, 1) == 2.0);
    }
    SUBCASE("fewer than two particles is an error") {
        const std::vector<double> x = {0.0};
        CHECK_THROWS_AS(ensemble_diameter(x.data(), 1, 1), std::invalid_argument);
    }
    SUBCASE("permutation and translation invariant") {
        Rng rng(5);
        for (int t = 0; t < 20; ++t) {
            const std::size_t n = 3 + rng.below(6), d = 1 + rng.below(4);
            std::vector<double> x(n * d);
            for (double& v : x) v = rng.uniform(-4, 4);
            const double base = ensemble_diameter(x.data(), n, d);
            CHECK(base == doctest::Approx(brute_force_diameter(x, n, d)).epsilon(1e-14));
            // swap two particles
            auto perm = x;
            for (std::size_t l = 0; l < d; ++l) std::swap(perm[l], perm[d + l]);
            CHECK(ensemble_diameter(perm.data(), n, d) == base);
            // translate everything
            auto shifted = x;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t l = 0; l < d; ++l) shifted[i * d + l] += 0.5 * (l + 1);
            }
            CHECK(ensemble_diameter(shifted.data(), n, d) ==
                  doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("initial dispersion") {
    SUBCASE("all equal") {
        const std::vector<double> x = {2.0, 2.0, 2.0};
        const auto disp = initial_dispersion(x.data(), 3, 1);
        CHECK(disp.d_l == std::vector<double>{0.0});
    }
    SUBCASE("two points on a line") {
        const std::vector<double> x = {0.0, 2.0};
        const auto disp = initial_dispersion(x.data(), 2, 1);
        CHECK(disp.d_l[0] == 1.0);  // mean 1, worst squared deviation 1
    }
    SUBCASE("per-coordinate") {
        const std::vector<double> x = {0.0, 0.0, 2.0, 4.0};
        const auto disp = initial_dispersion(x.data(), 2, 2);
        CHECK(disp.d_l == std::vector<double>{1.0, 4.0});
    }
}

TEST_CASE("pathwise dispersion bound") {
    SUBCASE("identical particles give zero on both sides") {
        SicboConfig cfg;
        cfg.n_particles = 4;
        cfg.beta = 5.0;
        cfg.init_box.assign(2, Interval{0.7, 0.7});
        cfg.stop = StopRule::max_iter_only(20);
        cfg.max_iter = 20;
        SmoothedObjective obj;
        obj.raw = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
        obj.smoothed = [](std::span<const double> x, double) { return x[0] * x[0] + x[1] * x[1]; };
        const auto report = run(cfg, obj);
        const auto bound = pathwise_dispersion_bound(report.trace, report.initial_dispersion);
        CHECK(bound.max_rel_violation == 0.0);
    }

    SUBCASE("holds along recorded shared-noise runs") {
        SicboConfig cfg;
        cfg.n_particles = 30;
        cfg.beta = 100.0;
        cfg.gamma = 0.01;
        cfg.zeta = 0.1;
        cfg.init_box.assign(4, Interval{-5.0, 5.0});
        cfg.stop = StopRule::max_iter_only(400);
        cfg.max_iter = 400;
        cfg.seed = 77;
        SmoothedObjective obj;
        obj.raw = [](std::span<const double> x) {
            double s = 0.0;
            for (const double v : x) s += v * v;
            return s;
        };
        obj.smoothed = [](std::span<const double> x, double) {
            double s = 0.0;
            for (const double v : x) s += v * v;
            return s;
        };
        const auto report = run(cfg, obj);
        const auto bound = pathwise_dispersion_bound(report.trace, report.initial_dispersion);
        CHECK(bound.iterations_checked == 400);
        CHECK(bound.max_rel_violation <= 1e-10);
    }

    SUBCASE("single hand-checked step") {
        // Two particles at 0 and 2 in one dimension: D = 1, consensus c,
        // factor f. After one step the deviation identity is exact:
        //   msd(1) = (1/2) sum_i (x_i' - c')^2  vs  2 * D * f^2.
        SicboConfig cfg;
        cfg.n_particles = 2;
        cfg.beta = 1.0;
        cfg.gamma = 0.1;
        cfg.zeta = 0.2;
        cfg.seed = 9;
        cfg.init_box.assign(1, Interval{0.0, 2.0});
        cfg.stop = StopRule::max_iter_only(2);
        cfg.max_iter = 2;
        SmoothedObjective obj;
        obj.raw = [](std::span<const double> x) { return std::abs(x[0]); };
        obj.smoothed = [](std::span<const double> x, double) { return std::abs(x[0]); };
        const auto report = run(cfg, obj);
        const auto& tr = report.trace;
        REQUIRE(tr.iterations() == 2);
        const double D = report.initial_dispersion.d_l[0];
        // iteration 0: product empty
        CHECK(tr.mean_sq_dev[0] <= 2.0 * D * (1.0 + 1e-14));
        // iteration 1: one factor applied
        const double f = tr.factors[0];
        CHECK(tr.mean_sq_dev[1] <= 2.0 * D * f * f * (1.0 + 1e-12));
        const auto bound = pathwise_dispersion_bound(tr, report.initial_dispersion);
        CHECK(bound.max_rel_violation <= 1e-12);
    }

    SUBCASE("traces without factors are rejected") {
        ConsensusTrace trace;
        trace.mu = {1.0};
        trace.mean_sq_dev = {0.5};
        trace.dim = 1;
        Dispersion disp;
        disp.d_l = {1.0};
        CHECK_THROWS_AS(pathwise_dispersion_bound(trace, disp), std::invalid_argument);
    }
}

TEST_CASE("geometric rate fitting") {
    SUBCASE("exact geometric input") {
        std::vector<double> series(60);
        double v = 3.7;
        for (double& s : series) {
            s = v;
            v *= 0.99;
        }
        CHECK(std::abs(fit_geometric_rate(series, 0) - 0.99) < 1e-12);
        CHECK(std::abs(fit_geometric_rate(series, 10) - 0.99) < 1e-12);
        CHECK(std::abs(mean_step_ratio(series, 0) - 0.99) < 1e-12);
    }
    SUBCASE("constant series") {
        const std::vector<double> series(30, 2.0);
        CHECK(fit_geometric_rate(series, 0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("window validation") {
        const std::vector<double> tiny(5, 1.0);
        CHECK_THROWS_AS(fit_geometric_rate(tiny, 0), std::invalid_argument);
        std::vector<double> with_zero(30, 1.0);
        with_zero[20] = 0.0;
        CHECK_THROWS_AS(fit_geometric_rate(with_zero, 0), std::invalid_argument);
    }
}

TEST_CASE("optimality gap") {
    BenchmarkProblem prob;
    prob.dim = 1;
    prob.minimizer = {0.0};
    prob.min_value = 0.0;
    prob.objective.raw = [](std::span<const double> x) { return std::abs(x[0]); };
    prob.objective.smoothed = [](std::span<const double> x, double) { return std::abs(x[0]); };

    RunReport report;
    SUBCASE("all particles at the minimizer") {
        report.final_state.n_particles = 3;
        report.final_state.dim = 1;
        report.final_state.positions = {0.0, 0.0, 0.0};
        const auto gap = optimality_gap(report, prob);
        CHECK(gap.sol_err == 0.0);
        CHECK(gap.fun_err == 0.0);
    }
    SUBCASE("one particle at distance two") {
        report.final_state.n_particles = 1;
        report.final_state.dim = 1;
        report.final_state.positions = {2.0};
        const auto gap = optimality_gap(report, prob, SolErrConvention::Norm);
        CHECK(gap.sol_err == 2.0);
        CHECK(gap.fun_err == 2.0);
        const auto gap2 = optimality_gap(report, prob, SolErrConvention::SquaredNorm);
        CHECK(gap2.sol_err == 4.0);
    }
}
