#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sicbo/rng.hpp"
#include "sicbo/smoothing.hpp"
#include "sicbo/trace.hpp"

// The SICBO iteration: Gibbs-weighted consensus point, Gaussian step noise,
// multiplicative contraction of every particle toward the consensus, and the
// stopping rules.
//
// Concurrency: a run owns its ensemble and generator and is confined to one
// logical thread; distinct runs share nothing. Reports are immutable once
// returned.

namespace sicbo {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct StopRule {
    enum class Kind { MaxIterOnly, StepNorm, StepNormAndSlope, FunChange };

    Kind kind = Kind::StepNormAndSlope;
    double eps1 = 1e-10;
    double eps2 = 1e-10;
    std::int64_t max_k = 0;  // MaxIterOnly bound

    static StopRule max_iter_only(std::int64_t k);
    static StopRule step_norm(double eps);
    static StopRule step_norm_and_slope(double eps1, double eps2);
    static StopRule fun_change(double eps);

    void validate() const;
};

// How the Gaussian perturbation attaches to particles.
//  Shared:      one draw per (iteration, coordinate), applied to every
//               particle; the pairwise-difference recursion and the
//               dispersion bound hold path-by-path.
//  PerParticle: independent draws per (particle, coordinate); stronger
//               exploration; the benchmark harness gathers its statistics
//               in this mode.
enum class NoiseMode { Shared, PerParticle };

struct SicboConfig {
    int n_particles = 100;          // N >= 2
    double beta = 1e15;             // > 0
    double gamma = 0.01;
    double zeta = 0.1;              // >= 0
    MuSchedule schedule = MuSchedule::inverse_power(2.0, 1.0);
    StopRule stop;
    std::int64_t max_iter = 20000;
    std::uint64_t seed = 1;
    std::vector<Interval> init_box;  // one interval per dimension
    NoiseMode noise = NoiseMode::Shared;

    std::size_t dim() const { return init_box.size(); }
    void validate() const;  // throws std::invalid_argument
};

struct ParticleEnsemble {
    std::size_t n_particles = 0;
    std::size_t dim = 0;
    std::vector<double> positions;  // row-major n x d
    std::int64_t iteration = 0;

    std::span<const double> particle(std::size_t i) const {
        return {positions.data() + i * dim, dim};
    }
    double* data() { return positions.data(); }
    const double* data() const { return positions.data(); }
};

// Shared per-iteration noise: values[l] multiplies every particle's l-th
// coordinate difference from the consensus point.
struct StepNoise {
    std::vector<double> values;
};

struct ConsensusCondition {
    bool satisfied = false;
    double contraction = 0.0;  // (1-gamma)^2 + zeta^2
};

// Thrown when the objective returns a non-finite value.
class InvalidObjectiveError : public std::runtime_error {
public:
    InvalidObjectiveError(std::size_t particle, double value);
    std::size_t particle_index;
    double value;
};

// Gibbs-weighted average of particle positions with weights exp(-beta*f~_i),
// computed with the minimum value shifted out of the exponent so the largest
// weight is exactly 1. Each output coordinate is clamped to the particle
// hull, making the all-equal ensemble an exact fixed point.
// Throws InvalidObjectiveError if any value is non-finite.
std::vector<double> consensus_point(const ParticleEnsemble& ensemble,
                                    std::span<const double> smoothed_values, double beta);
std::vector<double> consensus_point(const double* positions, std::size_t n, std::size_t d,
                                    std::span<const double> smoothed_values, double beta);

// d independent N(0, zeta^2) samples; zeta == 0 yields zeros without
// consuming randomness.
StepNoise draw_noise(Rng& rng, std::size_t d, double zeta);

ConsensusCondition check_consensus_condition(double gamma, double zeta);

// One SICBO iteration. Evaluates the smoothed objective at mu_k, forms the
// consensus point, draws the iteration's noise (all of it, in a fixed serial
// order, before any particle moves) and contracts every particle. If record
// is non-null the pre-step state and realized factors are appended to it.
ParticleEnsemble step(const ParticleEnsemble& ensemble, const SicboConfig& config,
                      const SmoothedObjective& objective, Rng& rng,
                      ConsensusTrace* record = nullptr);

// Stopping rules on two consecutive iterates. Particles with a zero step are
// excluded from the slope quotient.
bool should_stop(const StopRule& rule, const ParticleEnsemble& prev, const ParticleEnsemble& next,
                 const std::function<double(std::span<const double>)>& raw_objective);

struct RunReport {
    SicboConfig config;  // fully resolved, sufficient to reproduce the run
    ParticleEnsemble final_state;
    std::vector<double> final_consensus;
    double final_diameter = 0.0;
    std::int64_t iterations = 0;
    bool iteration_capped = false;
    ConsensusCondition condition;
    Dispersion initial_dispersion;
    ConsensusTrace trace;
};

// Called after every step with the just-updated ensemble.
using StepObserver = std::function<void(const ParticleEnsemble&)>;

// Full solver loop: uniform initialization on the box from the seed, steps
// until the stop rule fires or max_iter is reached (the report is then
// flagged iteration-capped). Identical configs produce bit-identical
// reports.
RunReport run(const SicboConfig& config, const SmoothedObjective& objective,
              const StepObserver& observer = {});

}  // namespace sicbo
