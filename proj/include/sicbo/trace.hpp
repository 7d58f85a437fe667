#pragma once

#include <cstddef>
#include <vector>

namespace sicbo {

// Per-iteration series recorded while a run executes. Entry k describes the
// ensemble state at iteration k together with the step taken from k to k+1;
// all series have one entry per executed step.
struct ConsensusTrace {
    std::vector<double> mu;           // smoothing parameter mu_k
    std::vector<double> diameter;     // max pairwise l2 distance
    std::vector<double> best_value;   // min_i f(x^{i,k}) of the raw objective
    std::vector<double> mean_value;   // mean_i f(x^{i,k})
    std::vector<double> mean_sq_dev;  // (1/N) sum_i ||x^{i,k} - consensus_k||^2
    // Realized contraction factors (1 - gamma - eta_l^k), row-major
    // iterations x d. Recorded for shared-noise runs only; empty otherwise.
    std::vector<double> factors;
    std::size_t dim = 0;

    std::size_t iterations() const { return mu.size(); }
    bool has_factors() const { return !factors.empty(); }
};

// Per-coordinate max squared deviation of the initial ensemble from its
// arithmetic mean; scales the dispersion bound.
struct Dispersion {
    std::vector<double> d_l;
};

}  // namespace sicbo
