#pragma once

#include <cstddef>

// Hot inner loops of the toolkit: pairwise distances, weighted reductions,
// particle updates and the batched MLP layer. Each kernel has a scalar
// reference implementation and (on x86-64) an AVX2 variant; the backend is
// chosen at runtime from CPU capabilities and can be forced for testing.
//
// Elementwise kernels (update_toward*, weighted_accumulate, dense_relu_batch)
// perform the same operations in the same order in every backend and are
// bit-identical across backends. Reduction kernels (max_pairwise_sqdist,
// mean_sqdist_from, sq_err) may associate sums differently and agree only up
// to rounding.

namespace sicbo::kernels {

enum class Backend { Scalar, Avx2 };

bool avx2_supported();
Backend active_backend();
// Throws std::runtime_error if the requested backend is unavailable.
// Not safe to call while kernels are executing on other threads.
void force_backend(Backend b);
void reset_backend();
const char* backend_name(Backend b);

// max over particle pairs (i,j) of squared l2 distance; rows of x are particles.
double max_pairwise_sqdist(const double* x, std::size_t n, std::size_t d);

// (1/n) * sum_i ||x_i - c||^2
double mean_sqdist_from(const double* x, std::size_t n, std::size_t d, const double* c);

// acc[l] += sum_i w[i] * x[i*d+l], wsum += sum_i w[i].
// The summation order over i is ascending in every backend.
void weighted_accumulate(const double* x, const double* w, std::size_t n, std::size_t d,
                         double* acc, double& wsum);

// x[i*d+l] -= t[l] * (x[i*d+l] - c[l])        shared per-coordinate factors
void update_toward(double* x, std::size_t n, std::size_t d, const double* c, const double* t);

// x[i*d+l] -= t[i*d+l] * (x[i*d+l] - c[l])    per-particle factors
void update_toward_rowwise(double* x, std::size_t n, std::size_t d, const double* c,
                           const double* t);

// Dense layer over a neuron-major batch:
//   y[j*nb+m] = act(b[j] + sum_i W[j*ni+i] * x[i*nb+m]),  m = 0..nb-1
// act is exact ReLU when mu == 0 and the quadratic-capped ReLU smoothing
// (s^2/(2mu) + s/2 + mu/8 inside |s| < mu/2) otherwise.
void dense_relu_batch(const double* W, const double* b, const double* x, double* y,
                      std::size_t nout, std::size_t nin, std::size_t nb, double mu);

// sum_k (a[k] - b[k])^2
double sq_err(const double* a, const double* b, std::size_t n);

}  // namespace sicbo::kernels
