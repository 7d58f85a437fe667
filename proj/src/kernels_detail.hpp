#pragma once

#include <cstddef>

namespace sicbo::kernels::detail {

double max_pairwise_sqdist_scalar(const double* x, std::size_t n, std::size_t d);
double mean_sqdist_from_scalar(const double* x, std::size_t n, std::size_t d, const double* c);
void weighted_accumulate_scalar(const double* x, const double* w, std::size_t n, std::size_t d,
                                double* acc, double& wsum);
void update_toward_scalar(double* x, std::size_t n, std::size_t d, const double* c,
                          const double* t);
void update_toward_rowwise_scalar(double* x, std::size_t n, std::size_t d, const double* c,
                                  const double* t);
void dense_relu_batch_scalar(const double* W, const double* b, const double* x, double* y,
                             std::size_t nout, std::size_t nin, std::size_t nb, double mu);
double sq_err_scalar(const double* a, const double* b, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double max_pairwise_sqdist_avx2(const double* x, std::size_t n, std::size_t d);
double mean_sqdist_from_avx2(const double* x, std::size_t n, std::size_t d, const double* c);
void weighted_accumulate_avx2(const double* x, const double* w, std::size_t n, std::size_t d,
                              double* acc, double& wsum);
void update_toward_avx2(double* x, std::size_t n, std::size_t d, const double* c, const double* t);
void update_toward_rowwise_avx2(double* x, std::size_t n, std::size_t d, const double* c,
                                const double* t);
void dense_relu_batch_avx2(const double* W, const double* b, const double* x, double* y,
                           std::size_t nout, std::size_t nin, std::size_t nb, double mu);
double sq_err_avx2(const double* a, const double* b, std::size_t n);
#endif

}  // namespace sicbo::kernels::detail
