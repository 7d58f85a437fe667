// AVX2 kernel variants. Compiled with -mavx2 on x86-64 and selected at
// runtime; see kernels.cpp. NEON is not provided, non-x86 builds use the
// scalar reference path.
//
// Elementwise kernels mirror the scalar operation order exactly (mul+sub /
// mul+add, no FMA) so their results are bit-identical to the reference.
// Reductions use lane-parallel accumulators and differ only by rounding.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "kernels_detail.hpp"

namespace sicbo::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    const __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    const __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

inline double sqdist_wide(const double* a, const double* b, std::size_t d) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t l = 0;
    for (; l + 4 <= d; l += 4) {
        const __m256d dif = _mm256_sub_pd(_mm256_loadu_pd(a + l), _mm256_loadu_pd(b + l));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(dif, dif));
    }
    double s = hsum(acc);
    for (; l < d; ++l) {
        const double t = a[l] - b[l];
        s += t * t;
    }
    return s;
}

}  // namespace

double max_pairwise_sqdist_avx2(const double* x, std::size_t n, std::size_t d) {
    double best = 0.0;
    if (d >= 8) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double* xi = x + i * d;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double s = sqdist_wide(xi, x + j * d, d);
                if (s > best) best = s;
            }
        }
        return best;
    }
    // Small d: four j-rows per iteration, one gather per coordinate.
    const std::int64_t dd = static_cast<std::int64_t>(d);
    const __m256i idx = _mm256_set_epi64x(3 * dd, 2 * dd, dd, 0);
    __m256d bestv = _mm256_setzero_pd();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double* xi = x + i * d;
        std::size_t j = i + 1;
        for (; j + 4 <= n; j += 4) {
            const double* base = x + j * d;
            __m256d acc = _mm256_setzero_pd();
            for (std::size_t l = 0; l < d; ++l) {
                const __m256d xj = _mm256_i64gather_pd(base + l, idx, 8);
                const __m256d dif = _mm256_sub_pd(_mm256_set1_pd(xi[l]), xj);
                acc = _mm256_add_pd(acc, _mm256_mul_pd(dif, dif));
            }
            bestv = _mm256_max_pd(bestv, acc);
        }
        for (; j < n; ++j) {
            const double* xj = x + j * d;
            double s = 0.0;
            for (std::size_t l = 0; l < d; ++l) {
                const double t = xi[l] - xj[l];
                s += t * t;
            }
            if (s > best) best = s;
        }
    }
    return std::max(best, hmax(bestv));
}

double mean_sqdist_from_avx2(const double* x, std::size_t n, std::size_t d, const double* c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += sqdist_wide(x + i * d, c, d);
    }
    return total / static_cast<double>(n);
}

void weighted_accumulate_avx2(const double* x, const double* w, std::size_t n, std::size_t d,
                              double* acc, double& wsum) {
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w[i];
        const __m256d wv = _mm256_set1_pd(wi);
        const double* xi = x + i * d;
        std::size_t l = 0;
        for (; l + 4 <= d; l += 4) {
            const __m256d a = _mm256_loadu_pd(acc + l);
            const __m256d v = _mm256_mul_pd(wv, _mm256_loadu_pd(xi + l));
            _mm256_storeu_pd(acc + l, _mm256_add_pd(a, v));
        }
        for (; l < d; ++l) acc[l] += wi * xi[l];
        wsum += wi;
    }
}

// Unit factors land exactly on the target, mirroring the scalar kernel.
void update_toward_avx2(double* x, std::size_t n, std::size_t d, const double* c,
                        const double* t) {
    const __m256d one = _mm256_set1_pd(1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* xi = x + i * d;
        std::size_t l = 0;
        for (; l + 4 <= d; l += 4) {
            const __m256d tv = _mm256_loadu_pd(t + l);
            const __m256d cv = _mm256_loadu_pd(c + l);
            const __m256d xv = _mm256_loadu_pd(xi + l);
            const __m256d step = _mm256_mul_pd(tv, _mm256_sub_pd(xv, cv));
            const __m256d upd = _mm256_sub_pd(xv, step);
            const __m256d unit = _mm256_cmp_pd(tv, one, _CMP_EQ_OQ);
            _mm256_storeu_pd(xi + l, _mm256_blendv_pd(upd, cv, unit));
        }
        for (; l < d; ++l) {
            xi[l] = t[l] == 1.0 ? c[l] : xi[l] - t[l] * (xi[l] - c[l]);
        }
    }
}

void update_toward_rowwise_avx2(double* x, std::size_t n, std::size_t d, const double* c,
                                const double* t) {
    const __m256d one = _mm256_set1_pd(1.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* xi = x + i * d;
        const double* ti = t + i * d;
        std::size_t l = 0;
        for (; l + 4 <= d; l += 4) {
            const __m256d tv = _mm256_loadu_pd(ti + l);
            const __m256d cv = _mm256_loadu_pd(c + l);
            const __m256d xv = _mm256_loadu_pd(xi + l);
            const __m256d step = _mm256_mul_pd(tv, _mm256_sub_pd(xv, cv));
            const __m256d upd = _mm256_sub_pd(xv, step);
            const __m256d unit = _mm256_cmp_pd(tv, one, _CMP_EQ_OQ);
            _mm256_storeu_pd(xi + l, _mm256_blendv_pd(upd, cv, unit));
        }
        for (; l < d; ++l) {
            xi[l] = ti[l] == 1.0 ? c[l] : xi[l] - ti[l] * (xi[l] - c[l]);
        }
    }
}

void dense_relu_batch_avx2(const double* W, const double* b, const double* x, double* y,
                           std::size_t nout, std::size_t nin, std::size_t nb, double mu) {
    const double two_mu = 2.0 * mu;
    const __m256d zero = _mm256_setzero_pd();
    const __m256d two_mu_v = _mm256_set1_pd(two_mu);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d half_mu = _mm256_set1_pd(0.5 * mu);
    const __m256d eighth_mu = _mm256_set1_pd(0.125 * mu);
    const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    for (std::size_t j = 0; j < nout; ++j) {
        const double* wj = W + j * nin;
        double* yj = y + j * nb;
        const __m256d bj = _mm256_set1_pd(b[j]);
        std::size_t m = 0;
        for (; m + 4 <= nb; m += 4) {
            __m256d acc = bj;
            for (std::size_t i = 0; i < nin; ++i) {
                const __m256d xv = _mm256_loadu_pd(x + i * nb + m);
                acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(wj[i]), xv));
            }
            const __m256d relu = _mm256_max_pd(acc, zero);
            if (mu == 0.0) {
                _mm256_storeu_pd(yj + m, relu);
            } else {
                const __m256d quad = _mm256_add_pd(
                    _mm256_add_pd(_mm256_div_pd(_mm256_mul_pd(acc, acc), two_mu_v),
                                  _mm256_mul_pd(half, acc)),
                    eighth_mu);
                const __m256d outer =
                    _mm256_cmp_pd(_mm256_and_pd(acc, absmask), half_mu, _CMP_GE_OQ);
                _mm256_storeu_pd(yj + m, _mm256_blendv_pd(quad, relu, outer));
            }
        }
        for (; m < nb; ++m) {
            double acc = b[j];
            for (std::size_t i = 0; i < nin; ++i) acc += wj[i] * x[i * nb + m];
            if (mu == 0.0 || std::abs(acc) >= 0.5 * mu) {
                yj[m] = acc > 0.0 ? acc : 0.0;
            } else {
                yj[m] = (acc * acc) / two_mu + 0.5 * acc + 0.125 * mu;
            }
        }
    }
}

double sq_err_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d dif = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(dif, dif));
    }
    double s = hsum(acc);
    for (; k < n; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

}  // namespace sicbo::kernels::detail

#endif  // x86-64
