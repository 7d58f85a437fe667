#include "sicbo/kernels.hpp"

#include <stdexcept>

#include "kernels_detail.hpp"

namespace sicbo::kernels {

namespace {

Backend detect() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#endif
    return Backend::Scalar;
}

Backend g_backend = detect();

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Backend active_backend() { return g_backend; }

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported()) {
        throw std::runtime_error("AVX2 backend not supported on this CPU");
    }
    g_backend = b;
}

void reset_backend() { g_backend = detect(); }

const char* backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

#if defined(__x86_64__) || defined(_M_X64)
#define SICBO_DISPATCH(fn, ...)                                        \
    do {                                                               \
        if (g_backend == Backend::Avx2) return detail::fn##_avx2(__VA_ARGS__); \
        return detail::fn##_scalar(__VA_ARGS__);                       \
    } while (0)
#else
#define SICBO_DISPATCH(fn, ...) return detail::fn##_scalar(__VA_ARGS__)
#endif

double max_pairwise_sqdist(const double* x, std::size_t n, std::size_t d) {
    SICBO_DISPATCH(max_pairwise_sqdist, x, n, d);
}

double mean_sqdist_from(const double* x, std::size_t n, std::size_t d, const double* c) {
    SICBO_DISPATCH(mean_sqdist_from, x, n, d, c);
}

void weighted_accumulate(const double* x, const double* w, std::size_t n, std::size_t d,
                         double* acc, double& wsum) {
    SICBO_DISPATCH(weighted_accumulate, x, w, n, d, acc, wsum);
}

void update_toward(double* x, std::size_t n, std::size_t d, const double* c, const double* t) {
    SICBO_DISPATCH(update_toward, x, n, d, c, t);
}

void update_toward_rowwise(double* x, std::size_t n, std::size_t d, const double* c,
                           const double* t) {
    SICBO_DISPATCH(update_toward_rowwise, x, n, d, c, t);
}

void dense_relu_batch(const double* W, const double* b, const double* x, double* y,
                      std::size_t nout, std::size_t nin, std::size_t nb, double mu) {
    SICBO_DISPATCH(dense_relu_batch, W, b, x, y, nout, nin, nb, mu);
}

double sq_err(const double* a, const double* b, std::size_t n) {
    SICBO_DISPATCH(sq_err, a, b, n);
}

#undef SICBO_DISPATCH

}  // namespace sicbo::kernels
