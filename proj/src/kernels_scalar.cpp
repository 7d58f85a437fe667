// Scalar reference kernels. These define the semantics the SIMD variants are
// tested against.

#include "sicbo/kernels.hpp"

#include <cmath>

namespace sicbo::kernels::detail {

double max_pairwise_sqdist_scalar(const double* x, std::size_t n, std::size_t d) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double* xi = x + i * d;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* xj = x + j * d;
            double s = 0.0;
            for (std::size_t l = 0; l < d; ++l) {
                const double t = xi[l] - xj[l];
                s += t * t;
            }
            if (s > best) best = s;
        }
    }
    return best;
}

double mean_sqdist_from_scalar(const double* x, std::size_t n, std::size_t d, const double* c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x + i * d;
        double s = 0.0;
        for (std::size_t l = 0; l < d; ++l) {
            const double t = xi[l] - c[l];
            s += t * t;
        }
        total += s;
    }
    return total / static_cast<double>(n);
}

void weighted_accumulate_scalar(const double* x, const double* w, std::size_t n, std::size_t d,
                                double* acc, double& wsum) {
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w[i];
        const double* xi = x + i * d;
        for (std::size_t l = 0; l < d; ++l) acc[l] += wi * xi[l];
        wsum += wi;
    }
}

// A unit factor lands exactly on the target; x - 1.0*(x - c) would not.
void update_toward_scalar(double* x, std::size_t n, std::size_t d, const double* c,
                          const double* t) {
    for (std::size_t i = 0; i < n; ++i) {
        double* xi = x + i * d;
        for (std::size_t l = 0; l < d; ++l) {
            xi[l] = t[l] == 1.0 ? c[l] : xi[l] - t[l] * (xi[l] - c[l]);
        }
    }
}

void update_toward_rowwise_scalar(double* x, std::size_t n, std::size_t d, const double* c,
                                  const double* t) {
    for (std::size_t i = 0; i < n; ++i) {
        double* xi = x + i * d;
        const double* ti = t + i * d;
        for (std::size_t l = 0; l < d; ++l) {
            xi[l] = ti[l] == 1.0 ? c[l] : xi[l] - ti[l] * (xi[l] - c[l]);
        }
    }
}

namespace {
inline double act_relu(double s, double mu, double two_mu) {
    if (mu == 0.0 || std::abs(s) >= 0.5 * mu) return s > 0.0 ? s : 0.0;
    return (s * s) / two_mu + 0.5 * s + 0.125 * mu;
}
}  // namespace

void dense_relu_batch_scalar(const double* W, const double* b, const double* x, double* y,
                             std::size_t nout, std::size_t nin, std::size_t nb, double mu) {
    const double two_mu = 2.0 * mu;
    for (std::size_t j = 0; j < nout; ++j) {
        const double* wj = W + j * nin;
        double* yj = y + j * nb;
        for (std::size_t m = 0; m < nb; ++m) {
            double acc = b[j];
            for (std::size_t i = 0; i < nin; ++i) acc += wj[i] * x[i * nb + m];
            yj[m] = act_relu(acc, mu, two_mu);
        }
    }
}

double sq_err_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

}  // namespace sicbo::kernels::detail
