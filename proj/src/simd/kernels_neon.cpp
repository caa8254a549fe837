#include "leslab/simd.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

#include <cmath>

namespace leslab::simd {
namespace {

// Same per-element sequence as the AVX2 table, two lanes at a time.
void gemm_nn(std::size_t n, std::size_t k, std::size_t m, const double* a,
             const double* b, const double* bias, double* c)
{
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * m;
        std::size_t j = 0;
        for (; j + 2 <= m; j += 2) {
            float64x2_t acc = bias ? vld1q_f64(bias + j) : vdupq_n_f64(0.0);
            for (std::size_t l = 0; l < k; ++l)
                acc = vfmaq_f64(acc, vdupq_n_f64(arow[l]), vld1q_f64(b + l * m + j));
            vst1q_f64(crow + j, acc);
        }
        for (; j < m; ++j) {
            double acc = bias ? bias[j] : 0.0;
            for (std::size_t l = 0; l < k; ++l)
                acc = std::fma(arow[l], b[l * m + j], acc);
            crow[j] = acc;
        }
    }
}

void gemm_tn_acc(std::size_t n, std::size_t m, std::size_t p, const double* a,
                 const double* b, double* c)
{
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * p;
        std::size_t j = 0;
        for (; j + 2 <= p; j += 2) {
            float64x2_t acc = vdupq_n_f64(0.0);
            for (std::size_t r = 0; r < n; ++r)
                acc = vfmaq_f64(acc, vdupq_n_f64(a[r * m + i]), vld1q_f64(b + r * p + j));
            vst1q_f64(crow + j, vaddq_f64(vld1q_f64(crow + j), acc));
        }
        for (; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                acc = std::fma(a[r * m + i], b[r * p + j], acc);
            crow[j] += acc;
        }
    }
}

void relu(std::size_t n, const double* x, double* y)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::size_t n, const double* x, double* g)
{
    for (std::size_t i = 0; i < n; ++i)
        if (!(x[i] > 0.0))
            g[i] = 0.0;
}

void mul(std::size_t n, const double* x, const double* y, double* z)
{
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(z + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i)
        z[i] = x[i] * y[i];
}

}  // namespace

const KernelTable* neon_kernels()
{
    static const KernelTable table{Isa::Neon, "neon", gemm_nn, gemm_tn_acc,
                                   relu,      relu_backward, mul};
    return &table;
}

}  // namespace leslab::simd

#else

namespace leslab::simd {
const KernelTable* neon_kernels() { return nullptr; }
}  // namespace leslab::simd

#endif
