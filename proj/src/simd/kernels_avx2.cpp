#include "leslab/simd.hpp"

#if defined(__x86_64__) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace leslab::simd {
namespace {

// Per output element: acc = bias; acc = fma(a, b, acc) for l = 0..k-1.
// The 8-, 4- and 1-wide paths all follow this sequence.
/// b is an 8-wide panel with row stride 8; c has row stride m. Named
/// accumulators keep GCC from mirroring an accumulator array on the stack.
template <int Rows>
inline void gemm_nn_block8(std::size_t k, std::size_t m, const double* a,
                           const double* b, const double* bias, double* c)
{
    static_assert(Rows >= 1 && Rows <= 6);
    const __m256d init0 = bias ? _mm256_loadu_pd(bias) : _mm256_setzero_pd();
    const __m256d init1 = bias ? _mm256_loadu_pd(bias + 4) : _mm256_setzero_pd();
    __m256d r00 = init0, r01 = init1, r10 = init0, r11 = init1, r20 = init0, r21 = init1;
    __m256d r30 = init0, r31 = init1, r40 = init0, r41 = init1, r50 = init0, r51 = init1;
    const auto step = [&](__m256d& lo, __m256d& hi, const double* ar, __m256d b0, __m256d b1) {
        const __m256d av = _mm256_broadcast_sd(ar);
        lo = _mm256_fmadd_pd(av, b0, lo);
        hi = _mm256_fmadd_pd(av, b1, hi);
    };
    for (std::size_t l = 0; l < k; ++l) {
        const __m256d b0 = _mm256_loadu_pd(b + l * 8);
        const __m256d b1 = _mm256_loadu_pd(b + l * 8 + 4);
        step(r00, r01, a + l, b0, b1);
        if constexpr (Rows > 1)
            step(r10, r11, a + k + l, b0, b1);
        if constexpr (Rows > 2)
            step(r20, r21, a + 2 * k + l, b0, b1);
        if constexpr (Rows > 3)
            step(r30, r31, a + 3 * k + l, b0, b1);
        if constexpr (Rows > 4)
            step(r40, r41, a + 4 * k + l, b0, b1);
        if constexpr (Rows > 5)
            step(r50, r51, a + 5 * k + l, b0, b1);
    }
    const auto store = [&](int r, __m256d lo, __m256d hi) {
        _mm256_storeu_pd(c + r * m, lo);
        _mm256_storeu_pd(c + r * m + 4, hi);
    };
    store(0, r00, r01);
    if constexpr (Rows > 1)
        store(1, r10, r11);
    if constexpr (Rows > 2)
        store(2, r20, r21);
    if constexpr (Rows > 3)
        store(3, r30, r31);
    if constexpr (Rows > 4)
        store(4, r40, r41);
    if constexpr (Rows > 5)
        store(5, r50, r51);
}

template <int Rows>
inline void gemm_nn_block4(std::size_t k, std::size_t m, const double* a,
                           const double* b, const double* bias, double* c)
{
    __m256d acc[Rows];
    const __m256d init = bias ? _mm256_loadu_pd(bias) : _mm256_setzero_pd();
    for (int r = 0; r < Rows; ++r)
        acc[r] = init;
    for (std::size_t l = 0; l < k; ++l) {
        const __m256d bv = _mm256_loadu_pd(b + l * m);
        for (int r = 0; r < Rows; ++r)
            acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * k + l), bv, acc[r]);
    }
    for (int r = 0; r < Rows; ++r)
        _mm256_storeu_pd(c + r * m, acc[r]);
}

template <int Rows>
inline void gemm_nn_tail(std::size_t k, std::size_t m, std::size_t j, std::size_t rest,
                         const double* a, const double* b, const double* bias, double* c)
{
    if (rest >= 4) {
        gemm_nn_block4<Rows>(k, m, a, b + j, bias ? bias + j : nullptr, c + j);
        j += 4;
    }
    for (; j < m; ++j) {
        for (int r = 0; r < Rows; ++r) {
            double acc = bias ? bias[j] : 0.0;
            for (std::size_t l = 0; l < k; ++l)
                acc = std::fma(a[r * k + l], b[l * m + j], acc);
            c[r * m + j] = acc;
        }
    }
}

/// Rows of a per cache tile; a tile of a stays in L2 while 8-column strips
/// of b cycle through L1. Tiling leaves each element's FMA order unchanged.
constexpr std::size_t kRowTile = 48;

void gemm_nn(std::size_t n, std::size_t k, std::size_t m, const double* a,
             const double* b, const double* bias, double* c)
{
    // Contiguous 8-column panels of b; a strided b maps onto few cache sets.
    const std::size_t panels = m / 8;
    std::vector<double> packed(panels * k * 8);
    for (std::size_t q = 0; q < panels; ++q)
        for (std::size_t l = 0; l < k; ++l)
            std::copy_n(b + l * m + q * 8, 8, packed.data() + (q * k + l) * 8);

    for (std::size_t i0 = 0; i0 < n; i0 += kRowTile) {
        const std::size_t i1 = std::min(n, i0 + kRowTile);
        std::size_t j = 0;
        for (; j + 8 <= m; j += 8) {
            const double* bj = bias ? bias + j : nullptr;
            const double* panel = packed.data() + (j / 8) * k * 8;
            std::size_t i = i0;
            for (; i + 6 <= i1; i += 6)
                gemm_nn_block8<6>(k, m, a + i * k, panel, bj, c + i * m + j);
            for (; i + 4 <= i1; i += 4)
                gemm_nn_block8<4>(k, m, a + i * k, panel, bj, c + i * m + j);
            for (; i < i1; ++i)
                gemm_nn_block8<1>(k, m, a + i * k, panel, bj, c + i * m + j);
        }
        if (j == m)
            continue;
        // Remaining columns (fewer than eight) row block by row block.
        const std::size_t rest = m - j;
        std::size_t i = i0;
        for (; i + 4 <= i1; i += 4)
            gemm_nn_tail<4>(k, m, j, rest, a + i * k, b, bias, c + i * m);
        for (; i < i1; ++i)
            gemm_nn_tail<1>(k, m, j, rest, a + i * k, b, bias, c + i * m);
    }
}

// Per output element: acc = 0; acc = fma(a[r][i], b[r][j], acc) for r in
// order; then c += acc. Row tiles park acc in a scratch matrix between tiles,
// which leaves that sequence unchanged.
/// b is an 8-wide panel with row stride 8; t has row stride p.
template <int Cols>
inline void gemm_tn_block8(std::size_t n, std::size_t m, std::size_t p,
                           const double* a, const double* b, double* t)
{
    static_assert(Cols >= 1 && Cols <= 6);
    const auto load = [&](int q, __m256d& lo, __m256d& hi) {
        if (q < Cols) {
            lo = _mm256_loadu_pd(t + q * p);
            hi = _mm256_loadu_pd(t + q * p + 4);
        }
    };
    __m256d r00{}, r01{}, r10{}, r11{}, r20{}, r21{}, r30{}, r31{}, r40{}, r41{}, r50{}, r51{};
    load(0, r00, r01);
    load(1, r10, r11);
    load(2, r20, r21);
    load(3, r30, r31);
    load(4, r40, r41);
    load(5, r50, r51);
    const auto step = [&](__m256d& lo, __m256d& hi, const double* aq, __m256d b0, __m256d b1) {
        const __m256d av = _mm256_broadcast_sd(aq);
        lo = _mm256_fmadd_pd(av, b0, lo);
        hi = _mm256_fmadd_pd(av, b1, hi);
    };
    for (std::size_t r = 0; r < n; ++r) {
        const __m256d b0 = _mm256_loadu_pd(b + r * 8);
        const __m256d b1 = _mm256_loadu_pd(b + r * 8 + 4);
        const double* ar = a + r * m;
        step(r00, r01, ar, b0, b1);
        if constexpr (Cols > 1)
            step(r10, r11, ar + 1, b0, b1);
        if constexpr (Cols > 2)
            step(r20, r21, ar + 2, b0, b1);
        if constexpr (Cols > 3)
            step(r30, r31, ar + 3, b0, b1);
        if constexpr (Cols > 4)
            step(r40, r41, ar + 4, b0, b1);
        if constexpr (Cols > 5)
            step(r50, r51, ar + 5, b0, b1);
    }
    const auto store = [&](int q, __m256d lo, __m256d hi) {
        if (q < Cols) {
            _mm256_storeu_pd(t + q * p, lo);
            _mm256_storeu_pd(t + q * p + 4, hi);
        }
    };
    store(0, r00, r01);
    store(1, r10, r11);
    store(2, r20, r21);
    store(3, r30, r31);
    store(4, r40, r41);
    store(5, r50, r51);
}

template <int Cols>
inline void gemm_tn_block4(std::size_t n, std::size_t m, std::size_t p,
                           const double* a, const double* b, double* t)
{
    __m256d acc[Cols];
    for (int q = 0; q < Cols; ++q)
        acc[q] = _mm256_loadu_pd(t + q * p);
    for (std::size_t r = 0; r < n; ++r) {
        const __m256d bv = _mm256_loadu_pd(b + r * p);
        for (int q = 0; q < Cols; ++q)
            acc[q] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * m + q), bv, acc[q]);
    }
    for (int q = 0; q < Cols; ++q)
        _mm256_storeu_pd(t + q * p, acc[q]);
}

/// `panels` holds the p / 8 packed 8-column panels of the b tile.
template <int Cols>
inline void gemm_tn_cols(std::size_t n, std::size_t m, std::size_t p, const double* a,
                         const double* b, const double* panels, double* t)
{
    std::size_t j = 0;
    for (; j + 8 <= p; j += 8)
        gemm_tn_block8<Cols>(n, m, p, a, panels + (j / 8) * n * 8, t + j);
    for (; j + 4 <= p; j += 4)
        gemm_tn_block4<Cols>(n, m, p, a, b + j, t + j);
    for (; j < p; ++j) {
        for (int q = 0; q < Cols; ++q) {
            double acc = t[q * p + j];
            for (std::size_t r = 0; r < n; ++r)
                acc = std::fma(a[r * m + q], b[r * p + j], acc);
            t[q * p + j] = acc;
        }
    }
}

/// Rows summed per tile; a tile of a and b together stays in L2.
constexpr std::size_t kSumTile = 128;

void gemm_tn_acc(std::size_t n, std::size_t m, std::size_t p, const double* a,
                 const double* b, double* c)
{
    std::vector<double> t(m * p, 0.0);
    const std::size_t panel_count = p / 8;
    std::vector<double> panels(panel_count * kSumTile * 8);
    for (std::size_t r0 = 0; r0 < n; r0 += kSumTile) {
        const std::size_t rows = std::min(kSumTile, n - r0);
        const double* ar = a + r0 * m;
        const double* br = b + r0 * p;
        for (std::size_t q = 0; q < panel_count; ++q)
            for (std::size_t r = 0; r < rows; ++r)
                std::copy_n(br + r * p + q * 8, 8, panels.data() + (q * rows + r) * 8);
        std::size_t i = 0;
        for (; i + 6 <= m; i += 6)
            gemm_tn_cols<6>(rows, m, p, ar + i, br, panels.data(), t.data() + i * p);
        for (; i + 4 <= m; i += 4)
            gemm_tn_cols<4>(rows, m, p, ar + i, br, panels.data(), t.data() + i * p);
        for (; i < m; ++i)
            gemm_tn_cols<1>(rows, m, p, ar + i, br, panels.data(), t.data() + i * p);
    }
    for (std::size_t e = 0; e < m * p; ++e)
        c[e] += t[e];
}

void relu(std::size_t n, const double* x, double* y)
{
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_and_pd(v, _mm256_cmp_pd(v, zero, _CMP_GT_OQ)));
    }
    for (; i < n; ++i)
        y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::size_t n, const double* x, double* g)
{
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(g + i, _mm256_and_pd(_mm256_loadu_pd(g + i), mask));
    }
    for (; i < n; ++i)
        if (!(x[i] > 0.0))
            g[i] = 0.0;
}

void mul(std::size_t n, const double* x, const double* y, double* z)
{
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(z + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i)
        z[i] = x[i] * y[i];
}

}  // namespace

const KernelTable* avx2_kernels()
{
    static const KernelTable table{Isa::Avx2, "avx2", gemm_nn, gemm_tn_acc,
                                   relu,      relu_backward, mul};
    static const bool supported =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &table : nullptr;
}

}  // namespace leslab::simd

#else

namespace leslab::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace leslab::simd

#endif
