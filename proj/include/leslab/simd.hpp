#pragma once

#include <cstddef>
#include <string_view>

/// Data-parallel inner loops with a scalar reference and vectorized variants.
///
/// Every variant computes each output element with the same operation order
/// regardless of where the element sits in the array (no lane-dependent tails),
/// so a value moved to a different row produces bit-identical results within
/// one kernel table. Different tables may differ by rounding (FMA contraction).
namespace leslab::simd {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
    Isa isa;
    const char* name;

    /// c[n x m] = a[n x k] * b[k x m] + bias[m] (bias may be null). Row-major.
    void (*gemm_nn)(std::size_t n, std::size_t k, std::size_t m,
                    const double* a, const double* b, const double* bias, double* c);

    /// c[m x p] += a[n x m]^T * b[n x p]. Row-major; sum over rows in order.
    void (*gemm_tn_acc)(std::size_t n, std::size_t m, std::size_t p,
                        const double* a, const double* b, double* c);

    /// y[i] = max(x[i], 0)
    void (*relu)(std::size_t n, const double* x, double* y);

    /// g[i] = (x[i] > 0) ? g[i] : 0
    void (*relu_backward)(std::size_t n, const double* x, double* g);

    /// z[i] = x[i] * y[i]
    void (*mul)(std::size_t n, const double* x, const double* y, double* z);
};

const KernelTable& scalar_kernels();

/// Null when the ISA is not compiled in or not supported by this CPU.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Selected once per process: best supported table, overridable with the
/// environment variable LESLAB_SIMD=scalar|avx2|neon.
const KernelTable& active();

std::string_view isa_name(Isa isa);

}  // namespace leslab::simd
