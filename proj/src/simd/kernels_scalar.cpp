#include "leslab/simd.hpp"

namespace leslab::simd {
namespace {

void gemm_nn(std::size_t n, std::size_t k, std::size_t m, const double* a,
             const double* b, const double* bias, double* c)
{
    for (std::size_t i = 0; i < n; ++i) {
        double* crow = c + i * m;
        for (std::size_t j = 0; j < m; ++j)
            crow[j] = bias ? bias[j] : 0.0;
        const double* arow = a + i * k;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = arow[l];
            const double* brow = b + l * m;
            for (std::size_t j = 0; j < m; ++j)
                crow[j] += av * brow[j];
        }
    }
}

void gemm_tn_acc(std::size_t n, std::size_t m, std::size_t p, const double* a,
                 const double* b, double* c)
{
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * p;
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                acc += a[r * m + i] * b[r * p + j];
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
    for (std::size_t i = 0; i < n; ++i)
        z[i] = x[i] * y[i];
}

}  // namespace

const KernelTable& scalar_kernels()
{
    static const KernelTable table{Isa::Scalar, "scalar", gemm_nn, gemm_tn_acc,
                                   relu,        relu_backward, mul};
    return table;
}

}  // namespace leslab::simd
