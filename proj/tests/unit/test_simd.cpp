#include "doctest.h"

#include "leslab/simd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

using namespace leslab::simd;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng)
{
    std::normal_distribution<double> d;
    std::vector<double> v(n);
    for (auto& x : v)
        x = d(rng);
    return v;
}

/// Plain triple loop in long double.
std::vector<double> reference_gemm(std::size_t n, std::size_t k, std::size_t m, const std::vector<double>& a,
                                   const std::vector<double>& b, const std::vector<double>& bias)
{
    std::vector<double> c(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            long double s = bias[j];
            for (std::size_t l = 0; l < k; ++l)
                s += (long double)a[i * k + l] * b[l * m + j];
            c[i * m + j] = double(s);
        }
    return c;
}

std::vector<const KernelTable*> tables()
{
    std::vector<const KernelTable*> t{&scalar_kernels()};
    if (avx2_kernels())
        t.push_back(avx2_kernels());
    if (neon_kernels())
        t.push_back(neon_kernels());
    return t;
}

}  // namespace

TEST_CASE("gemm kernels match a high-precision reference")
{
    std::mt19937_64 rng(1);
    for (auto [n, k, m] : {std::array<std::size_t, 3>{1, 1, 1}, {7, 9, 64}, {13, 64, 7}, {33, 60, 60}, {5, 48, 11}, {130, 20, 21}, {100, 17, 64}}) {
        const auto a = random_vec(n * k, rng), b = random_vec(k * m, rng), bias = random_vec(m, rng);
        const auto ref = reference_gemm(n, k, m, a, b, bias);
        for (const auto* t : tables()) {
            CAPTURE(t->name);
            std::vector<double> c(n * m);
            t->gemm_nn(n, k, m, a.data(), b.data(), bias.data(), c.data());
            for (std::size_t i = 0; i < c.size(); ++i)
                CHECK(std::abs(c[i] - ref[i]) <= 1e-13 * (1.0 + k));
            std::vector<double> c0(n * m);
            t->gemm_nn(n, k, m, a.data(), b.data(), nullptr, c0.data());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    CHECK(std::abs(c0[i * m + j] + bias[j] - ref[i * m + j]) <= 1e-13 * (1.0 + k));
        }
    }
}

TEST_CASE("vector kernels agree with the scalar table")
{
    std::mt19937_64 rng(2);
    const auto& s = scalar_kernels();
    for (const auto* t : tables()) {
        CAPTURE(t->name);
        for (std::size_t n : {1u, 3u, 4u, 17u, 64u, 1001u}) {
            const auto x = random_vec(n, rng), y = random_vec(n, rng);
            std::vector<double> r1(n), r2(n), g1 = y, g2 = y, z1(n), z2(n);
            s.relu(n, x.data(), r1.data());
            t->relu(n, x.data(), r2.data());
            CHECK(r1 == r2);
            s.relu_backward(n, x.data(), g1.data());
            t->relu_backward(n, x.data(), g2.data());
            CHECK(g1 == g2);
            s.mul(n, x.data(), y.data(), z1.data());
            t->mul(n, x.data(), y.data(), z2.data());
            CHECK(z1 == z2);
        }
        for (auto [n, m, p] : {std::array<std::size_t, 3>{5, 3, 2}, {100, 9, 64}, {37, 64, 7}, {300, 23, 21}, {260, 13, 16}}) {
            const auto a = random_vec(n * m, rng), b = random_vec(n * p, rng), init = random_vec(m * p, rng);
            auto c1 = init, c2 = init;
            s.gemm_tn_acc(n, m, p, a.data(), b.data(), c1.data());
            t->gemm_tn_acc(n, m, p, a.data(), b.data(), c2.data());
            for (std::size_t i = 0; i < c1.size(); ++i)
                CHECK(std::abs(c1[i] - c2[i]) <= 1e-12 * (1.0 + n));
        }
    }
}

TEST_CASE("row results do not depend on the row position")
{
    std::mt19937_64 rng(3);
    const std::size_t k = 9, m = 60;
    const auto b = random_vec(k * m, rng), bias = random_vec(m, rng), row = random_vec(k, rng);
    for (const auto* t : tables()) {
        CAPTURE(t->name);
        std::vector<double> single(m);
        t->gemm_nn(1, k, m, row.data(), b.data(), bias.data(), single.data());
        for (std::size_t n : {2u, 5u, 8u, 53u, 101u}) {
            auto a = random_vec(n * k, rng);
            std::copy(row.begin(), row.end(), a.begin() + (n - 1) * k);
            std::vector<double> c(n * m);
            t->gemm_nn(n, k, m, a.data(), b.data(), bias.data(), c.data());
            CHECK(std::equal(single.begin(), single.end(), c.begin() + (n - 1) * m));
        }
    }
}

TEST_CASE("active table is one of the available ones")
{
    const auto& a = active();
    bool found = false;
    for (const auto* t : tables())
        found = found || t == &a;
    CHECK(found);
    CHECK(isa_name(a.isa) == std::string_view(a.name));
}
