#include "leslab/tensor_basis.hpp"

namespace leslab::tensor_basis {

StrainRotation split(const Mat3& a)
{
    const Mat3 at = transpose(a);
    return {0.5 * (a + at), 0.5 * (a - at)};
}

Invariants invariants(const Mat3& s, const Mat3& w)
{
    const Mat3 s2 = s * s;
    const Mat3 w2 = w * w;
    return {trace(s2), trace(w2), trace(s2 * s), trace(s * w2), trace(s2 * w2)};
}

BasisTensors basis(const Mat3& s, const Mat3& w)
{
    const Mat3 s2 = s * s;
    const Mat3 w2 = w * w;
    const Mat3 sw = s * w;
    const Mat3 ws = w * s;
    const Mat3 wsw = ws * w;
    return {Mat3::identity(), s,         s2,
            w2,               sw - ws,   wsw,
            s2 * w - w * s2,  wsw * w - w2 * sw};
}

Mat3 deviatoric(const Mat3& sigma)
{
    Mat3 d = sigma;
    const double third = trace(sigma) / 3.0;
    d(0, 0) -= third;
    d(1, 1) -= third;
    d(2, 2) -= third;
    return d;
}

Invariants normalized_invariants(const Mat3& a)
{
    const double norm = frobenius(a);
    if (norm < kZeroNorm)
        return {};
    const auto [s, w] = split((1.0 / norm) * a);
    return invariants(s, w);
}

std::array<Mat3, 7> normalized_deviatoric_basis(const Mat3& a)
{
    std::array<Mat3, 7> out{};
    const double norm = frobenius(a);
    if (norm < kZeroNorm)
        return out;
    const auto [s, w] = split((1.0 / norm) * a);
    const BasisTensors t = basis(s, w);
    for (int k = 0; k < 7; ++k)
        out[k] = deviatoric(t[k + 1]);
    return out;
}

Mat3 tbnn_stress(const Mat3& a, double delta, std::span<const double, 7> alpha)
{
    const double norm = frobenius(a);
    if (norm < kZeroNorm)
        return {};
    const auto t = normalized_deviatoric_basis(a);
    Mat3 m;
    for (int k = 0; k < 7; ++k)
        m += alpha[k] * t[k];
    return (delta * delta * norm * norm) * m;
}

}  // namespace leslab::tensor_basis
