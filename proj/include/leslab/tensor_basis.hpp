#pragma once

#include "leslab/mat3.hpp"

#include <array>
#include <span>

/// Strain/rotation split, the five invariants and the minimal complete
/// eight-tensor basis of isotropic symmetric tensor functions of (S, W).
namespace leslab::tensor_basis {

struct StrainRotation {
    Mat3 strain;    ///< S = (A + A^T) / 2
    Mat3 rotation;  ///< W = (A - A^T) / 2
};

/// lambda_1..5 = tr(S^2), tr(W^2), tr(S^3), tr(S W^2), tr(S^2 W^2).
using Invariants = std::array<double, 5>;

/// T0..T7 = I, S, S^2, W^2, SW - WS, WSW, S^2 W - W S^2, WSW^2 - W^2 SW.
using BasisTensors = std::array<Mat3, 8>;

/// Frobenius norms below this are treated as a zero gradient.
inline constexpr double kZeroNorm = 1e-300;

StrainRotation split(const Mat3& a);
Invariants invariants(const Mat3& s, const Mat3& w);
BasisTensors basis(const Mat3& s, const Mat3& w);
Mat3 deviatoric(const Mat3& sigma);

/// Delta^2 |A|_F^2 sum_{k=1..7} alpha_k T^(k),dev(A / |A|_F); zero for A = 0.
Mat3 tbnn_stress(const Mat3& a, double delta, std::span<const double, 7> alpha);

/// Normalized inputs of the coefficient network: invariants of A / |A|_F.
Invariants normalized_invariants(const Mat3& a);

/// Deviatoric basis tensors T^(1..7),dev of A / |A|_F.
std::array<Mat3, 7> normalized_deviatoric_basis(const Mat3& a);

}  // namespace leslab::tensor_basis
