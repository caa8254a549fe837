#pragma once

#include "leslab/fields.hpp"
#include "leslab/mat3.hpp"

#include <array>
#include <vector>

/// The 48 roto-reflections of the cube, their representations and their
/// actions on vectors, tensors and gridded fields.
///
/// Elements are indexed in the flat ordering k = i + 6 (j - 1) where i in 1..6
/// selects a permutation vector and j in 1..8 a sign-flip pattern:
///
///   p: (1,2,3) (2,3,1) (3,1,2) (3,2,1) (2,1,3) (1,3,2)
///   s: (+++) (-++) (+-+) (++-) (--+) (+--) (-+-) (---)
///
/// Element 1 is the identity and element 43 is the point inversion -I.
namespace leslab::octa {

inline constexpr int kOrder = 48;

using IMat3 = std::array<std::array<int, 3>, 3>;

/// Signed permutation matrix R = S P with entries in {-1, 0, +1}.
struct SignedPermutation {
    IMat3 m{};

    int operator()(int i, int j) const { return m[i][j]; }
    int det() const;
    SignedPermutation transposed() const;
    Mat3 to_real() const;
    bool operator==(const SignedPermutation&) const = default;
};

SignedPermutation operator*(const SignedPermutation& a, const SignedPermutation& b);

class GroupElement {
public:
    constexpr GroupElement() = default;

    /// k in 1..48.
    static GroupElement from_flat(int k);
    /// perm in 1..6, sign in 1..8.
    static GroupElement from_parts(int perm, int sign);
    static constexpr GroupElement identity() { return GroupElement{}; }

    constexpr int flat_index() const { return index_ + 1; }
    constexpr int perm_index() const { return index_ % 6 + 1; }
    constexpr int sign_index() const { return index_ / 6 + 1; }
    /// Zero-based position in the flat ordering.
    constexpr int index() const { return index_; }

    constexpr bool operator==(const GroupElement&) const = default;

private:
    explicit constexpr GroupElement(int index) : index_(index) {}
    int index_ = 0;
};

/// Regular representation as a permutation: rep(g) sends basis vector e_j to
/// e_{perm[j]}, where g_{perm[j]} = g g_j. Zero-based entries.
struct RegularRep {
    std::array<int, kOrder> perm{};

    /// (this o other)[j] = this[other[j]]
    RegularRep then_after(const RegularRep& other) const;
    bool is_identity() const;
    bool operator==(const RegularRep&) const = default;
};

/// 9x9 signed permutation acting on row-major flattened 3x3 tensors:
/// Q vec(sigma) = vec(R sigma R^T). Stored as target index and sign per
/// input index, plus the dense matrix.
struct TensorRep {
    std::array<int, 9> target{};
    std::array<int, 9> sign{};

    double operator()(int i, int j) const;
    std::array<double, 9> apply(const std::array<double, 9>& v) const;
    std::array<double, 9> apply_transpose(const std::array<double, 9>& v) const;
};

/// table[i][j] = k (zero-based) with g_k = g_i g_j.
using CayleyTable = std::array<std::array<int, kOrder>, kOrder>;

std::vector<GroupElement> enumerate_group();
SignedPermutation rotation_matrix(GroupElement g);
GroupElement compose(GroupElement g, GroupElement h);
GroupElement inverse(GroupElement g);
RegularRep regular_rep(GroupElement g);
TensorRep tensor_rep(GroupElement g);
const CayleyTable& cayley_table();

/// Element whose matrix equals m; throws std::logic_error if none does.
GroupElement find_element(const SignedPermutation& m);

Vec3 act_on_vector(GroupElement g, const Vec3& v);
/// R sigma R^T
Mat3 act_on_tensor(GroupElement g, const Mat3& sigma);

/// Value rule per rank with the point remap x -> R^{-1} x (mod L):
/// scalar p(R^-1 x), vector R u(R^-1 x), tensor R s(R^-1 x) R^T.
/// The field's grid must be the supplied grid.
PhysicalField act_on_physical_field(GroupElement g, const PhysicalField& field,
                                    FieldKind kind, const Grid& grid);
PhysicalField act_on_physical_field(GroupElement g, const PhysicalField& field,
                                    FieldKind kind);

/// Spectral counterpart: coefficient at k maps to R u(R^T k), indices mod n.
SpectralField act_on_spectral_field(GroupElement g, const SpectralField& field,
                                    FieldKind kind = FieldKind::Vector);

}  // namespace leslab::octa
