#include "leslab/octa_group.hpp"

#include <stdexcept>
#include <string>

namespace leslab::octa {
namespace {

constexpr int kPermutations[6][3] = {{1, 2, 3}, {2, 3, 1}, {3, 1, 2},
                                     {3, 2, 1}, {2, 1, 3}, {1, 3, 2}};
constexpr int kSignFlips[8][3] = {{+1, +1, +1}, {-1, +1, +1}, {+1, -1, +1},
                                  {+1, +1, -1}, {-1, -1, +1}, {+1, -1, -1},
                                  {-1, +1, -1}, {-1, -1, -1}};

SignedPermutation build_matrix(int perm, int sign)
{
    SignedPermutation r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r.m[i][j] = kSignFlips[sign][i] * (kPermutations[perm][i] == j + 1 ? 1 : 0);
    return r;
}

/// Row-wise description of a signed permutation: row i has its nonzero in
/// column col[i] with sign sgn[i].
struct RowForm {
    std::array<int, 3> col{};
    std::array<int, 3> sgn{};
};

RowForm row_form(const SignedPermutation& r)
{
    RowForm f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (r.m[i][j] != 0) {
                f.col[i] = j;
                f.sgn[i] = r.m[i][j];
            }
    return f;
}

struct Tables {
    std::array<SignedPermutation, kOrder> matrices{};
    std::array<RowForm, kOrder> rows{};
    CayleyTable cayley{};
    std::array<int, kOrder> inverse{};

    Tables()
    {
        for (int k = 0; k < kOrder; ++k) {
            matrices[k] = build_matrix(k % 6, k / 6);
            rows[k] = row_form(matrices[k]);
        }
        for (int i = 0; i < kOrder; ++i)
            for (int j = 0; j < kOrder; ++j)
                cayley[i][j] = lookup(matrices[i] * matrices[j]);
        for (int i = 0; i < kOrder; ++i)
            inverse[i] = lookup(matrices[i].transposed());
    }

    int lookup(const SignedPermutation& m) const
    {
        for (int k = 0; k < kOrder; ++k)
            if (matrices[k] == m)
                return k;
        throw std::logic_error("signed permutation is not an element of the octahedral group");
    }
};

const Tables& tables()
{
    static const Tables t;
    return t;
}

}  // namespace

int SignedPermutation::det() const
{
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

SignedPermutation SignedPermutation::transposed() const
{
    SignedPermutation t;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            t.m[i][j] = m[j][i];
    return t;
}

Mat3 SignedPermutation::to_real() const
{
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r(i, j) = m[i][j];
    return r;
}

SignedPermutation operator*(const SignedPermutation& a, const SignedPermutation& b)
{
    SignedPermutation c;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            c.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j] + a.m[i][2] * b.m[2][j];
    return c;
}

GroupElement GroupElement::from_flat(int k)
{
    if (k < 1 || k > kOrder)
        throw std::out_of_range("group element flat index must be in 1..48, got " +
                                std::to_string(k));
    return GroupElement(k - 1);
}

GroupElement GroupElement::from_parts(int perm, int sign)
{
    if (perm < 1 || perm > 6 || sign < 1 || sign > 8)
        throw std::out_of_range("permutation index must be in 1..6 and sign index in 1..8");
    return GroupElement(perm + 6 * (sign - 1) - 1);
}

RegularRep RegularRep::then_after(const RegularRep& other) const
{
    RegularRep r;
    for (int j = 0; j < kOrder; ++j)
        r.perm[j] = perm[other.perm[j]];
    return r;
}

bool RegularRep::is_identity() const
{
    for (int j = 0; j < kOrder; ++j)
        if (perm[j] != j)
            return false;
    return true;
}

double TensorRep::operator()(int i, int j) const
{
    return target[j] == i ? double(sign[j]) : 0.0;
}

std::array<double, 9> TensorRep::apply(const std::array<double, 9>& v) const
{
    std::array<double, 9> out{};
    for (int b = 0; b < 9; ++b)
        out[target[b]] = sign[b] * v[b];
    return out;
}

std::array<double, 9> TensorRep::apply_transpose(const std::array<double, 9>& v) const
{
    std::array<double, 9> out{};
    for (int b = 0; b < 9; ++b)
        out[b] = sign[b] * v[target[b]];
    return out;
}

std::vector<GroupElement> enumerate_group()
{
    std::vector<GroupElement> all;
    all.reserve(kOrder);
    for (int k = 1; k <= kOrder; ++k)
        all.push_back(GroupElement::from_flat(k));
    return all;
}

SignedPermutation rotation_matrix(GroupElement g) { return tables().matrices[g.index()]; }

GroupElement compose(GroupElement g, GroupElement h)
{
    return GroupElement::from_flat(tables().cayley[g.index()][h.index()] + 1);
}

GroupElement inverse(GroupElement g)
{
    return GroupElement::from_flat(tables().inverse[g.index()] + 1);
}

GroupElement find_element(const SignedPermutation& m)
{
    return GroupElement::from_flat(tables().lookup(m) + 1);
}

RegularRep regular_rep(GroupElement g)
{
    RegularRep r;
    const auto& row = tables().cayley[g.index()];
    for (int j = 0; j < kOrder; ++j)
        r.perm[j] = row[j];
    return r;
}

TensorRep tensor_rep(GroupElement g)
{
    const RowForm& f = tables().rows[g.index()];
    TensorRep q;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int src = 3 * f.col[i] + f.col[j];
            q.target[src] = 3 * i + j;
            q.sign[src] = f.sgn[i] * f.sgn[j];
        }
    return q;
}

const CayleyTable& cayley_table() { return tables().cayley; }

Vec3 act_on_vector(GroupElement g, const Vec3& v)
{
    const RowForm& f = tables().rows[g.index()];
    return {f.sgn[0] * v[f.col[0]], f.sgn[1] * v[f.col[1]], f.sgn[2] * v[f.col[2]]};
}

Mat3 act_on_tensor(GroupElement g, const Mat3& sigma)
{
    const RowForm& f = tables().rows[g.index()];
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = (f.sgn[i] * f.sgn[j]) * sigma(f.col[i], f.col[j]);
    return out;
}

namespace {

/// Per output component: source component and sign of the value rule.
struct ValueRule {
    int ncomp = 0;
    std::array<int, 9> src{};
    std::array<int, 9> sgn{};
};

ValueRule value_rule(GroupElement g, FieldKind kind)
{
    const RowForm& f = tables().rows[g.index()];
    ValueRule v;
    v.ncomp = components_of(kind);
    switch (kind) {
    case FieldKind::Scalar:
        v.src[0] = 0;
        v.sgn[0] = 1;
        break;
    case FieldKind::Vector:
        for (int i = 0; i < 3; ++i) {
            v.src[i] = f.col[i];
            v.sgn[i] = f.sgn[i];
        }
        break;
    case FieldKind::Tensor:
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                v.src[3 * i + j] = 3 * f.col[i] + f.col[j];
                v.sgn[3 * i + j] = f.sgn[i] * f.sgn[j];
            }
        break;
    case FieldKind::SymTensor:
        for (int c = 0; c < 6; ++c) {
            const int i = kSymRow[c];
            const int j = kSymCol[c];
            v.src[c] = kSymIndex[f.col[i]][f.col[j]];
            v.sgn[c] = f.sgn[i] * f.sgn[j];
        }
        break;
    }
    return v;
}

}  // namespace

PhysicalField act_on_physical_field(GroupElement g, const PhysicalField& field,
                                    FieldKind kind, const Grid& grid)
{
    if (!(field.grid == grid))
        throw std::invalid_argument("field does not live on the given uniform periodic grid");
    if (field.components != components_of(kind) || field.data.size() != grid.points() * field.components)
        throw std::invalid_argument("field component count does not match its kind");

    const ValueRule rule = value_rule(g, kind);
    const SignedPermutation r = rotation_matrix(g);
    const int n = grid.n();
    PhysicalField out(grid, field.components);
    std::array<int, 3> x{};
    for (x[0] = 0; x[0] < n; ++x[0])
        for (x[1] = 0; x[1] < n; ++x[1])
            for (x[2] = 0; x[2] < n; ++x[2]) {
                // Source point R^T x (mod n).
                int y[3];
                for (int i = 0; i < 3; ++i) {
                    const int s = r.m[0][i] * x[0] + r.m[1][i] * x[1] + r.m[2][i] * x[2];
                    y[i] = ((s % n) + n) % n;
                }
                const std::size_t dst = grid.linear(x[0], x[1], x[2]);
                const std::size_t src = grid.linear(y[0], y[1], y[2]);
                for (int c = 0; c < rule.ncomp; ++c)
                    out.at(c, dst) = rule.sgn[c] * field.at(rule.src[c], src);
            }
    return out;
}

PhysicalField act_on_physical_field(GroupElement g, const PhysicalField& field, FieldKind kind)
{
    return act_on_physical_field(g, field, kind, field.grid);
}

SpectralField act_on_spectral_field(GroupElement g, const SpectralField& field, FieldKind kind)
{
    if (field.components != components_of(kind))
        throw std::invalid_argument("spectral field component count does not match its kind");
    const Grid& grid = field.grid;
    const ValueRule rule = value_rule(g, kind);
    const SignedPermutation r = rotation_matrix(g);
    const int n = grid.n();
    SpectralField out(grid, field.components);
    std::array<int, 3> x{};
    for (x[0] = 0; x[0] < n; ++x[0])
        for (x[1] = 0; x[1] < n; ++x[1])
            for (x[2] = 0; x[2] < n; ++x[2]) {
                int y[3];
                for (int i = 0; i < 3; ++i) {
                    const int s = r.m[0][i] * x[0] + r.m[1][i] * x[1] + r.m[2][i] * x[2];
                    y[i] = ((s % n) + n) % n;
                }
                const std::size_t dst = grid.linear(x[0], x[1], x[2]);
                const std::size_t src = grid.linear(y[0], y[1], y[2]);
                for (int c = 0; c < rule.ncomp; ++c)
                    out.at(c, dst) = double(rule.sgn[c]) * field.at(rule.src[c], src);
            }
    return out;
}

}  // namespace leslab::octa
