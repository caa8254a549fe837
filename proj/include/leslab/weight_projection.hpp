#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

/// Equivariant weight projectors for point-wise group-convolution layers and
/// their compression to free-parameter bases.
///
/// Three layer kinds map between the 9-dimensional tensor representation Q_g
/// (row-major flattened 3x3 tensors) and the 48-dimensional regular
/// representation P_g:
///
///   Lift  (48 x 9):  P_g w = w Q_g
///   Inner (48 x 48): P_g w = w P_g
///   Final (9 x 48):  Q_g w = w P_g
///
/// The projection is the group average (1/48) sum_g P_g^-1 w Q_g (and
/// analogues), an orthogonal projector on the flattened weight space with
/// eigenvalues in {0, 1}.
namespace leslab::equiv {

enum class LayerKind : std::uint8_t { Lift = 0, Inner = 1, Final = 2 };

std::string_view to_string(LayerKind kind);

struct LayerShape {
    int out_dim;
    int in_dim;
    int rank;  ///< dimension of the equivariant subspace

    int size() const { return out_dim * in_dim; }
};

LayerShape shape_of(LayerKind kind);

/// Row-major out_dim x in_dim weight matrix.
using Weights = std::vector<double>;

Weights project_inner(std::span<const double> w);
Weights project_lift(std::span<const double> w);
Weights project_final(std::span<const double> w);
Weights project(LayerKind kind, std::span<const double> w);

/// Dense square projector on row-major flattened weights, dimension
/// (out_dim in_dim)^2, row-major.
struct NaiveProjector {
    LayerKind kind;
    int dim;
    std::vector<double> matrix;

    double operator()(int i, int j) const { return matrix[std::size_t(i) * dim + j]; }
};

NaiveProjector projector_matrix(LayerKind kind);

/// Orthonormal basis of the projector's unit eigenspace, column-major
/// (rows = out_dim in_dim, cols = rank).
struct SharedBasis {
    LayerKind kind;
    int rows = 0;
    int cols = 0;
    std::vector<double> columns;

    std::span<const double> column(int r) const
    {
        return {columns.data() + std::size_t(r) * rows, std::size_t(rows)};
    }
};

/// Eigendecomposition of the projector; throws std::runtime_error when the
/// spectrum is not {0, 1} within 1e-8 or the rank is wrong.
SharedBasis shared_basis(LayerKind kind);

/// Process-wide cached basis (computed on first use).
const SharedBasis& cached_shared_basis(LayerKind kind);

/// basis * theta reshaped to out_dim x in_dim.
Weights expand(const SharedBasis& basis, std::span<const double> theta);
/// basis^T vec(w): adjoint of expand, used to pull weight gradients back.
std::vector<double> contract(const SharedBasis& basis, std::span<const double> w);

/// Largest commutation residual over all 48 elements, Frobenius norm.
double max_commutation_violation(LayerKind kind, std::span<const double> w);

/// Binary cache: "EQBASIS1", kind u8, rows u32, cols u32, column-major f64,
/// little-endian.
void write_basis_cache(const std::filesystem::path& path, const SharedBasis& basis);
SharedBasis read_basis_cache(const std::filesystem::path& path);

/// Checks shape, orthonormality and equivariance of every column.
bool validate_basis(const SharedBasis& basis, double tol = 1e-10);

}  // namespace leslab::equiv
