#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace leslab {

using Complex = std::complex<double>;

/// Uniform periodic cube [0, L)^3 with n points per axis, x_i = i L / n.
///
/// Spectral arrays use FFT index order per axis: index i holds wavenumber
/// i for i < n/2 and i - n otherwise, so k in {-n/2, ..., n/2 - 1}.
class Grid {
public:
    Grid() = default;
    explicit Grid(int n, double length = 2.0 * std::numbers::pi) : n_(n), length_(length)
    {
        if (n <= 0 || n % 2 != 0)
            throw std::invalid_argument("grid size must be a positive even integer");
        if (!(length > 0.0))
            throw std::invalid_argument("box length must be positive");
    }

    int n() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return length_ / n_; }
    std::size_t points() const { return std::size_t(n_) * n_ * n_; }

    int wavenumber(int index) const { return index < n_ / 2 ? index : index - n_; }
    int index_of(int k) const { return ((k % n_) + n_) % n_; }
    bool is_nyquist(int k) const { return k == -n_ / 2; }

    std::size_t linear(int i1, int i2, int i3) const
    {
        return (std::size_t(i1) * n_ + i2) * n_ + i3;
    }

    /// Physical wavenumber factor 2 pi / L.
    double k_unit() const { return 2.0 * std::numbers::pi / length_; }

    bool operator==(const Grid&) const = default;

private:
    int n_ = 2;
    double length_ = 2.0 * std::numbers::pi;
};

/// Component layout of a field. SymTensor stores (11, 22, 33, 12, 13, 23);
/// Tensor stores all nine entries row-major.
enum class FieldKind { Scalar, Vector, Tensor, SymTensor };

int components_of(FieldKind kind);

inline constexpr int kSymIndex[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
inline constexpr int kSymRow[6] = {0, 1, 2, 0, 0, 1};
inline constexpr int kSymCol[6] = {0, 1, 2, 1, 2, 2};
/// Multiplicity of each stored symmetric component in the full Frobenius norm.
inline constexpr double kSymWeight[6] = {1.0, 1.0, 1.0, 2.0, 2.0, 2.0};

/// Real samples on the grid, components stored as contiguous blocks.
struct PhysicalField {
    Grid grid;
    int components = 0;
    std::vector<double> data;

    PhysicalField() = default;
    PhysicalField(const Grid& g, int ncomp)
        : grid(g), components(ncomp), data(g.points() * std::size_t(ncomp), 0.0)
    {
    }

    std::span<double> component(int c)
    {
        return {data.data() + std::size_t(c) * grid.points(), grid.points()};
    }
    std::span<const double> component(int c) const
    {
        return {data.data() + std::size_t(c) * grid.points(), grid.points()};
    }
    double& at(int c, std::size_t p) { return data[std::size_t(c) * grid.points() + p]; }
    double at(int c, std::size_t p) const { return data[std::size_t(c) * grid.points() + p]; }
};

/// Fourier-series coefficients on the full n^3 spectral layout.
struct SpectralField {
    Grid grid;
    int components = 0;
    std::vector<Complex> data;

    SpectralField() = default;
    SpectralField(const Grid& g, int ncomp)
        : grid(g), components(ncomp), data(g.points() * std::size_t(ncomp), Complex{})
    {
    }

    std::span<Complex> component(int c)
    {
        return {data.data() + std::size_t(c) * grid.points(), grid.points()};
    }
    std::span<const Complex> component(int c) const
    {
        return {data.data() + std::size_t(c) * grid.points(), grid.points()};
    }
    Complex& at(int c, std::size_t p) { return data[std::size_t(c) * grid.points() + p]; }
    const Complex& at(int c, std::size_t p) const
    {
        return data[std::size_t(c) * grid.points() + p];
    }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    /// this += s * o
    SpectralField& axpy(double s, const SpectralField& o);
};

SpectralField operator+(SpectralField x, const SpectralField& y);
SpectralField operator-(SpectralField x, const SpectralField& y);
SpectralField operator*(double s, SpectralField x);

/// Three-component divergence-free velocity coefficients.
using SpectralVelocity = SpectralField;
/// Six symmetric stress components in SymTensor order.
using SpectralStress = SpectralField;

/// sqrt(sum |x|^2) over all stored values.
double l2_norm(const SpectralField& f);
double l2_norm(const PhysicalField& f);

/// Frobenius norm summed over grid points, weighting off-diagonal symmetric
/// components twice so it equals the full-tensor norm.
double sym_tensor_norm(const PhysicalField& f);

}  // namespace leslab
