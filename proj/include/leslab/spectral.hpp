#pragma once

#include "leslab/fields.hpp"

#include <array>

/// Pseudo-spectral machinery on the periodic cube.
///
/// Coefficients are Fourier-series coefficients: a physical field
/// cos(2 pi x_1 / L) has coefficient 1/2 at k = (+-1, 0, 0), so the kinetic
/// energy is sum_k |u(k)|^2 / 2.
///
/// Modes with a Nyquist component (k_i = -n/2) have no well-defined
/// derivative for real fields. Derivatives and projections use the effective
/// wavenumber with Nyquist components set to zero, and the right-hand side
/// zeroes every Nyquist mode.
namespace leslab::spectral {

PhysicalField transform_inverse(const SpectralField& f);
SpectralField transform_forward(const PhysicalField& f);

/// Effective integer wavenumber of a spectral index (Nyquist component -> 0).
std::array<int, 3> effective_wavenumber(const Grid& g, std::size_t linear_index);
/// Signed integer wavenumber of a spectral index, k_i in -n/2..n/2-1.
std::array<int, 3> wavenumber(const Grid& g, std::size_t linear_index);
/// Squared Euclidean norm of the signed wavenumber (integers).
int wavenumber_norm2(const Grid& g, std::size_t linear_index);
bool has_nyquist(const Grid& g, std::size_t linear_index);

/// Multiply every component by xi_axis = 2 pi i k_axis / L.
SpectralField derivative(const SpectralField& f, int axis);

/// Velocity gradient A_ij = d_j u_i as a nine-component physical field.
PhysicalField velocity_gradient(const SpectralVelocity& u);

/// Divergence xi_j u_j (one component).
SpectralField divergence(const SpectralVelocity& u);

/// u - k (k . u) / |k|^2; the mean mode is unchanged.
SpectralVelocity leray_project(const SpectralVelocity& u);

/// Zero modes with max_i |k_i| >= n / 3.
SpectralField dealias_truncate(const SpectralField& f);
bool inside_dealias_band(const Grid& g, std::size_t linear_index);

/// Dealiased quadratic term: truncate(forward(inverse(u~)_i inverse(u~)_j)).
SpectralStress nonlinear_stress(const SpectralVelocity& u);

/// Nonlinear stress minus nu (xi_j u_i + xi_i u_j).
SpectralStress numerical_stress(const SpectralVelocity& u, double nu);

/// -xi_j sigma_ij for a symmetric stress.
SpectralVelocity stress_divergence(const SpectralStress& s);

/// Pressure-free tendency -xi_j pi_ijab sigma_ab + pi_ij f_j, optionally with
/// an additional stress (closure) added to sigma. Nyquist modes are zeroed.
SpectralVelocity rhs(const SpectralVelocity& u, const SpectralVelocity* force, double nu,
                     const SpectralStress* extra_stress = nullptr);

/// sum_k |u(k)|^2 / 2
double kinetic_energy(const SpectralVelocity& u);
/// nu sum_k |xi|^2 |u(k)|^2
double dissipation_rate(const SpectralVelocity& u, double nu);

/// Max over components and grid points of |u_i(x)|.
double max_abs_velocity(const SpectralVelocity& u);

/// Max over modes of |xi_j u_j|.
double max_divergence(const SpectralVelocity& u);

/// Zero every mode with a Nyquist component.
void zero_nyquist(SpectralField& f);

}  // namespace leslab::spectral
