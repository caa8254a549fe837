#pragma once

#include "leslab/closures.hpp"
#include "leslab/fields.hpp"
#include "leslab/octa_group.hpp"
#include "leslab/simulation.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace leslab::eval {

/// ||m - tau|| / ||tau|| with the full-tensor Frobenius norm over the grid.
double tensor_error(const PhysicalField& m, const PhysicalField& tau);

/// Mean tensor error of the model over (vgt, tau) pairs.
double apriori_tensor_error(const closures::ClosureModel& model, std::span<const PhysicalField> vgt,
                            std::span<const PhysicalField> tau);

/// ||s - u|| / ||u|| over all modes.
double solution_error(const SpectralVelocity& s, const SpectralVelocity& u_bar);

struct SolutionErrors {
    std::vector<double> times;
    std::vector<double> errors;  ///< one per reached time
    bool stable = true;
    double divergence_time = 0.0;
    /// Mean over all reference times; empty when the run diverged.
    std::optional<double> mean;
};

SolutionErrors aposteriori_solution_error(const sim::LesResult& run, std::span<const double> ref_times,
                                          std::span<const SpectralVelocity> reference);

struct EquivarianceErrors {
    std::array<double, octa::kOrder> per_element{};
    /// Undefined when every denominator and numerator vanishes (no model).
    bool defined = true;
    double mean = 0.0;
};

/// Per element: ||g m(A) - m(g A)|| / ||m(g A)||, acting on the gradient field.
EquivarianceErrors equivariance_error_prior(const closures::ClosureModel& model, const PhysicalField& vgt);

/// Per element: ||g S_t(u0) - S_t(g u0)|| / ||S_t(g u0)||, replaying the
/// step sequence of the untransformed run. Empty on instability.
std::optional<EquivarianceErrors> equivariance_error_post(const sim::Closure& closure, const SpectralVelocity& u0,
                                                          double t, const sim::LesOptions& options);

struct SpectrumResult {
    std::vector<int> kappa;
    std::vector<double> energy;
    std::vector<double> kappa_tilde;   ///< kappa eta
    std::vector<double> energy_tilde;  ///< eps^(-2/3) eta^(-5/3) E
    double eta = 0.0;
};

/// Shell energies; Kolmogorov scaling when eps > 0 and nu > 0.
SpectrumResult energy_spectrum(const SpectralVelocity& u, double nu = 0.0, double eps = 0.0);

/// Kolmogorov constant used by the model curve.
inline constexpr double kKolmogorovConstant = 1.6;
/// C kappa~^(-5/3): the inertial-range curve under the normalization above.
double kolmogorov_normalized(double kappa_tilde);

/// m_ij S_ij pointwise, S the symmetric part of the gradient.
PhysicalField dissipation_coefficient(const PhysicalField& m, const PhysicalField& vgt);

/// Silverman bandwidth sigma (4 / ((d + 2) n))^(1 / (d + 4)).
double silverman_bandwidth(double sigma, std::size_t n, int dims);

struct Density1d {
    std::vector<double> x;
    std::vector<double> density;
    double bandwidth = 0.0;
};

/// Gaussian KDE on `points` equally spaced values over [lo, hi]; pass
/// lo == hi to use mean +- 5 sigma.
Density1d kde_1d(std::span<const double> samples, int points = 512, double lo = 0.0, double hi = 0.0);

struct Density2d {
    std::vector<double> x;  ///< first coordinate grid
    std::vector<double> y;  ///< second coordinate grid
    std::vector<double> density;  ///< row-major, x index slowest
    double bandwidth_x = 0.0;
    double bandwidth_y = 0.0;
};

/// Gaussian KDE by linear binning on a points x points grid over
/// [lo, hi]^2 followed by a separable Gaussian convolution.
Density2d kde_2d(std::span<const double> xs, std::span<const double> ys, int points = 256, double lo = -10.0,
                 double hi = 10.0);

double integrate(const Density1d& d);
double integrate(const Density2d& d);

/// Uniform-stride subsample to at most `limit` values.
std::vector<double> subsample(std::span<const double> values, std::size_t limit);

/// q = -tr(AA)/2, r = -tr(AAA)/3 pointwise (one component each).
std::pair<PhysicalField, PhysicalField> qr_invariants(const PhysicalField& vgt);

/// 1 / sqrt(mean_x ||A(x)||_F^2) for one snapshot.
double inverse_rms_gradient(const PhysicalField& vgt);

/// Points on (r/2)^2 + (q/3)^3 = 0 for q in [q_min, 0], both branches:
/// r = +-2 (-q/3)^(3/2). Returned as (q, r) pairs, right branch first.
std::vector<std::pair<double, double>> vieillefosse_curve(double q_min, int points);

/// Seven logarithmically spaced contour levels 1e-4 .. 1e1.
std::array<double, 7> contour_levels();

}  // namespace leslab::eval
