#pragma once

#include "leslab/fields.hpp"

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace leslab::sim {

struct SimConfig {
    int n = 64;                                  ///< DNS points per axis
    double nu = 2e-3;                            ///< kinematic viscosity
    double cfl = 0.35;                           ///< C in the adaptive step
    double box_length = 2.0 * std::numbers::pi;  ///< L
    double initial_energy = 0.2;                 ///< E0
    int forced_shells = 2;                       ///< forcing acts on K(1)..K(s)
    double warmup_time = 1.0;
    int sample_every = 50;   ///< DNS steps between snapshots
    int n_snapshots = 30;
    std::uint64_t seed = 0;
    int progress_every = 0;  ///< 0 disables stderr progress lines

    void validate() const;
};

/// Shell kappa holds wavenumbers with kappa <= |k| < kappa + 1.
int shell_index(const Grid& g, std::size_t linear_index);
/// E(kappa) = sum_{k in K(kappa)} |u(k)|^2 / 2 for kappa = 0..max.
std::vector<double> shell_energies(const SpectralVelocity& u);

/// Gaussian draw, Leray projection, shell normalization to kappa^(-5/3),
/// rescale to total energy e0. Mean and Nyquist modes are zero.
SpectralVelocity init_velocity(const Grid& grid, std::uint64_t seed, double e0);

/// C min(h / max|u_i(x)|, h^2 / nu); the viscous bound alone for u = 0.
double adaptive_dt(const SpectralVelocity& u, double nu, double cfl);
/// Same bound from a precomputed max |u_i(x)|.
double adaptive_dt_from_max(double max_velocity, double spacing, double nu, double cfl);

/// Wray's low-storage three-stage scheme. The five constants are
/// 8/15, 5/12, 3/4 (current stage) and -17/60, -5/12 (previous stage).
struct Wray {
    static constexpr double gamma[3] = {8.0 / 15.0, 5.0 / 12.0, 3.0 / 4.0};
    static constexpr double zeta[3] = {0.0, -17.0 / 60.0, -5.0 / 12.0};
};

/// One RK3 step for any state with State + State and double * State.
template <class State, class Rhs>
State rk3_step(const State& u0, double dt, Rhs&& rhs_fn)
{
    State u = u0;
    State f_prev = rhs_fn(u);
    u = u + (dt * Wray::gamma[0]) * f_prev;
    for (int stage = 1; stage < 3; ++stage) {
        State f = rhs_fn(u);
        u = u + (dt * Wray::gamma[stage]) * f + (dt * Wray::zeta[stage]) * f_prev;
        f_prev = std::move(f);
    }
    return u;
}

/// In-place specialization for spectral fields (two extra registers).
SpectralField rk3_step_spectral(const SpectralField& u0, double dt,
                                const std::function<SpectralField(const SpectralField&)>& rhs_fn);

struct ForcingTargets {
    std::vector<double> shell_energy;  ///< index kappa - 1
};

ForcingTargets forcing_targets(const SpectralVelocity& u, int forced_shells);

/// Rescale shells K(1)..K(s) to their target energies. Shells with zero
/// energy are left unchanged and reported through `warnings`.
SpectralVelocity apply_forcing(const SpectralVelocity& u, const ForcingTargets& targets,
                               std::vector<std::string>* warnings = nullptr);

class InstabilityError : public std::runtime_error {
public:
    InstabilityError(double time, long step)
        : std::runtime_error("non-finite field at t=" + std::to_string(time) +
                             " step=" + std::to_string(step)),
          time_(time), step_(step)
    {
    }
    double time() const { return time_; }
    long step() const { return step_; }

private:
    double time_;
    long step_;
};

bool is_finite(const SpectralField& f);

struct DnsSnapshot {
    double time;  ///< time since the end of warm-up
    long step;  ///< steps taken since initialization, warm-up included
    SpectralVelocity u;
};

struct DnsSample {
    double time;  ///< negative during warm-up
    double energy;
    double dissipation;
};

/// Warm-up then production with snapshots every sample_every steps, the
/// first one being the post-warm-up state. Forcing acts after every full
/// step, warm-up included. Throws InstabilityError on NaN/Inf.
void run_dns(const SimConfig& config, const std::function<void(const DnsSnapshot&)>& on_snapshot,
             const std::function<void(const DnsSample&)>& on_sample = {});

/// Physical stress field (six components) from a nine-component velocity
/// gradient field.
using Closure = std::function<PhysicalField(const PhysicalField&)>;

struct LesOptions {
    double nu = 2e-3;
    double cfl = 0.35;
    int forced_shells = 2;
    /// Dealias-truncate the closure stress before its divergence.
    bool truncate_closure = true;
    /// Record the step sequence, or replay a previously recorded one.
    std::vector<double>* record_dt = nullptr;
    const std::vector<double>* replay_dt = nullptr;
    int progress_every = 0;
};

struct LesResult {
    std::vector<double> times;
    std::vector<SpectralVelocity> states;  ///< one per reached target time
    bool stable = true;
    double divergence_time = 0.0;  ///< time of the first non-finite state
    long steps = 0;
};

/// Closure-augmented resolved-stress tendency on the LES grid.
SpectralVelocity les_rhs(const SpectralVelocity& v, const Closure& closure, const LesOptions& opt);

/// Integrate the LES from (t0, v0) through every target time (ascending,
/// each >= t0), landing exactly on them. The state at t0 itself is returned
/// unchanged when t0 is a target. Non-finite states end the run with
/// stable = false and the states reached so far.
LesResult run_les(const Closure& closure, const SpectralVelocity& v0, double t0,
                  const std::vector<double>& target_times, const LesOptions& options);

}  // namespace leslab::sim
