#include "leslab/simulation.hpp"

#include "leslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace leslab::sim {

void SimConfig::validate() const
{
    const Grid check(n, box_length);
    (void)check;
    if (!(nu > 0.0))
        throw std::invalid_argument("nu must be positive");
    if (!(cfl > 0.0))
        throw std::invalid_argument("cfl must be positive");
    if (!(initial_energy > 0.0))
        throw std::invalid_argument("initial energy must be positive");
    if (forced_shells < 1)
        throw std::invalid_argument("at least one forced shell is required");
    if (warmup_time < 0.0)
        throw std::invalid_argument("warm-up time must be non-negative");
    if (sample_every < 1 || n_snapshots < 1)
        throw std::invalid_argument("sample_every and n_snapshots must be positive");
}

namespace {

int isqrt(int v)
{
    int r = int(std::sqrt(double(v)));
    while (r * r > v)
        --r;
    while ((r + 1) * (r + 1) <= v)
        ++r;
    return r;
}

}  // namespace

int shell_index(const Grid& g, std::size_t p)
{
    return isqrt(spectral::wavenumber_norm2(g, p));
}

std::vector<double> shell_energies(const SpectralVelocity& u)
{
    const Grid& g = u.grid;
    std::vector<double> e(std::size_t(isqrt(3 * (g.n() / 2) * (g.n() / 2))) + 1, 0.0);
    const std::size_t np = g.points();
    for (std::size_t p = 0; p < np; ++p) {
        double a = 0.0;
        for (int c = 0; c < u.components; ++c)
            a += std::norm(u.at(c, p));
        e[std::size_t(shell_index(g, p))] += 0.5 * a;
    }
    return e;
}

SpectralVelocity init_velocity(const Grid& grid, std::uint64_t seed, double e0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    PhysicalField noise(grid, 3);
    for (double& x : noise.data)
        x = normal(rng);

    SpectralVelocity u = spectral::transform_forward(noise);
    spectral::zero_nyquist(u);
    for (int c = 0; c < 3; ++c)
        u.at(c, 0) = Complex{};
    u = spectral::leray_project(u);

    const std::vector<double> e = shell_energies(u);
    std::vector<double> scale(e.size(), 0.0);
    for (std::size_t s = 1; s < e.size(); ++s)
        if (e[s] > 0.0)
            scale[s] = std::sqrt(std::pow(double(s), -5.0 / 3.0) / e[s]);
    const std::size_t np = grid.points();
    for (std::size_t p = 0; p < np; ++p) {
        const double f = scale[std::size_t(shell_index(grid, p))];
        for (int c = 0; c < 3; ++c)
            u.at(c, p) *= f;
    }

    const double total = spectral::kinetic_energy(u);
    u *= std::sqrt(e0 / total);
    return u;
}

double adaptive_dt_from_max(double max_velocity, double spacing, double nu, double cfl)
{
    const bool has_viscous = nu > 0.0;
    if (!(max_velocity > 0.0) && !has_viscous)
        throw std::invalid_argument("adaptive step undefined for zero velocity and zero viscosity");
    double bound = has_viscous ? spacing * spacing / nu : INFINITY;
    if (max_velocity > 0.0)
        bound = std::min(bound, spacing / max_velocity);
    return cfl * bound;
}

double adaptive_dt(const SpectralVelocity& u, double nu, double cfl)
{
    return adaptive_dt_from_max(spectral::max_abs_velocity(u), u.grid.spacing(), nu, cfl);
}

SpectralField rk3_step_spectral(const SpectralField& u0, double dt,
                                const std::function<SpectralField(const SpectralField&)>& rhs_fn)
{
    SpectralField u = u0;
    SpectralField f_prev = rhs_fn(u);
    u.axpy(dt * Wray::gamma[0], f_prev);
    for (int stage = 1; stage < 3; ++stage) {
        SpectralField f = rhs_fn(u);
        u.axpy(dt * Wray::gamma[stage], f);
        u.axpy(dt * Wray::zeta[stage], f_prev);
        f_prev = std::move(f);
    }
    return u;
}

ForcingTargets forcing_targets(const SpectralVelocity& u, int forced_shells)
{
    const std::vector<double> e = shell_energies(u);
    if (forced_shells < 1 || std::size_t(forced_shells) >= e.size())
        throw std::invalid_argument("forced shell count out of range");
    ForcingTargets t;
    t.shell_energy.assign(e.begin() + 1, e.begin() + 1 + forced_shells);
    return t;
}

SpectralVelocity apply_forcing(const SpectralVelocity& u, const ForcingTargets& targets,
                               std::vector<std::string>* warnings)
{
    const int s = int(targets.shell_energy.size());
    const Grid& g = u.grid;
    const std::size_t np = g.points();
    std::vector<double> e(std::size_t(s) + 1, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
        const int k = shell_index(g, p);
        if (k < 1 || k > s)
            continue;
        for (int c = 0; c < u.components; ++c)
            e[std::size_t(k)] += 0.5 * std::norm(u.at(c, p));
    }
    std::vector<double> scale(std::size_t(s) + 1, 1.0);
    for (int k = 1; k <= s; ++k) {
        if (e[std::size_t(k)] > 0.0)
            scale[std::size_t(k)] = std::sqrt(targets.shell_energy[std::size_t(k - 1)] / e[std::size_t(k)]);
        else if (warnings)
            warnings->push_back("forced shell " + std::to_string(k) + " has zero energy; left unchanged");
    }
    SpectralVelocity out = u;
    for (std::size_t p = 0; p < np; ++p) {
        const int k = shell_index(g, p);
        if (k < 1 || k > s)
            continue;
        for (int c = 0; c < u.components; ++c)
            out.at(c, p) *= scale[std::size_t(k)];
    }
    return out;
}

bool is_finite(const SpectralField& f)
{
    return std::all_of(f.data.begin(), f.data.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

namespace {

void progress(long step, double t, double dt, const SpectralVelocity& u)
{
    std::fprintf(stderr, "step=%ld t=%.6f dt=%.6e E=%.6e\n", step, t, dt, spectral::kinetic_energy(u));
}

}  // namespace

void run_dns(const SimConfig& config, const std::function<void(const DnsSnapshot&)>& on_snapshot,
             const std::function<void(const DnsSample&)>& on_sample)
{
    config.validate();
    const Grid grid(config.n, config.box_length);
    SpectralVelocity u = init_velocity(grid, config.seed, config.initial_energy);
    const ForcingTargets targets = forcing_targets(u, config.forced_shells);
    const auto tendency = [&](const SpectralField& v) { return spectral::rhs(v, nullptr, config.nu); };

    long step = 0;
    double t = -config.warmup_time;
    const auto advance = [&](double dt) {
        u = apply_forcing(rk3_step_spectral(u, dt, tendency), targets);
        ++step;
        if (!is_finite(u))
            throw InstabilityError(t + dt, step);
        if (config.progress_every > 0 && step % config.progress_every == 0)
            progress(step, t + dt, dt, u);
    };
    const auto sample = [&] {
        if (on_sample)
            on_sample({t, spectral::kinetic_energy(u), spectral::dissipation_rate(u, config.nu)});
    };

    sample();
    while (t < 0.0) {
        double dt = adaptive_dt(u, config.nu, config.cfl);
        const bool last = dt >= -t;
        if (last)
            dt = -t;
        advance(dt);
        t = last ? 0.0 : t + dt;
        sample();
    }

    long production = 0;
    on_snapshot({t, step, u});
    for (int emitted = 1; emitted < config.n_snapshots;) {
        const double dt = adaptive_dt(u, config.nu, config.cfl);
        advance(dt);
        t += dt;
        sample();
        if (++production % config.sample_every == 0) {
            on_snapshot({t, step, u});
            ++emitted;
        }
    }
}

SpectralVelocity les_rhs(const SpectralVelocity& v, const Closure& closure, const LesOptions& opt)
{
    if (!closure)
        return spectral::rhs(v, nullptr, opt.nu);
    const PhysicalField m = closure(spectral::velocity_gradient(v));
    if (m.components != 6 || !(m.grid == v.grid))
        throw std::logic_error("closure must return a six-component stress on the LES grid");
    SpectralStress mh = spectral::transform_forward(m);
    if (opt.truncate_closure)
        mh = spectral::dealias_truncate(mh);
    return spectral::rhs(v, nullptr, opt.nu, &mh);
}

LesResult run_les(const Closure& closure, const SpectralVelocity& v0, double t0,
                  const std::vector<double>& target_times, const LesOptions& options)
{
    if (!std::is_sorted(target_times.begin(), target_times.end()))
        throw std::invalid_argument("target times must be ascending");
    if (!target_times.empty() && target_times.front() < t0)
        throw std::invalid_argument("target times must not precede the start time");

    const ForcingTargets targets = forcing_targets(v0, options.forced_shells);
    const auto tendency = [&](const SpectralField& v) { return les_rhs(v, closure, options); };

    LesResult result;
    SpectralVelocity v = v0;
    double t = t0;
    std::size_t replay_index = 0;
    for (const double target : target_times) {
        while (t < target) {
            double dt;
            if (options.replay_dt) {
                if (replay_index >= options.replay_dt->size())
                    throw std::runtime_error("replayed step sequence exhausted");
                dt = (*options.replay_dt)[replay_index++];
            } else {
                dt = adaptive_dt(v, options.nu, options.cfl);
            }
            const bool last = dt >= target - t;
            if (last)
                dt = target - t;
            if (options.record_dt)
                options.record_dt->push_back(dt);
            v = apply_forcing(rk3_step_spectral(v, dt, tendency), targets);
            ++result.steps;
            t = last ? target : t + dt;
            if (!is_finite(v)) {
                result.stable = false;
                result.divergence_time = t;
                return result;
            }
            if (options.progress_every > 0 && result.steps % options.progress_every == 0)
                progress(result.steps, t, dt, v);
        }
        result.times.push_back(target);
        result.states.push_back(v);
    }
    return result;
}

}  // namespace leslab::sim
