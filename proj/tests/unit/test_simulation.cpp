#include "doctest.h"
#include "helpers.hpp"

#include "leslab/octa_group.hpp"
#include "leslab/simulation.hpp"
#include "leslab/spectral.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

using namespace leslab;
using namespace leslab::sim;

TEST_CASE("initial velocity")
{
    const Grid g(16);
    const auto u = init_velocity(g, 42, 0.2);
    CHECK(spectral::kinetic_energy(u) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(spectral::max_divergence(u) <= 1e-12);
    const auto e = shell_energies(u);
    CHECK(e[0] == 0.0);
    CHECK(e[4] / e[2] == doctest::Approx(std::pow(2.0, -5.0 / 3.0)).epsilon(1e-10));
    CHECK(e[3] / e[1] == doctest::Approx(std::pow(3.0, -5.0 / 3.0)).epsilon(1e-10));
    const auto again = init_velocity(g, 42, 0.2);
    CHECK(test::max_abs_diff(u, again) == 0.0);
    CHECK(test::max_abs_diff(u, init_velocity(g, 43, 0.2)) > 0.0);
    for (std::size_t p = 0; p < g.points(); ++p)
        if (spectral::has_nyquist(g, p))
            for (int c = 0; c < 3; ++c)
                CHECK(u.at(c, p) == Complex{});
}

TEST_CASE("shells partition wavenumbers by Euclidean norm")
{
    const Grid g(8);
    CHECK(shell_index(g, g.linear(0, 0, 0)) == 0);
    CHECK(shell_index(g, g.linear(1, 1, 0)) == 1);
    CHECK(shell_index(g, g.linear(1, 1, 1)) == 1);
    CHECK(shell_index(g, g.linear(2, 0, 0)) == 2);
    CHECK(shell_index(g, g.linear(2, 2, 1)) == 3);
    CHECK(shell_index(g, g.linear(7, 0, 0)) == 1);
}

TEST_CASE("adaptive time step")
{
    CHECK(adaptive_dt_from_max(2.0, 0.1, 0.01, 0.35) == doctest::Approx(0.0175).epsilon(1e-15));
    CHECK(adaptive_dt_from_max(4.0, 0.1, 0.01, 0.35) == doctest::Approx(0.00875).epsilon(1e-15));
    CHECK(adaptive_dt_from_max(2.0, 0.1, 10.0, 0.35) == doctest::Approx(0.35 * 0.001).epsilon(1e-15));
    CHECK(adaptive_dt_from_max(0.0, 0.1, 0.01, 0.35) == doctest::Approx(0.35).epsilon(1e-15));
    const Grid g(8);
    CHECK(adaptive_dt(SpectralVelocity(g, 3), 0.01, 0.35) ==
          doctest::Approx(0.35 * g.spacing() * g.spacing() / 0.01));
}

TEST_CASE("RK3 is third order")
{
    const std::complex<double> lambda(-1.0, 2.0);
    const auto err = [&](double dt) {
        const auto y = rk3_step(std::complex<double>(1.0), dt, [&](const std::complex<double>& y) { return lambda * y; });
        return std::abs(y - std::exp(lambda * dt));
    };
    const double ratio = err(0.02) / err(0.01);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
    CHECK(rk3_step(2.5, 0.1, [](double) { return 0.0; }) == 2.5);
    const double sum = Wray::gamma[0] + Wray::gamma[1] + Wray::gamma[2] + Wray::zeta[1] + Wray::zeta[2];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("spectral RK3 matches the generic template")
{
    const Grid g(8);
    const auto u = init_velocity(g, 1, 0.2);
    const auto f = [](const SpectralField& v) { return spectral::rhs(v, nullptr, 0.01); };
    CHECK(test::max_abs_diff(rk3_step_spectral(u, 0.01, f), rk3_step(u, 0.01, f)) <= 1e-15);
}

TEST_CASE("single-mode viscous decay")
{
    const Grid g(8);
    SpectralVelocity u(g, 3);
    u.at(1, g.linear(2, 0, 0)) = {0.5, 0.0};
    u.at(1, g.linear(6, 0, 0)) = {0.5, 0.0};
    const double nu = 0.05, dt = 0.005;
    const double e0 = spectral::kinetic_energy(u);
    double t = 0.0;
    while (t < 0.1 - 1e-12) {
        u = rk3_step_spectral(u, dt, [&](const SpectralField& v) { return spectral::rhs(v, nullptr, nu); });
        t += dt;
    }
    CHECK(std::abs(spectral::kinetic_energy(u) / e0 - std::exp(-2.0 * nu * 4.0 * t)) <= 1e-6);
}

TEST_CASE("shell forcing")
{
    const Grid g(16);
    const auto u0 = init_velocity(g, 5, 0.2);
    const auto targets = forcing_targets(u0, 2);
    REQUIRE(targets.shell_energy.size() == 2);
    CHECK(test::max_abs_diff(apply_forcing(u0, targets), u0) == 0.0);

    SpectralVelocity u = u0;
    for (std::size_t p = 0; p < g.points(); ++p)
        if (shell_index(g, p) == 1)
            for (int c = 0; c < 3; ++c)
                u.at(c, p) *= 2.0;
    const auto f = apply_forcing(u, targets);
    for (std::size_t p = 0; p < g.points(); ++p) {
        const int s = shell_index(g, p);
        for (int c = 0; c < 3; ++c) {
            if (s == 1)
                CHECK(std::abs(f.at(c, p) - 0.5 * u.at(c, p)) <= 1e-15);
            else
                CHECK(f.at(c, p) == u.at(c, p));
        }
    }
    const auto e = shell_energies(f);
    CHECK(e[1] == doctest::Approx(targets.shell_energy[0]).epsilon(1e-13));

    SpectralVelocity empty = u0;
    for (std::size_t p = 0; p < g.points(); ++p)
        if (shell_index(g, p) == 2)
            for (int c = 0; c < 3; ++c)
                empty.at(c, p) = {};
    std::vector<std::string> warnings;
    const auto kept = apply_forcing(empty, targets, &warnings);
    CHECK(warnings.size() == 1);
    CHECK(shell_energies(kept)[2] == 0.0);
}

TEST_CASE("DNS run emits the post-warm-up state first and holds forced shells")
{
    SimConfig c;
    c.n = 16;
    c.nu = 0.01;
    c.warmup_time = 0.05;
    c.sample_every = 3;
    c.n_snapshots = 4;
    c.seed = 7;
    std::vector<DnsSnapshot> snaps;
    std::vector<DnsSample> samples;
    run_dns(c, [&](const DnsSnapshot& s) { snaps.push_back(s); }, [&](const DnsSample& s) { samples.push_back(s); });
    REQUIRE(snaps.size() == 4);
    CHECK(snaps[0].time == 0.0);
    CHECK(snaps[1].step - snaps[0].step == 3);
    CHECK(snaps[3].step - snaps[0].step == 9);
    CHECK(samples.front().time < 0.0);
    for (const auto& s : samples) {
        CHECK(std::isfinite(s.energy));
        CHECK(std::isfinite(s.dissipation));
    }
    const auto ref = shell_energies(snaps[0].u);
    for (const auto& s : snaps) {
        const auto e = shell_energies(s.u);
        CHECK(std::abs(e[1] / ref[1] - 1.0) <= 1e-12);
        CHECK(std::abs(e[2] / ref[2] - 1.0) <= 1e-12);
        CHECK(spectral::max_divergence(s.u) <= 1e-12);
    }
    for (std::size_t i = 1; i < snaps.size(); ++i)
        CHECK(snaps[i].time > snaps[i - 1].time);

    SimConfig bad = c;
    bad.n_snapshots = 0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("LES integration lands on targets and replays steps")
{
    const Grid g(16);
    const auto v0 = spectral::dealias_truncate(init_velocity(g, 9, 0.2));
    LesOptions opt;
    opt.nu = 0.01;
    const Closure none;
    const auto r = run_les(none, v0, 0.0, {0.0, 0.05, 0.1}, opt);
    REQUIRE(r.stable);
    REQUIRE(r.states.size() == 3);
    CHECK(test::max_abs_diff(r.states[0], v0) == 0.0);
    CHECK(r.times[2] == 0.1);
    for (const auto& s : r.states)
        CHECK(spectral::max_divergence(s) <= 1e-12);

    std::vector<double> dts;
    opt.record_dt = &dts;
    const auto rec = run_les(none, v0, 0.0, {0.1}, opt);
    CHECK(std::abs(std::accumulate(dts.begin(), dts.end(), 0.0) - 0.1) <= 1e-14);
    opt.record_dt = nullptr;
    opt.replay_dt = &dts;
    const auto rep = run_les(none, v0, 0.0, {0.1}, opt);
    CHECK(test::max_abs_diff(rec.states.back(), rep.states.back()) == 0.0);

    const auto g5 = octa::GroupElement::from_flat(17);
    const auto rg = run_les(none, octa::act_on_spectral_field(g5, v0), 0.0, {0.1}, opt);
    const auto lhs = octa::act_on_spectral_field(g5, rec.states.back());
    CHECK(test::max_abs_diff(lhs, rg.states.back()) <= 1e-12 * test::max_abs(lhs));

    const Closure blow_up = [](const PhysicalField& a) {
        PhysicalField m(a.grid, 6);
        for (auto& x : m.data)
            x = std::numeric_limits<double>::quiet_NaN();
        return m;
    };
    LesOptions o2;
    const auto bad = run_les(blow_up, v0, 0.0, {0.0, 0.1}, o2);
    CHECK_FALSE(bad.stable);
    CHECK(bad.states.size() == 1);
}
