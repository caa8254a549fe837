#include "doctest.h"
#include "helpers.hpp"

#include "leslab/closures.hpp"
#include "leslab/evaluation.hpp"
#include "leslab/filtering.hpp"
#include "leslab/mlp.hpp"
#include "leslab/octa_group.hpp"
#include "leslab/spectral.hpp"
#include "leslab/simulation.hpp"

#include <cmath>
#include <random>

using namespace leslab;
using namespace leslab::closures;

namespace {

constexpr Variant kTrainable[] = {Variant::Tbnn, Variant::GConv, Variant::Conv};

/// Velocity gradient of a random solenoidal field.
PhysicalField random_vgt(int n, std::uint64_t seed)
{
    return spectral::velocity_gradient(spectral::dealias_truncate(sim::init_velocity(Grid(n), seed, 0.2)));
}

PhysicalField random_tau(const Grid& g, std::uint64_t seed)
{
    auto t = test::random_physical(g, 6, seed);
    filtering::make_deviatoric(t);
    return t;
}

/// Central-difference check of loss_term on a subset of parameters.
void check_gradient(ClosureModel model, const PhysicalField& vgt, const PhysicalField& tau, std::size_t samples)
{
    auto params = model.parameters();
    std::vector<double> grad(params.size(), 0.0);
    model.loss_term(vgt, tau, grad);
    double gmax = 0.0;
    for (double g : grad)
        gmax = std::max(gmax, std::abs(g));
    REQUIRE(gmax > 0.0);
    const auto base_pattern = model.relu_pattern(vgt);

    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
    const double h = 1e-6;
    int failures = 0;
    for (std::size_t s = 0; s < std::min(samples, params.size()); ++s) {
        const std::size_t i = samples >= params.size() ? s : pick(rng);
        const double keep = params[i];
        params[i] = keep + h;
        model.set_parameters(params);
        const double fp = model.loss_term(vgt, tau);
        params[i] = keep - h;
        model.set_parameters(params);
        const double fm = model.loss_term(vgt, tau);
        params[i] = keep;
        const double fd = (fp - fm) / (2 * h);
        const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-4 * gmax});
        if (std::abs(fd - grad[i]) > 1e-4 * scale) {
            // Differences across a relu switch are not derivative estimates.
            auto shifted = params;
            shifted[i] = keep + h;
            model.set_parameters(shifted);
            const bool up = model.relu_pattern(vgt) != base_pattern;
            shifted[i] = keep - h;
            model.set_parameters(shifted);
            const bool down = model.relu_pattern(vgt) != base_pattern;
            if (up || down)
                continue;
            ++failures;
            MESSAGE("parameter " << i << ": analytic " << grad[i] << " vs finite difference " << fd);
        }
    }
    model.set_parameters(params);
    CHECK(failures == 0);
}

}  // namespace

TEST_CASE("variant names")
{
    for (auto v : {Variant::NoModel, Variant::Smagorinsky, Variant::Clark, Variant::Tbnn, Variant::GConv,
                   Variant::Conv})
        CHECK(parse_variant(to_string(v)) == v);
    CHECK(parse_variant("smag") == Variant::Smagorinsky);
    CHECK_THROWS_AS(parse_variant("lstm"), std::invalid_argument);
    CHECK(is_trainable(Variant::Tbnn));
    CHECK_FALSE(is_trainable(Variant::Clark));
}

TEST_CASE("classical closures on hand-worked gradients")
{
    std::array<double, 9> shear{};
    shear[1] = 1.0;
    const auto smag = smagorinsky_point(shear, 1.0, 0.17);
    CHECK(smag[3] == doctest::Approx(-0.0289).epsilon(1e-14));
    CHECK(smag[0] == 0.0);
    const auto clark = clark_point(shear, 1.0);
    CHECK(clark[0] == doctest::Approx(2.0 / 36).epsilon(1e-14));
    CHECK(clark[1] == doctest::Approx(-1.0 / 36).epsilon(1e-14));
    CHECK(clark[2] == doctest::Approx(-1.0 / 36).epsilon(1e-14));
    CHECK(clark[3] == 0.0);
    const std::array<double, 9> zero{};
    for (double x : smagorinsky_point(zero, 1.0, 0.17))
        CHECK(x == 0.0);
    for (double x : clark_point(zero, 1.0))
        CHECK(x == 0.0);

    const auto vgt = random_vgt(8, 1);
    const auto m = ClosureModel::smagorinsky(0.3, 0.17).evaluate(vgt);
    const auto diss = eval::dissipation_coefficient(m, vgt);
    for (double d : diss.data)
        CHECK(d <= 0.0);
}

TEST_CASE("parameter counts")
{
    CHECK(ClosureModel::make(Variant::NoModel, 0.1, 0).parameter_count() == 0);
    CHECK(ClosureModel::make(Variant::Smagorinsky, 0.1, 0).parameter_count() == 1);
    CHECK(ClosureModel::make(Variant::Clark, 0.1, 0).parameter_count() == 0);
    const auto within = [](std::size_t n, double ref) { return std::abs(double(n) / ref - 1.0) <= 0.15; };
    CHECK(within(ClosureModel::make(Variant::Tbnn, 0.1, 0).parameter_count(), 13760));
    CHECK(within(ClosureModel::make(Variant::GConv, 0.1, 0).parameter_count(), 12544));
    CHECK(within(ClosureModel::make(Variant::Conv, 0.1, 0).parameter_count(), 12320));
    CHECK(ClosureModel::make(Variant::Tbnn, 0.1, 0).parameter_count() == 13319);
    CHECK(ClosureModel::make(Variant::Conv, 0.1, 0).parameter_count() == 11946);
    CHECK(ClosureModel::make(Variant::GConv, 0.1, 0).parameter_count() == 11847);
}

TEST_CASE("every model maps zero gradients to zero and returns symmetric deviatoric stress")
{
    const Grid g(4);
    const PhysicalField zero(g, 9);
    const auto vgt = random_vgt(8, 2);
    for (auto v : {Variant::NoModel, Variant::Smagorinsky, Variant::Clark, Variant::Tbnn, Variant::GConv,
                   Variant::Conv}) {
        CAPTURE(to_string(v));
        const auto model = ClosureModel::make(v, 0.4, 3);
        for (double x : model.evaluate(zero).data)
            CHECK(x == 0.0);
        const auto m = model.evaluate(vgt);
        REQUIRE(m.components == 6);
        double worst = 0.0;
        for (std::size_t p = 0; p < m.grid.points(); ++p)
            worst = std::max(worst, std::abs(m.at(0, p) + m.at(1, p) + m.at(2, p)));
        CHECK(worst <= 1e-13 * (1.0 + sym_tensor_norm(m)));

        PhysicalField scaled = vgt;
        for (auto& x : scaled.data)
            x *= 1.7;
        const auto ms = model.evaluate(scaled);
        for (std::size_t i = 0; i < m.data.size(); ++i)
            CHECK(std::abs(ms.data[i] - 2.89 * m.data[i]) <= 1e-12 * (1.0 + std::abs(m.data[i])));
    }
}

TEST_CASE("equivariance of the network closures")
{
    const auto vgt = random_vgt(8, 4);
    for (auto v : {Variant::Tbnn, Variant::GConv, Variant::Clark, Variant::Smagorinsky}) {
        CAPTURE(to_string(v));
        const auto e = eval::equivariance_error_prior(ClosureModel::make(v, 0.4, 5), vgt);
        CHECK(e.defined);
        for (double x : e.per_element)
            CHECK(x <= 1e-12);
    }
    const auto conv = eval::equivariance_error_prior(ClosureModel::make(Variant::Conv, 0.4, 5), vgt);
    CHECK(conv.per_element[0] == 0.0);
    CHECK(conv.per_element[42] == 0.0);
    int large = 0;
    for (int k = 0; k < octa::kOrder; ++k)
        if (k != 0 && k != 42)
            large += conv.per_element[k] > 1e-3;
    CHECK(large >= 40);
    CHECK_FALSE(eval::equivariance_error_prior(ClosureModel::make(Variant::NoModel, 0.4, 5), vgt).defined);
}

TEST_CASE("group-convolution weights stay equivariant after parameter updates")
{
    auto model = ClosureModel::make(Variant::GConv, 0.4, 6);
    auto p = model.parameters();
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (auto& x : p)
        x += 0.1 * n(rng);
    model.set_parameters(p);
    const auto& layers = model.gconv()->layers();
    for (const auto& layer : layers) {
        const auto& basis = equiv::cached_shared_basis(layer.kind);
        for (int co = 0; co < layer.out_channels; ++co)
            for (int ci = 0; ci < layer.in_channels; ++ci) {
                const std::span<const double> theta(layer.theta.data() + (co * layer.in_channels + ci) * basis.cols,
                                                    basis.cols);
                CHECK(equiv::max_commutation_violation(layer.kind, equiv::expand(basis, theta)) <= 1e-12);
            }
    }
    const auto e = eval::equivariance_error_prior(model, random_vgt(8, 7));
    for (double x : e.per_element)
        CHECK(x <= 1e-12);
}

TEST_CASE("Galilean invariance: the mean mode does not change the output")
{
    const Grid g(8);
    auto u = spectral::dealias_truncate(sim::init_velocity(g, 8, 0.2));
    const auto model = ClosureModel::make(Variant::Conv, 0.4, 1);
    const auto a = model.evaluate(spectral::velocity_gradient(u));
    u.at(0, 0) = {0.7, 0.0};
    u.at(2, 0) = {-0.3, 0.0};
    CHECK(test::max_abs_diff(model.evaluate(spectral::velocity_gradient(u)), a) == 0.0);
}

TEST_CASE("loss special values")
{
    const auto vgt = random_vgt(8, 9);
    const auto model = ClosureModel::make(Variant::Tbnn, 0.4, 10);
    const auto m = model.evaluate(vgt);
    CHECK(model.loss_term(vgt, m) == 0.0);
    PhysicalField half = m;
    for (auto& x : half.data)
        x *= 0.5;
    CHECK(model.loss_term(vgt, half) == doctest::Approx(1.0).epsilon(1e-12));
    const auto tau = random_tau(vgt.grid, 11);
    CHECK(ClosureModel::make(Variant::NoModel, 0.4, 0).loss_term(vgt, tau) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS(model.loss_term(vgt, PhysicalField(vgt.grid, 6)));

    const std::vector<PhysicalField> vs{vgt, vgt}, ts{tau, m};
    const double mean = batch_loss(model, vs, ts);
    CHECK(mean == doctest::Approx(0.5 * model.loss_term(vgt, tau)).epsilon(1e-14));
}

TEST_CASE("analytic gradients match central differences")
{
    const auto vgt = random_vgt(4, 12);
    for (auto v : kTrainable) {
        CAPTURE(to_string(v));
        // Target of the same magnitude as the model output keeps the loss
        // well conditioned for differencing.
        const auto model = ClosureModel::make(v, 0.5, 14);
        auto tau = ClosureModel::make(v, 0.5, 15).evaluate(vgt);
        const auto noise = random_tau(vgt.grid, 13);
        const double s = sym_tensor_norm(tau) / sym_tensor_norm(noise);
        for (std::size_t i = 0; i < tau.data.size(); ++i)
            tau.data[i] += 0.5 * s * noise.data[i];
        check_gradient(model, vgt, tau, 400);
    }
}

TEST_CASE("dense network forward and backward")
{
    std::mt19937_64 rng(3);
    nn::Mlp net({3, 5, 2}, rng);
    CHECK(net.parameter_count() == 3 * 5 + 5 + 5 * 2 + 2);
    const std::vector<double> x{0.1, -0.4, 0.9, 1.2, 0.3, -0.8};
    std::vector<double> y(4);
    net.forward(2, x.data(), y.data());
    const auto& l0 = net.layers()[0];
    const auto& l1 = net.layers()[1];
    for (int r = 0; r < 2; ++r) {
        std::vector<double> h(5);
        for (int j = 0; j < 5; ++j) {
            double s = l0.bias[j];
            for (int i = 0; i < 3; ++i)
                s += x[r * 3 + i] * l0.weight[i * 5 + j];
            h[j] = std::max(s, 0.0);
        }
        for (int j = 0; j < 2; ++j) {
            double s = l1.bias[j];
            for (int i = 0; i < 5; ++i)
                s += h[i] * l1.weight[i * 2 + j];
            CHECK(y[r * 2 + j] == doctest::Approx(s).epsilon(1e-14));
        }
    }
    const auto p = net.parameters();
    nn::Mlp copy(std::vector<nn::DenseLayer>(net.layers()));
    copy.set_parameters(p);
    CHECK(copy.parameters() == p);
    CHECK_THROWS(copy.set_parameters(std::vector<double>(p.size() + 1)));
}
