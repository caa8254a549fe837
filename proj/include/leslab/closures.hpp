#pragma once

#include "leslab/fields.hpp"
#include "leslab/mlp.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/// The six closure models. Every model maps a nine-component velocity
/// gradient field A_ij = d_j u_i to a symmetric deviatoric stress (six
/// components, physical space) and returns zero where A = 0.
namespace leslab::closures {

enum class Variant : std::uint8_t { NoModel = 0, Smagorinsky = 1, Clark = 2, Tbnn = 3, GConv = 4, Conv = 5 };

std::string_view to_string(Variant v);
/// Accepts the CLI names nomodel, smag, clark, tbnn, gconv, conv.
Variant parse_variant(std::string_view name);
bool is_trainable(Variant v);

struct Architecture {
    int tbnn_width = 64;
    int tbnn_hidden = 4;
    int conv_width = 60;
    int conv_hidden = 4;
    int gconv_channels = 11;
    int gconv_inner = 2;
    double smagorinsky_constant = 0.17;
};

class ClosureModel {
public:
    /// Randomly initialized (networks) or fixed (classical) model.
    static ClosureModel make(Variant v, double delta, std::uint64_t seed, const Architecture& arch = {});
    static ClosureModel from_mlp(Variant v, double delta, nn::Mlp net);
    static ClosureModel from_gconv(double delta, nn::GConvNet net);
    static ClosureModel smagorinsky(double delta, double cs);

    Variant variant() const { return variant_; }
    double delta() const { return delta_; }
    void set_delta(double d) { delta_ = d; }
    double smagorinsky_constant() const { return cs_; }

    const nn::Mlp* mlp() const;
    const nn::GConvNet* gconv() const { return gconv_ ? &*gconv_ : nullptr; }

    /// Trainable scalars: network parameters (free theta for G-conv); one
    /// for Smagorinsky, zero otherwise.
    std::size_t parameter_count() const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> p);

    PhysicalField evaluate(const PhysicalField& vgt) const;

    /// On/off state of every relu unit at every point (empty for classical
    /// models). A change between two parameter vectors means the loss is not
    /// differentiable along the segment joining them.
    std::vector<bool> relu_pattern(const PhysicalField& vgt) const;
    /// ||m - tau||^2 / ||tau||^2 for one snapshot; when `grad` is non-empty,
    /// adds scale * d/dparameters into it (trainable variants only).
    double loss_term(const PhysicalField& vgt, const PhysicalField& tau, std::span<double> grad = {},
                     double scale = 1.0) const;

private:
    Variant variant_ = Variant::NoModel;
    double delta_ = 0.0;
    double cs_ = 0.17;
    std::optional<nn::Mlp> mlp_;
    std::optional<nn::GConvNet> gconv_;
};

/// Point-wise formulas on one 3x3 gradient; m in symmetric storage order.
std::array<double, 6> smagorinsky_point(std::span<const double, 9> a, double delta, double cs);
std::array<double, 6> clark_point(std::span<const double, 9> a, double delta);

/// Mean over snapshots of ||m - tau||^2 / ||tau||^2.
double batch_loss(const ClosureModel& model, std::span<const PhysicalField> vgt,
                  std::span<const PhysicalField> tau, std::vector<double>* grad = nullptr);

}  // namespace leslab::closures
