#pragma once

#include "leslab/weight_projection.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

/// Point-wise networks evaluated on row-major batches (one row per grid
/// point). Matrix products go through the active SIMD kernel table.
namespace leslab::nn {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1 };

/// y = act(x W + b) with W stored in x out row-major.
struct DenseLayer {
    int in = 0;
    int out = 0;
    Activation activation = Activation::Identity;
    std::vector<double> weight;
    std::vector<double> bias;

    std::size_t parameter_count() const { return weight.size() + bias.size(); }
};

/// Intermediate values kept by a training forward pass.
struct Tape {
    std::size_t rows = 0;
    std::vector<std::vector<double>> inputs;  ///< input of every layer
    std::vector<std::vector<double>> pre;     ///< pre-activation of every layer
};

class Mlp {
public:
    Mlp() = default;
    /// Dense stack through `widths`, relu on every hidden layer, identity on
    /// the output. Weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.
    Mlp(const std::vector<int>& widths, std::mt19937_64& rng);
    explicit Mlp(std::vector<DenseLayer> layers);

    int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
    int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
    std::size_t parameter_count() const;
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    /// Flat layout: weight then bias of each layer in order.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> p);

    void forward(std::size_t rows, const double* x, double* y) const;
    void forward(std::size_t rows, const double* x, double* y, Tape& tape) const;
    /// Accumulates d loss / d parameters into `grad` (flat layout) and writes
    /// d loss / d x into `dx` when non-null. `dy` is consumed.
    void backward(const Tape& tape, std::vector<double>& dy, std::span<double> grad, double* dx) const;

private:
    std::vector<DenseLayer> layers_;
};

/// One point-wise group-convolution layer between regular or tensor
/// channels. Each (output channel, input channel) block is expand(theta).
struct GConvLayer {
    equiv::LayerKind kind;
    int in_channels = 1;
    int out_channels = 1;
    std::vector<double> theta;  ///< blocks in (out, in) order, rank values each
    std::vector<double> bias;   ///< one per output regular channel; empty for Final

    int rank() const { return equiv::shape_of(kind).rank; }
    std::size_t parameter_count() const { return theta.size() + bias.size(); }
};

/// Lift 1 -> c, `inner` layers c -> c, Final c -> 1, relu on regular channels.
class GConvNet {
public:
    GConvNet() = default;
    GConvNet(int channels, int inner_layers, std::mt19937_64& rng);
    explicit GConvNet(std::vector<GConvLayer> layers);

    std::size_t parameter_count() const;
    const std::vector<GConvLayer>& layers() const { return layers_; }

    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> p);

    /// Equivalent dense network with materialized equivariant weights.
    const Mlp& dense() const { return dense_; }

    /// Pull a gradient on the dense parameters back to (theta, bias).
    void pull_back(std::span<const double> dense_grad, std::span<double> grad) const;

private:
    void materialize();

    std::vector<GConvLayer> layers_;
    Mlp dense_;
};

}  // namespace leslab::nn
