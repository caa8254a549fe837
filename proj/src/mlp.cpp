#include "leslab/mlp.hpp"

#include "leslab/simd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leslab::nn {

Mlp::Mlp(const std::vector<int>& widths, std::mt19937_64& rng)
{
    if (widths.size() < 2)
        throw std::invalid_argument("a network needs at least input and output widths");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer layer;
        layer.in = widths[l];
        layer.out = widths[l + 1];
        layer.activation = l + 2 < widths.size() ? Activation::Relu : Activation::Identity;
        const double bound = 1.0 / std::sqrt(double(layer.in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        layer.weight.resize(std::size_t(layer.in) * layer.out);
        for (double& w : layer.weight)
            w = dist(rng);
        layer.bias.assign(std::size_t(layer.out), 0.0);
        layers_.push_back(std::move(layer));
    }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers))
{
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weight.size() != std::size_t(layer.in) * layer.out ||
            layer.bias.size() != std::size_t(layer.out))
            throw std::invalid_argument("dense layer parameter size mismatch");
        if (l > 0 && layers_[l - 1].out != layer.in)
            throw std::invalid_argument("dense layer widths do not chain");
    }
}

std::size_t Mlp::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& l : layers_)
        n += l.parameter_count();
    return n;
}

std::vector<double> Mlp::parameters() const
{
    std::vector<double> p;
    p.reserve(parameter_count());
    for (const auto& l : layers_) {
        p.insert(p.end(), l.weight.begin(), l.weight.end());
        p.insert(p.end(), l.bias.begin(), l.bias.end());
    }
    return p;
}

void Mlp::set_parameters(std::span<const double> p)
{
    if (p.size() != parameter_count())
        throw std::invalid_argument("parameter vector has wrong length");
    std::size_t o = 0;
    for (auto& l : layers_) {
        std::copy_n(p.begin() + std::ptrdiff_t(o), l.weight.size(), l.weight.begin());
        o += l.weight.size();
        std::copy_n(p.begin() + std::ptrdiff_t(o), l.bias.size(), l.bias.begin());
        o += l.bias.size();
    }
}

void Mlp::forward(std::size_t rows, const double* x, double* y) const
{
    const auto& k = simd::active();
    std::vector<double> cur(x, x + rows * std::size_t(input_dim()));
    std::vector<double> next;
    for (const auto& l : layers_) {
        next.resize(rows * std::size_t(l.out));
        k.gemm_nn(rows, std::size_t(l.in), std::size_t(l.out), cur.data(), l.weight.data(),
                  l.bias.data(), next.data());
        if (l.activation == Activation::Relu)
            k.relu(next.size(), next.data(), next.data());
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), y);
}

void Mlp::forward(std::size_t rows, const double* x, double* y, Tape& tape) const
{
    const auto& k = simd::active();
    tape.rows = rows;
    tape.inputs.resize(layers_.size());
    tape.pre.resize(layers_.size());
    tape.inputs[0].assign(x, x + rows * std::size_t(input_dim()));
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const auto& l = layers_[li];
        auto& z = tape.pre[li];
        z.resize(rows * std::size_t(l.out));
        k.gemm_nn(rows, std::size_t(l.in), std::size_t(l.out), tape.inputs[li].data(),
                  l.weight.data(), l.bias.data(), z.data());
        double* dst = li + 1 < layers_.size() ? nullptr : y;
        if (!dst) {
            tape.inputs[li + 1].resize(z.size());
            dst = tape.inputs[li + 1].data();
        }
        if (l.activation == Activation::Relu)
            k.relu(z.size(), z.data(), dst);
        else
            std::copy(z.begin(), z.end(), dst);
    }
}

void Mlp::backward(const Tape& tape, std::vector<double>& dy, std::span<double> grad, double* dx) const
{
    if (grad.size() != parameter_count())
        throw std::invalid_argument("gradient buffer has wrong length");
    const auto& k = simd::active();
    const std::size_t rows = tape.rows;
    const std::vector<double> ones(rows, 1.0);

    std::vector<std::size_t> offset(layers_.size());
    std::size_t o = 0;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        offset[li] = o;
        o += layers_[li].parameter_count();
    }

    std::vector<double> g = std::move(dy);
    std::vector<double> g_prev;
    std::vector<double> wt;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const auto& l = layers_[li];
        if (l.activation == Activation::Relu)
            k.relu_backward(g.size(), tape.pre[li].data(), g.data());
        double* gw = grad.data() + offset[li];
        double* gb = gw + l.weight.size();
        k.gemm_tn_acc(rows, std::size_t(l.in), std::size_t(l.out), tape.inputs[li].data(), g.data(), gw);
        k.gemm_tn_acc(rows, 1, std::size_t(l.out), ones.data(), g.data(), gb);
        if (li == 0 && !dx)
            break;
        wt.resize(l.weight.size());
        for (int i = 0; i < l.in; ++i)
            for (int j = 0; j < l.out; ++j)
                wt[std::size_t(j) * l.in + i] = l.weight[std::size_t(i) * l.out + j];
        g_prev.resize(rows * std::size_t(l.in));
        k.gemm_nn(rows, std::size_t(l.out), std::size_t(l.in), g.data(), wt.data(), nullptr, g_prev.data());
        g.swap(g_prev);
    }
    if (dx)
        std::copy(g.begin(), g.end(), dx);
}

namespace {

int regular_dim(equiv::LayerKind kind)
{
    return kind == equiv::LayerKind::Final ? equiv::shape_of(kind).in_dim : equiv::shape_of(kind).out_dim;
}

}  // namespace

GConvNet::GConvNet(int channels, int inner_layers, std::mt19937_64& rng)
{
    if (channels < 1 || inner_layers < 0)
        throw std::invalid_argument("invalid group-convolution architecture");
    std::vector<equiv::LayerKind> kinds{equiv::LayerKind::Lift};
    for (int i = 0; i < inner_layers; ++i)
        kinds.push_back(equiv::LayerKind::Inner);
    kinds.push_back(equiv::LayerKind::Final);

    for (auto kind : kinds) {
        GConvLayer layer;
        layer.kind = kind;
        layer.in_channels = kind == equiv::LayerKind::Lift ? 1 : channels;
        layer.out_channels = kind == equiv::LayerKind::Final ? 1 : channels;
        const auto shape = equiv::shape_of(kind);
        /// Unit-norm basis columns spread theta over rows*cols entries;
        /// this bound gives entries of the usual 1/sqrt(fan_in) scale.
        const double fan_in = double(shape.in_dim) * layer.in_channels;
        const double bound = std::sqrt(double(shape.size()) / shape.rank) / std::sqrt(fan_in);
        std::uniform_real_distribution<double> dist(-bound, bound);
        layer.theta.resize(std::size_t(layer.in_channels) * layer.out_channels * shape.rank);
        for (double& t : layer.theta)
            t = dist(rng);
        if (kind != equiv::LayerKind::Final)
            layer.bias.assign(std::size_t(layer.out_channels), 0.0);
        layers_.push_back(std::move(layer));
    }
    materialize();
}

GConvNet::GConvNet(std::vector<GConvLayer> layers) : layers_(std::move(layers))
{
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        const auto shape = equiv::shape_of(layer.kind);
        if (layer.theta.size() != std::size_t(layer.in_channels) * layer.out_channels * shape.rank)
            throw std::invalid_argument("group-convolution theta size mismatch");
        const std::size_t nb = layer.kind == equiv::LayerKind::Final ? 0 : std::size_t(layer.out_channels);
        if (layer.bias.size() != nb)
            throw std::invalid_argument("group-convolution bias size mismatch");
        if (l > 0 && layers_[l - 1].out_channels * regular_dim(layers_[l - 1].kind) !=
                         layer.in_channels * shape.in_dim)
            throw std::invalid_argument("group-convolution layers do not chain");
    }
    if (layers_.empty() || layers_.front().kind != equiv::LayerKind::Lift ||
        layers_.back().kind != equiv::LayerKind::Final)
        throw std::invalid_argument("group-convolution net must start with Lift and end with Final");
    materialize();
}

std::size_t GConvNet::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& l : layers_)
        n += l.parameter_count();
    return n;
}

std::vector<double> GConvNet::parameters() const
{
    std::vector<double> p;
    p.reserve(parameter_count());
    for (const auto& l : layers_) {
        p.insert(p.end(), l.theta.begin(), l.theta.end());
        p.insert(p.end(), l.bias.begin(), l.bias.end());
    }
    return p;
}

void GConvNet::set_parameters(std::span<const double> p)
{
    if (p.size() != parameter_count())
        throw std::invalid_argument("parameter vector has wrong length");
    std::size_t o = 0;
    for (auto& l : layers_) {
        std::copy_n(p.begin() + std::ptrdiff_t(o), l.theta.size(), l.theta.begin());
        o += l.theta.size();
        std::copy_n(p.begin() + std::ptrdiff_t(o), l.bias.size(), l.bias.begin());
        o += l.bias.size();
    }
    materialize();
}

void GConvNet::materialize()
{
    std::vector<DenseLayer> dense;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const auto& l = layers_[li];
        const auto shape = equiv::shape_of(l.kind);
        const auto& basis = equiv::cached_shared_basis(l.kind);
        DenseLayer d;
        d.in = l.in_channels * shape.in_dim;
        d.out = l.out_channels * shape.out_dim;
        d.activation = l.kind == equiv::LayerKind::Final ? Activation::Identity : Activation::Relu;
        d.weight.assign(std::size_t(d.in) * d.out, 0.0);
        for (int co = 0; co < l.out_channels; ++co)
            for (int ci = 0; ci < l.in_channels; ++ci) {
                const std::span<const double> th(
                    l.theta.data() + (std::size_t(co) * l.in_channels + ci) * shape.rank, std::size_t(shape.rank));
                const auto block = equiv::expand(basis, th);
                for (int a = 0; a < shape.out_dim; ++a)
                    for (int b = 0; b < shape.in_dim; ++b)
                        d.weight[std::size_t(ci * shape.in_dim + b) * d.out + co * shape.out_dim + a] =
                            block[std::size_t(a) * shape.in_dim + b];
            }
        d.bias.assign(std::size_t(d.out), 0.0);
        if (!l.bias.empty())
            for (int co = 0; co < l.out_channels; ++co)
                for (int a = 0; a < shape.out_dim; ++a)
                    d.bias[std::size_t(co) * shape.out_dim + a] = l.bias[std::size_t(co)];
        dense.push_back(std::move(d));
    }
    dense_ = Mlp(std::move(dense));
}

void GConvNet::pull_back(std::span<const double> dense_grad, std::span<double> grad) const
{
    if (dense_grad.size() != dense_.parameter_count() || grad.size() != parameter_count())
        throw std::invalid_argument("gradient buffer has wrong length");
    std::size_t od = 0;
    std::size_t og = 0;
    std::vector<double> block;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const auto& l = layers_[li];
        const auto& d = dense_.layers()[li];
        const auto shape = equiv::shape_of(l.kind);
        const auto& basis = equiv::cached_shared_basis(l.kind);
        block.resize(std::size_t(shape.size()));
        for (int co = 0; co < l.out_channels; ++co)
            for (int ci = 0; ci < l.in_channels; ++ci) {
                for (int a = 0; a < shape.out_dim; ++a)
                    for (int b = 0; b < shape.in_dim; ++b)
                        block[std::size_t(a) * shape.in_dim + b] =
                            dense_grad[od + std::size_t(ci * shape.in_dim + b) * d.out + co * shape.out_dim + a];
                const auto th = equiv::contract(basis, block);
                double* dst = grad.data() + og + (std::size_t(co) * l.in_channels + ci) * shape.rank;
                for (int r = 0; r < shape.rank; ++r)
                    dst[r] += th[std::size_t(r)];
            }
        od += d.weight.size();
        og += l.theta.size();
        if (!l.bias.empty())
            for (int co = 0; co < l.out_channels; ++co) {
                double s = 0.0;
                for (int a = 0; a < shape.out_dim; ++a)
                    s += dense_grad[od + std::size_t(co) * shape.out_dim + a];
                grad[og + std::size_t(co)] += s;
            }
        od += d.bias.size();
        og += l.bias.size();
    }
}

}  // namespace leslab::nn
