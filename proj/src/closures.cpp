#include "leslab/closures.hpp"

#include "leslab/tensor_basis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace leslab::closures {

std::string_view to_string(Variant v)
{
    switch (v) {
    case Variant::NoModel: return "nomodel";
    case Variant::Smagorinsky: return "smag";
    case Variant::Clark: return "clark";
    case Variant::Tbnn: return "tbnn";
    case Variant::GConv: return "gconv";
    case Variant::Conv: return "conv";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name)
{
    for (auto v : {Variant::NoModel, Variant::Smagorinsky, Variant::Clark, Variant::Tbnn, Variant::GConv,
                   Variant::Conv})
        if (to_string(v) == name)
            return v;
    throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

bool is_trainable(Variant v)
{
    return v == Variant::Tbnn || v == Variant::GConv || v == Variant::Conv;
}

namespace {

using Sym6 = std::array<double, 6>;

constexpr std::size_t kChunk = 512;

int input_width(Variant v)
{
    return v == Variant::Tbnn ? 5 : 9;
}

Sym6 to_sym(const Mat3& m)
{
    Sym6 s;
    for (int c = 0; c < 6; ++c)
        s[c] = m(kSymRow[c], kSymCol[c]);
    return s;
}

void deviatoric_sym(Sym6& s)
{
    const double third = (s[0] + s[1] + s[2]) / 3.0;
    s[0] -= third;
    s[1] -= third;
    s[2] -= third;
}

Mat3 load(std::span<const double, 9> a)
{
    Mat3 m;
    std::copy(a.begin(), a.end(), m.a.begin());
    return m;
}

double frob(std::span<const double, 9> a)
{
    double s = 0.0;
    for (double x : a)
        s += x * x;
    return std::sqrt(s);
}

}  // namespace

Sym6 smagorinsky_point(std::span<const double, 9> a, double delta, double cs)
{
    const auto [s, w] = tensor_basis::split(load(a));
    const double s_mag = std::sqrt(2.0 * contract(s, s));
    Sym6 m = to_sym((-2.0 * (cs * delta) * (cs * delta) * s_mag) * s);
    deviatoric_sym(m);
    return m;
}

Sym6 clark_point(std::span<const double, 9> a, double delta)
{
    const Mat3 am = load(a);
    Sym6 m = to_sym((delta * delta / 12.0) * (am * transpose(am)));
    deviatoric_sym(m);
    return m;
}

ClosureModel ClosureModel::make(Variant v, double delta, std::uint64_t seed, const Architecture& arch)
{
    std::mt19937_64 rng(seed);
    switch (v) {
    case Variant::NoModel:
    case Variant::Clark: {
        ClosureModel m;
        m.variant_ = v;
        m.delta_ = delta;
        return m;
    }
    case Variant::Smagorinsky: return smagorinsky(delta, arch.smagorinsky_constant);
    case Variant::Tbnn: {
        std::vector<int> widths{5};
        widths.insert(widths.end(), std::size_t(arch.tbnn_hidden), arch.tbnn_width);
        widths.push_back(7);
        return from_mlp(v, delta, nn::Mlp(widths, rng));
    }
    case Variant::Conv: {
        std::vector<int> widths{9};
        widths.insert(widths.end(), std::size_t(arch.conv_hidden), arch.conv_width);
        widths.push_back(6);
        return from_mlp(v, delta, nn::Mlp(widths, rng));
    }
    case Variant::GConv: return from_gconv(delta, nn::GConvNet(arch.gconv_channels, arch.gconv_inner, rng));
    }
    throw std::invalid_argument("unknown model variant");
}

ClosureModel ClosureModel::from_mlp(Variant v, double delta, nn::Mlp net)
{
    if (v != Variant::Tbnn && v != Variant::Conv)
        throw std::invalid_argument("dense networks back only the tbnn and conv models");
    const int out = v == Variant::Tbnn ? 7 : 6;
    if (net.input_dim() != input_width(v) || net.output_dim() != out)
        throw std::invalid_argument("network widths do not match the model");
    ClosureModel m;
    m.variant_ = v;
    m.delta_ = delta;
    m.mlp_ = std::move(net);
    return m;
}

ClosureModel ClosureModel::from_gconv(double delta, nn::GConvNet net)
{
    ClosureModel m;
    m.variant_ = Variant::GConv;
    m.delta_ = delta;
    m.gconv_ = std::move(net);
    return m;
}

ClosureModel ClosureModel::smagorinsky(double delta, double cs)
{
    ClosureModel m;
    m.variant_ = Variant::Smagorinsky;
    m.delta_ = delta;
    m.cs_ = cs;
    return m;
}

const nn::Mlp* ClosureModel::mlp() const
{
    if (gconv_)
        return &gconv_->dense();
    return mlp_ ? &*mlp_ : nullptr;
}

std::size_t ClosureModel::parameter_count() const
{
    if (gconv_)
        return gconv_->parameter_count();
    if (mlp_)
        return mlp_->parameter_count();
    return variant_ == Variant::Smagorinsky ? 1 : 0;
}

std::vector<double> ClosureModel::parameters() const
{
    if (gconv_)
        return gconv_->parameters();
    if (mlp_)
        return mlp_->parameters();
    if (variant_ == Variant::Smagorinsky)
        return {cs_};
    return {};
}

void ClosureModel::set_parameters(std::span<const double> p)
{
    if (gconv_)
        gconv_->set_parameters(p);
    else if (mlp_)
        mlp_->set_parameters(p);
    else if (variant_ == Variant::Smagorinsky && p.size() == 1)
        cs_ = p[0];
    else if (!p.empty())
        throw std::invalid_argument("parameter vector has wrong length");
}

namespace {

/// Network input, raw network output and the scatter into the stress for
/// one chunk of points.
struct NetworkStage {
    Variant variant;
    double delta;

    int out_width() const { return variant == Variant::Tbnn ? 7 : variant == Variant::Conv ? 6 : 9; }

    void encode(std::span<const double, 9> a, double norm, double* x) const
    {
        const int nin = input_width(variant);
        if (norm < tensor_basis::kZeroNorm) {
            std::fill(x, x + nin, 0.0);
            return;
        }
        if (variant == Variant::Tbnn) {
            const auto inv = tensor_basis::normalized_invariants(load(a));
            std::copy(inv.begin(), inv.end(), x);
        } else {
            for (int i = 0; i < 9; ++i)
                x[i] = a[std::size_t(i)] / norm;
        }
    }

    /// Stress from network output y; `basis` is filled for TBNN.
    Sym6 decode(std::span<const double, 9> a, double norm, const double* y,
                std::array<Sym6, 7>* basis_out) const
    {
        Sym6 m{};
        if (norm < tensor_basis::kZeroNorm)
            return m;
        const double scale = delta * delta * norm * norm;
        if (variant == Variant::Tbnn) {
            const auto t = tensor_basis::normalized_deviatoric_basis(load(a));
            std::array<Sym6, 7> b;
            for (int k = 0; k < 7; ++k)
                b[k] = to_sym(t[k]);
            for (int k = 0; k < 7; ++k)
                for (int c = 0; c < 6; ++c)
                    m[c] += y[k] * b[k][c];
            if (basis_out)
                *basis_out = b;
        } else if (variant == Variant::Conv) {
            std::copy(y, y + 6, m.begin());
            deviatoric_sym(m);
        } else {
            for (int c = 0; c < 6; ++c)
                m[c] = 0.5 * (y[3 * kSymRow[c] + kSymCol[c]] + y[3 * kSymCol[c] + kSymRow[c]]);
            deviatoric_sym(m);
        }
        for (double& v : m)
            v *= scale;
        return m;
    }

    /// d loss / d y from d loss / d m.
    void decode_backward(double norm, const Sym6& dm, const std::array<Sym6, 7>& basis, double* dy) const
    {
        const int nout = out_width();
        std::fill(dy, dy + nout, 0.0);
        if (norm < tensor_basis::kZeroNorm)
            return;
        const double scale = delta * delta * norm * norm;
        if (variant == Variant::Tbnn) {
            for (int k = 0; k < 7; ++k) {
                double s = 0.0;
                for (int c = 0; c < 6; ++c)
                    s += dm[c] * basis[k][c];
                dy[k] = scale * s;
            }
            return;
        }
        Sym6 d;
        for (int c = 0; c < 6; ++c)
            d[c] = scale * dm[c];
        const double third = (d[0] + d[1] + d[2]) / 3.0;
        for (int c = 0; c < 3; ++c)
            d[c] -= third;
        if (variant == Variant::Conv) {
            std::copy(d.begin(), d.end(), dy);
            return;
        }
        for (int c = 0; c < 6; ++c) {
            const int i = kSymRow[c];
            const int j = kSymCol[c];
            if (i == j) {
                dy[3 * i + i] += d[c];
            } else {
                dy[3 * i + j] += 0.5 * d[c];
                dy[3 * j + i] += 0.5 * d[c];
            }
        }
    }
};

void check_vgt(const PhysicalField& vgt)
{
    if (vgt.components != 9)
        throw std::invalid_argument("velocity gradient must have nine components");
}

std::array<double, 9> gather(const PhysicalField& vgt, std::size_t p)
{
    std::array<double, 9> a;
    for (int c = 0; c < 9; ++c)
        a[std::size_t(c)] = vgt.at(c, p);
    return a;
}

}  // namespace

PhysicalField ClosureModel::evaluate(const PhysicalField& vgt) const
{
    check_vgt(vgt);
    PhysicalField out(vgt.grid, 6);
    const std::size_t np = vgt.grid.points();
    switch (variant_) {
    case Variant::NoModel: return out;
    case Variant::Smagorinsky:
    case Variant::Clark:
        for (std::size_t p = 0; p < np; ++p) {
            const auto a = gather(vgt, p);
            const Sym6 m = variant_ == Variant::Clark ? clark_point(a, delta_) : smagorinsky_point(a, delta_, cs_);
            for (int c = 0; c < 6; ++c)
                out.at(c, p) = m[c];
        }
        return out;
    default: break;
    }

    const NetworkStage stage{variant_, delta_};
    const nn::Mlp& net = *mlp();
    const int nin = input_width(variant_);
    const int nout = stage.out_width();
    std::vector<double> x(kChunk * std::size_t(nin));
    std::vector<double> y(kChunk * std::size_t(nout));
    std::vector<double> norms(kChunk);
    for (std::size_t start = 0; start < np; start += kChunk) {
        const std::size_t rows = std::min(kChunk, np - start);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto a = gather(vgt, start + r);
            norms[r] = frob(a);
            stage.encode(a, norms[r], x.data() + r * std::size_t(nin));
        }
        net.forward(rows, x.data(), y.data());
        for (std::size_t r = 0; r < rows; ++r) {
            const auto a = gather(vgt, start + r);
            const Sym6 m = stage.decode(a, norms[r], y.data() + r * std::size_t(nout), nullptr);
            for (int c = 0; c < 6; ++c)
                out.at(c, start + r) = m[c];
        }
    }
    return out;
}

std::vector<bool> ClosureModel::relu_pattern(const PhysicalField& vgt) const
{
    check_vgt(vgt);
    if (!is_trainable(variant_))
        return {};
    const NetworkStage stage{variant_, delta_};
    const nn::Mlp& net = *mlp();
    const int nin = input_width(variant_);
    const std::size_t np = vgt.grid.points();
    std::vector<double> x(np * std::size_t(nin));
    for (std::size_t p = 0; p < np; ++p) {
        const auto a = gather(vgt, p);
        stage.encode(a, frob(a), x.data() + p * std::size_t(nin));
    }
    std::vector<double> y(np * std::size_t(net.output_dim()));
    nn::Tape tape;
    net.forward(np, x.data(), y.data(), tape);
    std::vector<bool> pattern;
    for (std::size_t l = 0; l < net.layers().size(); ++l)
        if (net.layers()[l].activation == nn::Activation::Relu)
            for (double z : tape.pre[l])
                pattern.push_back(z > 0.0);
    return pattern;
}

double ClosureModel::loss_term(const PhysicalField& vgt, const PhysicalField& tau, std::span<double> grad,
                               double scale) const
{
    check_vgt(vgt);
    if (tau.components != 6 || !(tau.grid == vgt.grid))
        throw std::invalid_argument("target stress must be a six-component field on the same grid");
    const double tnorm2 = std::pow(sym_tensor_norm(tau), 2);
    if (!(tnorm2 > 0.0))
        throw std::invalid_argument("target stress has zero norm");

    const bool want_grad = !grad.empty();
    if (!want_grad || !is_trainable(variant_)) {
        if (want_grad)
            throw std::invalid_argument("model has no trainable parameters");
        const PhysicalField m = evaluate(vgt);
        double s = 0.0;
        for (int c = 0; c < 6; ++c) {
            const auto mc = m.component(c);
            const auto tc = tau.component(c);
            double e = 0.0;
            for (std::size_t p = 0; p < mc.size(); ++p)
                e += (mc[p] - tc[p]) * (mc[p] - tc[p]);
            s += kSymWeight[c] * e;
        }
        return s / tnorm2;
    }
    if (grad.size() != parameter_count())
        throw std::invalid_argument("gradient buffer has wrong length");

    const NetworkStage stage{variant_, delta_};
    const nn::Mlp& net = *mlp();
    std::vector<double> dense_grad(gconv_ ? net.parameter_count() : 0, 0.0);
    const std::span<double> net_grad = gconv_ ? std::span<double>(dense_grad) : grad;

    const std::size_t np = vgt.grid.points();
    const int nin = input_width(variant_);
    const int nout = stage.out_width();
    std::vector<double> x(kChunk * std::size_t(nin));
    std::vector<double> y(kChunk * std::size_t(nout));
    std::vector<double> dy;
    std::vector<double> norms(kChunk);
    nn::Tape tape;
    double loss = 0.0;
    const double dscale = 2.0 * scale / tnorm2;
    for (std::size_t start = 0; start < np; start += kChunk) {
        const std::size_t rows = std::min(kChunk, np - start);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto a = gather(vgt, start + r);
            norms[r] = frob(a);
            stage.encode(a, norms[r], x.data() + r * std::size_t(nin));
        }
        net.forward(rows, x.data(), y.data(), tape);
        dy.assign(rows * std::size_t(nout), 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t p = start + r;
            const auto a = gather(vgt, p);
            std::array<Sym6, 7> basis{};
            const Sym6 m = stage.decode(a, norms[r], y.data() + r * std::size_t(nout), &basis);
            Sym6 dm;
            for (int c = 0; c < 6; ++c) {
                const double diff = m[c] - tau.at(c, p);
                loss += kSymWeight[c] * diff * diff;
                dm[c] = dscale * kSymWeight[c] * diff;
            }
            stage.decode_backward(norms[r], dm, basis, dy.data() + r * std::size_t(nout));
        }
        net.backward(tape, dy, net_grad, nullptr);
    }
    if (gconv_)
        gconv_->pull_back(dense_grad, grad);
    return loss / tnorm2;
}

double batch_loss(const ClosureModel& model, std::span<const PhysicalField> vgt,
                  std::span<const PhysicalField> tau, std::vector<double>* grad)
{
    if (vgt.empty() || vgt.size() != tau.size())
        throw std::invalid_argument("batch must be non-empty with matching inputs and targets");
    if (grad)
        grad->assign(model.parameter_count(), 0.0);
    const double scale = 1.0 / double(vgt.size());
    double total = 0.0;
    for (std::size_t s = 0; s < vgt.size(); ++s)
        total += model.loss_term(vgt[s], tau[s], grad ? std::span<double>(*grad) : std::span<double>{}, scale);
    return total * scale;
}

}  // namespace leslab::closures
