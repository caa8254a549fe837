#include "leslab/io.hpp"

#include "binary_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace leslab::io {

using detail::expect_eof;
using detail::expect_magic;
using detail::read_le;
using detail::write_le;
using detail::write_magic;

namespace {

constexpr std::uint32_t kVersion = 1;

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    return is;
}

void finish(std::ofstream& os, const std::filesystem::path& path)
{
    os.flush();
    if (!os)
        throw std::runtime_error("write failed for " + path.string());
}

void write_complex_payload(std::ostream& os, const SpectralField& f)
{
    for (const Complex& z : f.data) {
        write_le(os, z.real());
        write_le(os, z.imag());
    }
}

void read_complex_payload(std::istream& is, SpectralField& f)
{
    for (Complex& z : f.data) {
        const double re = read_le<double>(is);
        const double im = read_le<double>(is);
        z = Complex(re, im);
    }
}

Grid checked_grid(std::uint32_t n, const std::string& what)
{
    if (n == 0 || n % 2 != 0 || n > 4096)
        throw std::runtime_error(what + ": invalid grid size " + std::to_string(n));
    return Grid(int(n));
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Snapshot& s)
{
    auto os = open_out(path);
    write_magic(os, "LESNAP01");
    write_le(os, kVersion);
    write_le(os, std::uint32_t(s.field.grid.n()));
    write_le(os, std::uint32_t(s.field.components));
    write_le(os, s.time);
    write_complex_payload(os, s.field);
    finish(os, path);
}

Snapshot read_snapshot(const std::filesystem::path& path)
{
    auto is = open_in(path);
    const std::string what = path.string();
    expect_magic(is, "LESNAP01", what);
    if (read_le<std::uint32_t>(is) != kVersion)
        throw std::runtime_error(what + ": unsupported version");
    const Grid g = checked_grid(read_le<std::uint32_t>(is), what);
    const auto comps = read_le<std::uint32_t>(is);
    if (comps == 0 || comps > 9)
        throw std::runtime_error(what + ": invalid component count");
    Snapshot s;
    s.time = read_le<double>(is);
    s.field = SpectralField(g, int(comps));
    read_complex_payload(is, s.field);
    expect_eof(is, what);
    return s;
}

void write_pair(const std::filesystem::path& path, const filtering::SnapshotPair& p)
{
    if (p.u_bar.components != 3 || p.tau.components != 6 || !(p.u_bar.grid == p.tau.grid))
        throw std::invalid_argument("pair must hold a three-component velocity and six-component stress");
    auto os = open_out(path);
    write_magic(os, "LESSFS01");
    write_le(os, kVersion);
    write_le(os, std::uint32_t(p.u_bar.grid.n()));
    write_le(os, p.time);
    write_complex_payload(os, p.u_bar);
    for (double x : p.tau.data)
        write_le(os, x);
    finish(os, path);
}

filtering::SnapshotPair read_pair(const std::filesystem::path& path)
{
    auto is = open_in(path);
    const std::string what = path.string();
    expect_magic(is, "LESSFS01", what);
    if (read_le<std::uint32_t>(is) != kVersion)
        throw std::runtime_error(what + ": unsupported version");
    const Grid g = checked_grid(read_le<std::uint32_t>(is), what);
    filtering::SnapshotPair p;
    p.time = read_le<double>(is);
    p.u_bar = SpectralField(g, 3);
    read_complex_payload(is, p.u_bar);
    p.tau = PhysicalField(g, 6);
    for (double& x : p.tau.data)
        x = read_le<double>(is);
    expect_eof(is, what);
    return p;
}

namespace {

enum : std::uint8_t { kDenseRelu = 0, kDenseIdentity = 1, kLift = 2, kInner = 3, kFinal = 4 };

void write_params(std::ostream& os, const std::vector<double>& p)
{
    for (double x : p)
        write_le(os, x);
}

std::vector<double> read_params(std::istream& is, std::size_t n)
{
    std::vector<double> p(n);
    for (double& x : p)
        x = read_le<double>(is);
    return p;
}

}  // namespace

void write_model(const std::filesystem::path& path, const closures::ClosureModel& m)
{
    auto os = open_out(path);
    write_magic(os, "SGSNET01");
    write_le(os, std::uint8_t(m.variant()));
    if (const auto* g = m.gconv()) {
        write_le(os, std::uint32_t(g->layers().size()));
        for (const auto& l : g->layers()) {
            const auto shape = equiv::shape_of(l.kind);
            write_le(os, std::uint8_t(kLift + std::uint8_t(l.kind)));
            write_le(os, std::uint32_t(shape.in_dim));
            write_le(os, std::uint32_t(shape.out_dim));
            write_le(os, std::uint32_t(l.in_channels));
            write_le(os, std::uint32_t(l.out_channels));
        }
    } else if (const auto* net = m.mlp()) {
        write_le(os, std::uint32_t(net->layers().size()));
        for (const auto& l : net->layers()) {
            write_le(os, l.activation == nn::Activation::Relu ? kDenseRelu : kDenseIdentity);
            write_le(os, std::uint32_t(l.in));
            write_le(os, std::uint32_t(l.out));
            write_le(os, std::uint32_t(1));
            write_le(os, std::uint32_t(1));
        }
    } else {
        write_le(os, std::uint32_t(0));
    }
    write_params(os, m.parameters());
    finish(os, path);
}

closures::ClosureModel read_model(const std::filesystem::path& path, double delta)
{
    auto is = open_in(path);
    const std::string what = path.string();
    expect_magic(is, "SGSNET01", what);
    const auto tag = read_le<std::uint8_t>(is);
    if (tag > std::uint8_t(closures::Variant::Conv))
        throw std::runtime_error(what + ": unknown model variant " + std::to_string(tag));
    const auto variant = closures::Variant(tag);
    const auto count = read_le<std::uint32_t>(is);
    if (count > 64)
        throw std::runtime_error(what + ": implausible layer count");

    struct Header {
        std::uint8_t kind;
        std::uint32_t in, out, cin, cout;
    };
    std::vector<Header> headers(count);
    for (auto& h : headers) {
        h.kind = read_le<std::uint8_t>(is);
        h.in = read_le<std::uint32_t>(is);
        h.out = read_le<std::uint32_t>(is);
        h.cin = read_le<std::uint32_t>(is);
        h.cout = read_le<std::uint32_t>(is);
        if (h.kind > kFinal || h.in == 0 || h.out == 0 || h.in > 100000 || h.out > 100000 || h.cin == 0 ||
            h.cout == 0 || h.cin > 4096 || h.cout > 4096)
            throw std::runtime_error(what + ": invalid layer header");
    }

    try {
        switch (variant) {
        case closures::Variant::NoModel:
        case closures::Variant::Clark: {
            if (count != 0)
                throw std::runtime_error("unexpected layers");
            expect_eof(is, what);
            return closures::ClosureModel::make(variant, delta, 0);
        }
        case closures::Variant::Smagorinsky: {
            if (count != 0)
                throw std::runtime_error("unexpected layers");
            const double cs = read_le<double>(is);
            expect_eof(is, what);
            return closures::ClosureModel::smagorinsky(delta, cs);
        }
        case closures::Variant::Tbnn:
        case closures::Variant::Conv: {
            std::vector<nn::DenseLayer> layers;
            for (const auto& h : headers) {
                if (h.kind > kDenseIdentity)
                    throw std::runtime_error("dense model with group layer");
                nn::DenseLayer l;
                l.in = int(h.in);
                l.out = int(h.out);
                l.activation = h.kind == kDenseRelu ? nn::Activation::Relu : nn::Activation::Identity;
                l.weight = read_params(is, std::size_t(l.in) * l.out);
                l.bias = read_params(is, std::size_t(l.out));
                layers.push_back(std::move(l));
            }
            expect_eof(is, what);
            return closures::ClosureModel::from_mlp(variant, delta, nn::Mlp(std::move(layers)));
        }
        case closures::Variant::GConv: {
            std::vector<nn::GConvLayer> layers;
            for (const auto& h : headers) {
                if (h.kind < kLift)
                    throw std::runtime_error("group model with dense layer");
                nn::GConvLayer l;
                l.kind = equiv::LayerKind(h.kind - kLift);
                const auto shape = equiv::shape_of(l.kind);
                if (int(h.in) != shape.in_dim || int(h.out) != shape.out_dim)
                    throw std::runtime_error("group layer dimensions do not match its kind");
                l.in_channels = int(h.cin);
                l.out_channels = int(h.cout);
                l.theta = read_params(is, std::size_t(l.in_channels) * l.out_channels * shape.rank);
                if (l.kind != equiv::LayerKind::Final)
                    l.bias = read_params(is, std::size_t(l.out_channels));
                layers.push_back(std::move(l));
            }
            expect_eof(is, what);
            return closures::ClosureModel::from_gconv(delta, nn::GConvNet(std::move(layers)));
        }
        }
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(what + ": " + e.what());
    }
    throw std::runtime_error(what + ": unknown model variant");
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::trunc)
{
    if (!out_)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    width_ = header.size();
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells)
{
    if (cells.size() != width_)
        throw std::invalid_argument("CSV row width does not match the header of " + path_.string());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
    if (!out_)
        throw std::runtime_error("write failed for " + path_.string());
}

std::string fmt(double v)
{
    if (std::isnan(v))
        return "NA";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace leslab::io
