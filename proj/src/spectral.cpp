#include "leslab/spectral.hpp"

#include "leslab/simd.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace leslab {

int components_of(FieldKind kind)
{
    switch (kind) {
    case FieldKind::Scalar: return 1;
    case FieldKind::Vector: return 3;
    case FieldKind::Tensor: return 9;
    case FieldKind::SymTensor: return 6;
    }
    return 0;
}

namespace {
void require_same_shape(const SpectralField& a, const SpectralField& b)
{
    if (!(a.grid == b.grid) || a.components != b.components)
        throw std::invalid_argument("spectral field shapes differ");
}
}  // namespace

SpectralField& SpectralField::operator+=(const SpectralField& o)
{
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] += o.data[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o)
{
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] -= o.data[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s)
{
    for (auto& x : data)
        x *= s;
    return *this;
}

SpectralField& SpectralField::axpy(double s, const SpectralField& o)
{
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] += s * o.data[i];
    return *this;
}

SpectralField operator+(SpectralField x, const SpectralField& y) { return x += y; }
SpectralField operator-(SpectralField x, const SpectralField& y) { return x -= y; }
SpectralField operator*(double s, SpectralField x) { return x *= s; }

double l2_norm(const SpectralField& f)
{
    double s = 0.0;
    for (const auto& x : f.data)
        s += std::norm(x);
    return std::sqrt(s);
}

double l2_norm(const PhysicalField& f)
{
    double s = 0.0;
    for (double x : f.data)
        s += x * x;
    return std::sqrt(s);
}

double sym_tensor_norm(const PhysicalField& f)
{
    if (f.components != 6)
        throw std::invalid_argument("symmetric tensor field must have six components");
    double s = 0.0;
    for (int c = 0; c < 6; ++c) {
        double part = 0.0;
        for (double x : f.component(c))
            part += x * x;
        s += kSymWeight[c] * part;
    }
    return std::sqrt(s);
}

namespace spectral {
namespace {

/// One pair of FFTW_ESTIMATE plans per grid size. Estimate mode keeps the
/// plan (and hence the floating-point results) independent of timing.
class FftPlan {
public:
    explicit FftPlan(int n) : n_(n), size_(std::size_t(n) * n * n)
    {
        buffer_ = fftw_alloc_complex(size_);
        forward_ = fftw_plan_dft_3d(n, n, n, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_3d(n, n, n, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~FftPlan()
    {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buffer_);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    void forward(std::span<const double> in, std::span<Complex> out)
    {
        for (std::size_t i = 0; i < size_; ++i) {
            buffer_[i][0] = in[i];
            buffer_[i][1] = 0.0;
        }
        fftw_execute(forward_);
        const double scale = 1.0 / double(size_);
        for (std::size_t i = 0; i < size_; ++i)
            out[i] = Complex(buffer_[i][0] * scale, buffer_[i][1] * scale);
    }

    void inverse(std::span<const Complex> in, std::span<double> out)
    {
        for (std::size_t i = 0; i < size_; ++i) {
            buffer_[i][0] = in[i].real();
            buffer_[i][1] = in[i].imag();
        }
        fftw_execute(backward_);
        for (std::size_t i = 0; i < size_; ++i)
            out[i] = buffer_[i][0];
    }

private:
    int n_;
    std::size_t size_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

std::mutex& plan_mutex()
{
    static std::mutex m;
    return m;
}

FftPlan& plan_for(int n)
{
    static std::map<int, std::unique_ptr<FftPlan>> plans;
    auto& slot = plans[n];
    if (!slot)
        slot = std::make_unique<FftPlan>(n);
    return *slot;
}

/// Per-grid wavenumber data, computed once per grid size.
struct ModeTable {
    std::vector<std::array<int, 3>> effective;  ///< Nyquist components zeroed
    std::vector<unsigned char> nyquist;
    std::vector<unsigned char> band;  ///< inside the two-thirds band
};

const ModeTable& modes(const Grid& g)
{
    static std::mutex m;
    static std::map<int, std::unique_ptr<ModeTable>> tables;
    std::lock_guard lock(m);
    auto& slot = tables[g.n()];
    if (!slot) {
        slot = std::make_unique<ModeTable>();
        const std::size_t np = g.points();
        slot->effective.resize(np);
        slot->nyquist.resize(np);
        slot->band.resize(np);
        for (std::size_t p = 0; p < np; ++p) {
            slot->effective[p] = effective_wavenumber(g, p);
            slot->nyquist[p] = has_nyquist(g, p);
            slot->band[p] = inside_dealias_band(g, p);
        }
    }
    return *slot;
}

/// (i a) z without the generic complex product.
inline Complex times_i(double a, Complex z) { return {-a * z.imag(), a * z.real()}; }

}  // namespace

PhysicalField transform_inverse(const SpectralField& f)
{
    if (f.data.size() != f.grid.points() * std::size_t(f.components))
        throw std::invalid_argument("spectral field size does not match its grid");
    PhysicalField out(f.grid, f.components);
    std::lock_guard lock(plan_mutex());
    FftPlan& plan = plan_for(f.grid.n());
    for (int c = 0; c < f.components; ++c)
        plan.inverse(f.component(c), out.component(c));
    return out;
}

SpectralField transform_forward(const PhysicalField& f)
{
    if (f.data.size() != f.grid.points() * std::size_t(f.components))
        throw std::invalid_argument("physical field size does not match its grid");
    SpectralField out(f.grid, f.components);
    std::lock_guard lock(plan_mutex());
    FftPlan& plan = plan_for(f.grid.n());
    for (int c = 0; c < f.components; ++c)
        plan.forward(f.component(c), out.component(c));
    return out;
}

std::array<int, 3> wavenumber(const Grid& g, std::size_t p)
{
    const int n = g.n();
    const int i3 = int(p % n);
    const int i2 = int((p / n) % n);
    const int i1 = int(p / (std::size_t(n) * n));
    return {g.wavenumber(i1), g.wavenumber(i2), g.wavenumber(i3)};
}

std::array<int, 3> effective_wavenumber(const Grid& g, std::size_t p)
{
    auto k = wavenumber(g, p);
    for (auto& ki : k)
        if (g.is_nyquist(ki))
            ki = 0;
    return k;
}

int wavenumber_norm2(const Grid& g, std::size_t p)
{
    const auto k = wavenumber(g, p);
    return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
}

bool has_nyquist(const Grid& g, std::size_t p)
{
    const auto k = wavenumber(g, p);
    return g.is_nyquist(k[0]) || g.is_nyquist(k[1]) || g.is_nyquist(k[2]);
}

void zero_nyquist(SpectralField& f)
{
    const std::size_t np = f.grid.points();
    const auto& nyq = modes(f.grid).nyquist;
    for (std::size_t p = 0; p < np; ++p)
        if (nyq[p])
            for (int c = 0; c < f.components; ++c)
                f.at(c, p) = Complex{};
}

SpectralField derivative(const SpectralField& f, int axis)
{
    if (axis < 0 || axis > 2)
        throw std::invalid_argument("derivative axis must be 0, 1 or 2");
    SpectralField out(f.grid, f.components);
    const double unit = f.grid.k_unit();
    const std::size_t np = f.grid.points();
    const auto& eff = modes(f.grid).effective;
    for (std::size_t p = 0; p < np; ++p) {
        const double a = unit * eff[p][axis];
        for (int c = 0; c < f.components; ++c)
            out.at(c, p) = times_i(a, f.at(c, p));
    }
    return out;
}

PhysicalField velocity_gradient(const SpectralVelocity& u)
{
    if (u.components != 3)
        throw std::invalid_argument("velocity must have three components");
    SpectralField grad(u.grid, 9);
    const double unit = u.grid.k_unit();
    const std::size_t np = u.grid.points();
    const auto& eff = modes(u.grid).effective;
    for (std::size_t p = 0; p < np; ++p) {
        const auto& k = eff[p];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                grad.at(3 * i + j, p) = times_i(unit * k[j], u.at(i, p));
    }
    return transform_inverse(grad);
}

SpectralField divergence(const SpectralVelocity& u)
{
    if (u.components != 3)
        throw std::invalid_argument("velocity must have three components");
    SpectralField out(u.grid, 1);
    const double unit = u.grid.k_unit();
    const std::size_t np = u.grid.points();
    const auto& eff = modes(u.grid).effective;
    for (std::size_t p = 0; p < np; ++p) {
        const auto& k = eff[p];
        Complex s{};
        for (int j = 0; j < 3; ++j)
            s += times_i(unit * k[j], u.at(j, p));
        out.at(0, p) = s;
    }
    return out;
}

double max_divergence(const SpectralVelocity& u)
{
    const SpectralField d = divergence(u);
    double m = 0.0;
    for (const auto& x : d.data)
        m = std::max(m, std::abs(x));
    return m;
}

SpectralVelocity leray_project(const SpectralVelocity& u)
{
    if (u.components != 3)
        throw std::invalid_argument("velocity must have three components");
    SpectralVelocity out = u;
    const std::size_t np = u.grid.points();
    const auto& eff = modes(u.grid).effective;
    for (std::size_t p = 0; p < np; ++p) {
        const auto& k = eff[p];
        const int k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0)
            continue;
        const Complex kdotu = double(k[0]) * u.at(0, p) + double(k[1]) * u.at(1, p) +
                              double(k[2]) * u.at(2, p);
        const Complex s = kdotu / double(k2);
        for (int i = 0; i < 3; ++i)
            out.at(i, p) -= double(k[i]) * s;
    }
    return out;
}

bool inside_dealias_band(const Grid& g, std::size_t p)
{
    const auto k = wavenumber(g, p);
    const int n = g.n();
    return 3 * std::abs(k[0]) < n && 3 * std::abs(k[1]) < n && 3 * std::abs(k[2]) < n;
}

SpectralField dealias_truncate(const SpectralField& f)
{
    SpectralField out = f;
    const std::size_t np = f.grid.points();
    const auto& band = modes(f.grid).band;
    for (std::size_t p = 0; p < np; ++p)
        if (!band[p])
            for (int c = 0; c < f.components; ++c)
                out.at(c, p) = Complex{};
    return out;
}

SpectralStress nonlinear_stress(const SpectralVelocity& u)
{
    if (u.components != 3)
        throw std::invalid_argument("velocity must have three components");
    const PhysicalField v = transform_inverse(dealias_truncate(u));
    PhysicalField prod(u.grid, 6);
    const auto& k = simd::active();
    const std::size_t np = u.grid.points();
    for (int c = 0; c < 6; ++c)
        k.mul(np, v.component(kSymRow[c]).data(), v.component(kSymCol[c]).data(),
              prod.component(c).data());
    /// Truncating the product as well keeps the convective term exactly
    /// energy-conserving: modes outside the band never feed back.
    return dealias_truncate(transform_forward(prod));
}

SpectralStress numerical_stress(const SpectralVelocity& u, double nu)
{
    SpectralStress s = nonlinear_stress(u);
    if (nu == 0.0)
        return s;
    const double unit = u.grid.k_unit();
    const std::size_t np = u.grid.points();
    const auto& eff = modes(u.grid).effective;
    for (std::size_t p = 0; p < np; ++p) {
        const auto& k = eff[p];
        for (int c = 0; c < 6; ++c) {
            const int i = kSymRow[c];
            const int j = kSymCol[c];
            s.at(c, p) -= nu * (times_i(unit * k[j], u.at(i, p)) + times_i(unit * k[i], u.at(j, p)));
        }
    }
    return s;
}

SpectralVelocity stress_divergence(const SpectralStress& s)
{
    if (s.components != 6)
        throw std::invalid_argument("stress must have six symmetric components");
    SpectralVelocity out(s.grid, 3);
    const double unit = s.grid.k_unit();
    const std::size_t np = s.grid.points();
    const auto& eff = modes(s.grid).effective;
    for (std::size_t p = 0; p < np; ++p) {
        const auto& k = eff[p];
        for (int i = 0; i < 3; ++i) {
            Complex acc{};
            for (int j = 0; j < 3; ++j)
                acc += times_i(unit * k[j], s.at(kSymIndex[i][j], p));
            out.at(i, p) = -acc;
        }
    }
    return out;
}

SpectralVelocity rhs(const SpectralVelocity& u, const SpectralVelocity* force, double nu,
                     const SpectralStress* extra_stress)
{
    SpectralStress sigma = numerical_stress(u, nu);
    if (extra_stress)
        sigma += *extra_stress;
    SpectralVelocity tendency = stress_divergence(sigma);
    if (force)
        tendency += *force;
    SpectralVelocity out = leray_project(tendency);
    zero_nyquist(out);
    return out;
}

double kinetic_energy(const SpectralVelocity& u)
{
    double s = 0.0;
    for (const auto& x : u.data)
        s += std::norm(x);
    return 0.5 * s;
}

double dissipation_rate(const SpectralVelocity& u, double nu)
{
    const double unit = u.grid.k_unit();
    const std::size_t np = u.grid.points();
    double s = 0.0;
    const auto& eff = modes(u.grid).effective;
    for (std::size_t p = 0; p < np; ++p) {
        const auto& k = eff[p];
        const double k2 = unit * unit * double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        double a = 0.0;
        for (int c = 0; c < u.components; ++c)
            a += std::norm(u.at(c, p));
        s += k2 * a;
    }
    return nu * s;
}

double max_abs_velocity(const SpectralVelocity& u)
{
    const PhysicalField v = transform_inverse(u);
    double m = 0.0;
    for (double x : v.data)
        m = std::max(m, std::abs(x));
    return m;
}

}  // namespace spectral
}  // namespace leslab
