#include "leslab/evaluation.hpp"

#include "leslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace leslab::eval {

namespace {

double sym_diff_norm(const PhysicalField& a, const PhysicalField& b)
{
    if (a.components != 6 || b.components != 6 || !(a.grid == b.grid))
        throw std::invalid_argument("expected two six-component fields on one grid");
    double s = 0.0;
    for (int c = 0; c < 6; ++c) {
        const auto x = a.component(c);
        const auto y = b.component(c);
        double e = 0.0;
        for (std::size_t p = 0; p < x.size(); ++p)
            e += (x[p] - y[p]) * (x[p] - y[p]);
        s += kSymWeight[c] * e;
    }
    return std::sqrt(s);
}

double spectral_diff_norm(const SpectralField& a, const SpectralField& b)
{
    if (a.data.size() != b.data.size())
        throw std::invalid_argument("spectral fields differ in shape");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        s += std::norm(a.data[i] - b.data[i]);
    return std::sqrt(s);
}

double mean_of(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / double(v.size());
}

double stddev_of(std::span<const double> v, double mean)
{
    double s = 0.0;
    for (double x : v)
        s += (x - mean) * (x - mean);
    return std::sqrt(s / double(v.size()));
}

EquivarianceErrors summarize(const std::array<double, octa::kOrder>& num,
                             const std::array<double, octa::kOrder>& den)
{
    EquivarianceErrors out;
    bool any = false;
    for (int g = 0; g < octa::kOrder; ++g) {
        if (den[g] > 0.0) {
            out.per_element[g] = num[g] / den[g];
            any = true;
        } else {
            out.per_element[g] = num[g] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            any = any || num[g] != 0.0;
        }
    }
    out.defined = any;
    out.mean = any ? mean_of(out.per_element) : 0.0;
    return out;
}

}  // namespace

double tensor_error(const PhysicalField& m, const PhysicalField& tau)
{
    const double d = sym_tensor_norm(tau);
    if (!(d > 0.0))
        throw std::invalid_argument("reference stress has zero norm");
    return sym_diff_norm(m, tau) / d;
}

double apriori_tensor_error(const closures::ClosureModel& model, std::span<const PhysicalField> vgt,
                            std::span<const PhysicalField> tau)
{
    if (vgt.empty() || vgt.size() != tau.size())
        throw std::invalid_argument("need matching non-empty snapshot sets");
    double s = 0.0;
    for (std::size_t i = 0; i < vgt.size(); ++i)
        s += tensor_error(model.evaluate(vgt[i]), tau[i]);
    return s / double(vgt.size());
}

double solution_error(const SpectralVelocity& s, const SpectralVelocity& u_bar)
{
    const double d = l2_norm(u_bar);
    if (!(d > 0.0))
        throw std::invalid_argument("reference solution has zero norm");
    return spectral_diff_norm(s, u_bar) / d;
}

SolutionErrors aposteriori_solution_error(const sim::LesResult& run, std::span<const double> ref_times,
                                          std::span<const SpectralVelocity> reference)
{
    if (ref_times.size() != reference.size())
        throw std::invalid_argument("reference times and states differ in count");
    SolutionErrors out;
    out.stable = run.stable;
    out.divergence_time = run.divergence_time;
    for (std::size_t i = 0; i < run.states.size(); ++i) {
        if (i >= ref_times.size() || run.times[i] != ref_times[i])
            throw std::invalid_argument("trajectory times do not match the reference times");
        out.times.push_back(run.times[i]);
        out.errors.push_back(solution_error(run.states[i], reference[i]));
    }
    if (run.stable && out.errors.size() == reference.size() && !out.errors.empty())
        out.mean = mean_of(out.errors);
    return out;
}

EquivarianceErrors equivariance_error_prior(const closures::ClosureModel& model, const PhysicalField& vgt)
{
    const PhysicalField m = model.evaluate(vgt);
    std::array<double, octa::kOrder> num{};
    std::array<double, octa::kOrder> den{};
    for (const auto g : octa::enumerate_group()) {
        const PhysicalField gm = octa::act_on_physical_field(g, m, FieldKind::SymTensor);
        const PhysicalField mg = model.evaluate(octa::act_on_physical_field(g, vgt, FieldKind::Tensor));
        PhysicalField zero(mg.grid, 6);
        num[g.index()] = sym_diff_norm(gm, mg);
        den[g.index()] = sym_diff_norm(mg, zero);
    }
    return summarize(num, den);
}

std::optional<EquivarianceErrors> equivariance_error_post(const sim::Closure& closure, const SpectralVelocity& u0,
                                                          double t, const sim::LesOptions& options)
{
    if (!(t > 0.0))
        throw std::invalid_argument("equivariance horizon must be positive");
    std::vector<double> dts;
    sim::LesOptions rec = options;
    rec.record_dt = &dts;
    rec.replay_dt = nullptr;
    const auto base = sim::run_les(closure, u0, 0.0, {t}, rec);
    if (!base.stable)
        return std::nullopt;

    sim::LesOptions rep = options;
    rep.record_dt = nullptr;
    rep.replay_dt = &dts;
    std::array<double, octa::kOrder> num{};
    std::array<double, octa::kOrder> den{};
    for (const auto g : octa::enumerate_group()) {
        const auto run = sim::run_les(closure, octa::act_on_spectral_field(g, u0), 0.0, {t}, rep);
        if (!run.stable)
            return std::nullopt;
        const SpectralVelocity g_s = octa::act_on_spectral_field(g, base.states.back());
        num[g.index()] = spectral_diff_norm(g_s, run.states.back());
        den[g.index()] = l2_norm(run.states.back());
    }
    return summarize(num, den);
}

SpectrumResult energy_spectrum(const SpectralVelocity& u, double nu, double eps)
{
    const std::vector<double> e = sim::shell_energies(u);
    SpectrumResult r;
    r.energy = e;
    r.kappa.resize(e.size());
    std::iota(r.kappa.begin(), r.kappa.end(), 0);
    if (nu > 0.0 && eps > 0.0) {
        r.eta = std::pow(nu * nu * nu / eps, 0.25);
        const double scale = std::pow(eps, -2.0 / 3.0) * std::pow(r.eta, -5.0 / 3.0);
        for (std::size_t k = 0; k < e.size(); ++k) {
            r.kappa_tilde.push_back(double(k) * r.eta);
            r.energy_tilde.push_back(scale * e[k]);
        }
    }
    return r;
}

double kolmogorov_normalized(double kappa_tilde)
{
    return kKolmogorovConstant * std::pow(kappa_tilde, -5.0 / 3.0);
}

PhysicalField dissipation_coefficient(const PhysicalField& m, const PhysicalField& vgt)
{
    if (m.components != 6 || vgt.components != 9 || !(m.grid == vgt.grid))
        throw std::invalid_argument("expected a six-component stress and a nine-component gradient");
    PhysicalField out(m.grid, 1);
    const std::size_t np = m.grid.points();
    for (std::size_t p = 0; p < np; ++p) {
        double s = 0.0;
        for (int c = 0; c < 6; ++c) {
            const int i = kSymRow[c];
            const int j = kSymCol[c];
            const double sij = 0.5 * (vgt.at(3 * i + j, p) + vgt.at(3 * j + i, p));
            s += kSymWeight[c] * m.at(c, p) * sij;
        }
        out.at(0, p) = s;
    }
    return out;
}

double silverman_bandwidth(double sigma, std::size_t n, int dims)
{
    return sigma * std::pow(4.0 / ((dims + 2.0) * double(n)), 1.0 / (dims + 4.0));
}

namespace {

/// Linear binning onto a uniform grid; out-of-window samples are dropped.
void bin_linear(double v, double lo, double dx, int points, std::vector<double>& w, std::size_t stride,
                std::size_t offset, double weight)
{
    const double f = (v - lo) / dx;
    if (!(f >= 0.0) || f > points - 1)
        return;
    const int i = std::min(int(f), points - 2);
    const double t = f - i;
    w[offset + std::size_t(i) * stride] += weight * (1.0 - t);
    w[offset + std::size_t(i + 1) * stride] += weight * t;
}

std::vector<double> gaussian_taps(double h, double dx)
{
    const int half = std::max(1, int(std::ceil(5.0 * h / dx)));
    std::vector<double> taps(std::size_t(2 * half + 1));
    double sum = 0.0;
    for (int j = -half; j <= half; ++j) {
        const double z = j * dx / h;
        taps[std::size_t(j + half)] = std::exp(-0.5 * z * z);
        sum += taps[std::size_t(j + half)];
    }
    /// Discrete normalization: binned mass is conserved on the grid even
    /// when the bandwidth is below the grid spacing.
    for (double& t : taps)
        t /= sum * dx;
    return taps;
}

/// out[i] = sum_j in[i - j] taps[j] along one axis of a row-major array.
void convolve_axis(std::vector<double>& a, int n0, int n1, int axis, const std::vector<double>& taps)
{
    const int half = int(taps.size() / 2);
    std::vector<double> out(a.size(), 0.0);
    const int len = axis == 0 ? n0 : n1;
    for (int i0 = 0; i0 < n0; ++i0)
        for (int i1 = 0; i1 < n1; ++i1) {
            const int i = axis == 0 ? i0 : i1;
            double s = 0.0;
            for (int j = -half; j <= half; ++j) {
                const int src = i - j;
                if (src < 0 || src >= len)
                    continue;
                const std::size_t idx =
                    axis == 0 ? std::size_t(src) * n1 + i1 : std::size_t(i0) * n1 + std::size_t(src);
                s += a[idx] * taps[std::size_t(j + half)];
            }
            out[std::size_t(i0) * n1 + i1] = s;
        }
    a.swap(out);
}

}  // namespace

Density1d kde_1d(std::span<const double> samples, int points, double lo, double hi)
{
    if (samples.size() < 2 || points < 2)
        throw std::invalid_argument("KDE needs at least two samples and two evaluation points");
    const double mu = mean_of(samples);
    const double sigma = stddev_of(samples, mu);
    if (!(sigma > 0.0))
        throw std::invalid_argument("KDE samples have zero variance");
    if (lo == hi) {
        lo = mu - 5.0 * sigma;
        hi = mu + 5.0 * sigma;
    }
    Density1d d;
    d.bandwidth = silverman_bandwidth(sigma, samples.size(), 1);
    const double dx = (hi - lo) / (points - 1);
    d.x.resize(std::size_t(points));
    for (int i = 0; i < points; ++i)
        d.x[std::size_t(i)] = lo + i * dx;
    std::vector<double> w(std::size_t(points), 0.0);
    for (double v : samples)
        bin_linear(v, lo, dx, points, w, 1, 0, 1.0);
    convolve_axis(w, 1, points, 1, gaussian_taps(d.bandwidth, dx));
    for (double& v : w)
        v /= double(samples.size());
    d.density = std::move(w);
    return d;
}

Density2d kde_2d(std::span<const double> xs, std::span<const double> ys, int points, double lo, double hi)
{
    if (xs.size() != ys.size() || xs.size() < 2 || points < 2)
        throw std::invalid_argument("KDE needs matching coordinate arrays with at least two samples");
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    const double sx = stddev_of(xs, mx);
    const double sy = stddev_of(ys, my);
    if (!(sx > 0.0) || !(sy > 0.0))
        throw std::invalid_argument("KDE samples have zero variance");
    Density2d d;
    d.bandwidth_x = silverman_bandwidth(sx, xs.size(), 2);
    d.bandwidth_y = silverman_bandwidth(sy, xs.size(), 2);
    const double dx = (hi - lo) / (points - 1);
    d.x.resize(std::size_t(points));
    for (int i = 0; i < points; ++i)
        d.x[std::size_t(i)] = lo + i * dx;
    d.y = d.x;

    const std::size_t n = std::size_t(points);
    std::vector<double> w(n * n, 0.0);
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const double fx = (xs[s] - lo) / dx;
        if (!(fx >= 0.0) || fx > points - 1)
            continue;
        const int i = std::min(int(fx), points - 2);
        const double t = fx - i;
        bin_linear(ys[s], lo, dx, points, w, 1, std::size_t(i) * n, 1.0 - t);
        bin_linear(ys[s], lo, dx, points, w, 1, std::size_t(i + 1) * n, t);
    }
    convolve_axis(w, points, points, 0, gaussian_taps(d.bandwidth_x, dx));
    convolve_axis(w, points, points, 1, gaussian_taps(d.bandwidth_y, dx));
    for (double& v : w)
        v /= double(xs.size());
    d.density = std::move(w);
    return d;
}

double integrate(const Density1d& d)
{
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < d.x.size(); ++i)
        s += 0.5 * (d.density[i] + d.density[i + 1]) * (d.x[i + 1] - d.x[i]);
    return s;
}

double integrate(const Density2d& d)
{
    const std::size_t nx = d.x.size();
    const std::size_t ny = d.y.size();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < nx; ++i)
        for (std::size_t j = 0; j + 1 < ny; ++j) {
            const double avg = 0.25 * (d.density[i * ny + j] + d.density[(i + 1) * ny + j] +
                                       d.density[i * ny + j + 1] + d.density[(i + 1) * ny + j + 1]);
            s += avg * (d.x[i + 1] - d.x[i]) * (d.y[j + 1] - d.y[j]);
        }
    return s;
}

std::vector<double> subsample(std::span<const double> values, std::size_t limit)
{
    if (limit == 0)
        return {};
    const std::size_t stride = (values.size() + limit - 1) / limit;
    std::vector<double> out;
    out.reserve(values.size() / std::max<std::size_t>(stride, 1) + 1);
    for (std::size_t i = 0; i < values.size(); i += std::max<std::size_t>(stride, 1))
        out.push_back(values[i]);
    return out;
}

std::pair<PhysicalField, PhysicalField> qr_invariants(const PhysicalField& vgt)
{
    if (vgt.components != 9)
        throw std::invalid_argument("velocity gradient must have nine components");
    PhysicalField q(vgt.grid, 1);
    PhysicalField r(vgt.grid, 1);
    const std::size_t np = vgt.grid.points();
    for (std::size_t p = 0; p < np; ++p) {
        Mat3 a;
        for (int c = 0; c < 9; ++c)
            a.a[std::size_t(c)] = vgt.at(c, p);
        const Mat3 a2 = a * a;
        q.at(0, p) = -0.5 * trace(a2);
        r.at(0, p) = -trace(a2 * a) / 3.0;
    }
    return {std::move(q), std::move(r)};
}

double inverse_rms_gradient(const PhysicalField& vgt)
{
    double s = 0.0;
    for (double x : vgt.data)
        s += x * x;
    const double ms = s / double(vgt.grid.points());
    if (!(ms > 0.0))
        throw std::invalid_argument("velocity gradient vanishes identically");
    return 1.0 / std::sqrt(ms);
}

std::vector<std::pair<double, double>> vieillefosse_curve(double q_min, int points)
{
    if (!(q_min < 0.0) || points < 2)
        throw std::invalid_argument("curve needs q_min < 0 and at least two points");
    std::vector<std::pair<double, double>> out;
    for (int sign : {+1, -1})
        for (int i = 0; i < points; ++i) {
            const double q = q_min * (1.0 - double(i) / (points - 1));
            const double r = sign * 2.0 * std::pow(-q / 3.0, 1.5);
            out.emplace_back(q, r);
        }
    return out;
}

std::array<double, 7> contour_levels()
{
    std::array<double, 7> l;
    for (int i = 0; i < 7; ++i)
        l[std::size_t(i)] = std::pow(10.0, -4.0 + 5.0 * i / 6.0);
    return l;
}

}  // namespace leslab::eval
