#include "leslab/filtering.hpp"

#include "leslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leslab::filtering {

FilterSpec FilterSpec::for_les_grid(const Grid& les)
{
    return {4.0 * les.spacing(), 3};
}

double FilterSpec::kernel(int k_norm2, double k_unit) const
{
    if (k_norm2 < passthrough_radius * passthrough_radius)
        return 1.0;
    const double xi2 = k_unit * k_unit * double(k_norm2);
    return std::exp(-xi2 * delta * delta / 24.0);
}

SpectralField apply_filter(const SpectralField& f, const FilterSpec& spec)
{
    SpectralField out = f;
    const std::size_t np = f.grid.points();
    const double unit = f.grid.k_unit();
    for (std::size_t p = 0; p < np; ++p) {
        const double gk = spec.kernel(spectral::wavenumber_norm2(f.grid, p), unit);
        if (gk == 1.0)
            continue;
        for (int c = 0; c < f.components; ++c)
            out.at(c, p) *= gk;
    }
    return out;
}

namespace {

/// Copy every mode with |k_i| <= half_band on both grids from `from` to `to`.
void copy_band(const SpectralField& from, SpectralField& to, int half_band)
{
    const Grid& a = from.grid;
    const Grid& b = to.grid;
    for (int k1 = -half_band; k1 <= half_band; ++k1)
        for (int k2 = -half_band; k2 <= half_band; ++k2)
            for (int k3 = -half_band; k3 <= half_band; ++k3) {
                const std::size_t pa = a.linear(a.index_of(k1), a.index_of(k2), a.index_of(k3));
                const std::size_t pb = b.linear(b.index_of(k1), b.index_of(k2), b.index_of(k3));
                for (int c = 0; c < from.components; ++c)
                    to.at(c, pb) = from.at(c, pa);
            }
}

}  // namespace

SpectralField restrict_to_coarse(const SpectralField& f, int m)
{
    if (m >= f.grid.n())
        throw std::invalid_argument("coarse grid must be smaller than the fine grid");
    SpectralField out(Grid(m, f.grid.length()), f.components);
    copy_band(f, out, m / 2 - 1);
    return out;
}

SpectralField pad_to_fine(const SpectralField& f, int n)
{
    if (n <= f.grid.n())
        throw std::invalid_argument("fine grid must be larger than the coarse grid");
    SpectralField out(Grid(n, f.grid.length()), f.components);
    copy_band(f, out, f.grid.n() / 2 - 1);
    return out;
}

SpectralVelocity filtered_velocity(const SpectralVelocity& v, int m, const FilterSpec& spec)
{
    return restrict_to_coarse(apply_filter(v, spec), m);
}

SpectralStress discrete_sfs_spectral(const SpectralVelocity& v, int m, const FilterSpec& spec)
{
    SpectralStress fine = restrict_to_coarse(apply_filter(spectral::nonlinear_stress(v), spec), m);
    fine -= spectral::nonlinear_stress(filtered_velocity(v, m, spec));
    return fine;
}

void make_deviatoric(PhysicalField& sym)
{
    if (sym.components != 6)
        throw std::invalid_argument("expected six symmetric components");
    const std::size_t np = sym.grid.points();
    auto a = sym.component(0);
    auto b = sym.component(1);
    auto c = sym.component(2);
    for (std::size_t p = 0; p < np; ++p) {
        const double third = (a[p] + b[p] + c[p]) / 3.0;
        a[p] -= third;
        b[p] -= third;
        c[p] -= third;
    }
}

PhysicalField discrete_sfs(const SpectralVelocity& v, int m, const FilterSpec& spec)
{
    PhysicalField tau = spectral::transform_inverse(discrete_sfs_spectral(v, m, spec));
    make_deviatoric(tau);
    return tau;
}

SnapshotPair make_pair(double time, const SpectralVelocity& v, int m, const FilterSpec& spec)
{
    return {time, filtered_velocity(v, m, spec), discrete_sfs(v, m, spec)};
}

Dataset split_dataset(std::vector<SnapshotPair> pairs, double fraction)
{
    if (pairs.empty())
        throw std::invalid_argument("dataset needs at least one snapshot");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("split fraction must lie in (0, 1]");
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const SnapshotPair& a, const SnapshotPair& b) { return a.time < b.time; });
    const auto n_train = std::min(pairs.size(), std::size_t(std::ceil(fraction * double(pairs.size()) - 1e-9)));
    Dataset d;
    d.train.assign(std::make_move_iterator(pairs.begin()),
                   std::make_move_iterator(pairs.begin() + std::ptrdiff_t(n_train)));
    d.test.assign(std::make_move_iterator(pairs.begin() + std::ptrdiff_t(n_train)),
                  std::make_move_iterator(pairs.end()));
    return d;
}

Dataset build_dataset(const std::vector<TimedVelocity>& snapshots, int m, const FilterSpec& spec,
                      double fraction)
{
    if (snapshots.empty())
        throw std::invalid_argument("no DNS snapshots");
    std::vector<SnapshotPair> pairs;
    pairs.reserve(snapshots.size());
    for (const auto& s : snapshots)
        pairs.push_back(make_pair(s.time, s.u, m, spec));
    return split_dataset(std::move(pairs), fraction);
}

}  // namespace leslab::filtering
