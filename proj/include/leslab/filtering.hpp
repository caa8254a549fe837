#pragma once

#include "leslab/fields.hpp"

#include <vector>

namespace leslab::filtering {

/// Modified Gaussian: G = 1 for |k| < radius, exp(-|xi|^2 Delta^2 / 24)
/// elsewhere, with |k| the integer wavenumber norm.
struct FilterSpec {
    double delta = 0.0;
    int passthrough_radius = 3;

    /// Delta = 4 h on the LES grid.
    static FilterSpec for_les_grid(const Grid& les);
    double kernel(int k_norm2, double k_unit) const;
};

SpectralField apply_filter(const SpectralField& f, const FilterSpec& spec);

/// Keep the modes with every |k_i| <= m/2 - 1 on an m-grid (same box).
SpectralField restrict_to_coarse(const SpectralField& f, int m);
/// Zero-pad a coarse field onto an n-grid.
SpectralField pad_to_fine(const SpectralField& f, int n);

/// restrict(filter(v)) on the m-grid.
SpectralVelocity filtered_velocity(const SpectralVelocity& v, int m, const FilterSpec& spec);

/// restrict(filter(sigma^N_nl(v))) - sigma^M_nl(v_bar), spectral, full trace.
SpectralStress discrete_sfs_spectral(const SpectralVelocity& v, int m, const FilterSpec& spec);

/// Subtract a third of the trace from the diagonal components, pointwise.
void make_deviatoric(PhysicalField& sym);

/// Deviatoric discrete SFS in physical space on the m-grid (six components).
PhysicalField discrete_sfs(const SpectralVelocity& v, int m, const FilterSpec& spec);

/// One training datum.
struct SnapshotPair {
    double time = 0.0;
    SpectralVelocity u_bar;  ///< on the LES grid
    PhysicalField tau;       ///< deviatoric SFS, six components
};

SnapshotPair make_pair(double time, const SpectralVelocity& v, int m, const FilterSpec& spec);

struct Dataset {
    std::vector<SnapshotPair> train;
    std::vector<SnapshotPair> test;
};

/// Chronological split: the first ceil(fraction n) pairs train, the rest test.
Dataset split_dataset(std::vector<SnapshotPair> pairs, double fraction);

struct TimedVelocity {
    double time;
    SpectralVelocity u;
};

/// make_pair per DNS snapshot (in time order) followed by the split.
Dataset build_dataset(const std::vector<TimedVelocity>& snapshots, int m, const FilterSpec& spec,
                      double fraction);

}  // namespace leslab::filtering
