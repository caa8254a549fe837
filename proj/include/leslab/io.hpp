#pragma once

#include "leslab/closures.hpp"
#include "leslab/fields.hpp"
#include "leslab/filtering.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

/// Binary formats are little-endian with an eight-byte magic.
namespace leslab::io {

struct Snapshot {
    double time = 0.0;
    SpectralField field;
};

/// "LESNAP01", version u32 = 1, n u32, components u32, time f64, then
/// (re, im) f64 pairs with component slowest and k3 fastest.
void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(const std::filesystem::path& path);

/// "LESSFS01", version u32 = 1, les n u32, time f64, u_bar (three spectral
/// components as above), tau (six physical f64 components).
void write_pair(const std::filesystem::path& path, const filtering::SnapshotPair& p);
filtering::SnapshotPair read_pair(const std::filesystem::path& path);

/// "SGSNET01", variant u8, layer count u32, per layer {kind u8, dims u32 x 2,
/// channels u32 x 2}, then f64 parameters in declaration order. Layer kinds:
/// 0 dense relu, 1 dense identity, 2 lift, 3 inner, 4 final. The filter
/// width is not stored; it follows from the LES grid.
void write_model(const std::filesystem::path& path, const closures::ClosureModel& m);
closures::ClosureModel read_model(const std::filesystem::path& path, double delta);

/// Minimal CSV writer: header once, rows of already formatted cells.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t width_ = 0;
};

/// Shortest round-trippable decimal form.
std::string fmt(double v);

}  // namespace leslab::io
