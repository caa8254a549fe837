#pragma once

#include "leslab/closures.hpp"
#include "leslab/filtering.hpp"
#include "leslab/simulation.hpp"
#include "leslab/training.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace leslab::config {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every tunable of the pipeline with desk-scale defaults.
struct RunConfig {
    sim::SimConfig sim;  ///< sim.n is the DNS grid
    int les_n = 16;
    double filter_width_factor = 4.0;
    double split_fraction = 0.5;
    closures::Variant model = closures::Variant::Tbnn;
    closures::Architecture arch;
    training::TrainConfig train;
    bool truncate_closure = true;
    double equivariance_time = 0.1;
    double aposteriori_turnovers = 1.0;
    std::size_t kde_max_samples = 2000000;
    std::string out_dir = "run";

    RunConfig();
    void validate() const;
    Grid les_grid() const { return Grid(les_n, sim.box_length); }
    filtering::FilterSpec filter_spec() const;
    sim::LesOptions les_options() const;
    void set_seed(std::uint64_t seed);

    /// Round-trippable "key = value" listing of every field.
    std::string to_text() const;
};

/// "key = value" lines, '#' starts a comment, blank lines ignored. Unknown
/// keys, duplicates and malformed values raise ConfigError.
RunConfig parse_text(std::string_view text, RunConfig base = {});
RunConfig parse_file(const std::filesystem::path& path, RunConfig base = {});

}  // namespace leslab::config
