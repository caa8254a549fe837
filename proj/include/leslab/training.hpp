#pragma once

#include "leslab/closures.hpp"
#include "leslab/fields.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace leslab::training {

struct TrainConfig {
    int epochs = 5;
    int batch_size = 10;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Bias-corrected first and second moments.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               const TrainConfig& config);

/// Network input and target of one snapshot.
struct Sample {
    double time = 0.0;
    PhysicalField vgt;  ///< nine-component velocity gradient of u_bar
    PhysicalField tau;  ///< deviatoric SFS
};

struct LossRecord {
    int batch;  ///< global batch counter
    int epoch;
    double loss;
};

struct TrainResult {
    std::vector<LossRecord> history;
    double first_epoch_mean = 0.0;
    double final_epoch_mean = 0.0;
};

class NonFiniteLoss : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per epoch, shuffle the samples with a seeded generator and step Adam on
/// consecutive mini-batches (the last one may be smaller).
TrainResult train(closures::ClosureModel& model, std::span<const Sample> samples, const TrainConfig& config,
                  const std::function<void(const LossRecord&)>& on_batch = {});

double epoch_mean(const std::vector<LossRecord>& history, int epoch);

}  // namespace leslab::training
