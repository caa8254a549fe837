#include "leslab/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace leslab::training {

void TrainConfig::validate() const
{
    if (epochs < 1 || batch_size < 1)
        throw std::invalid_argument("epochs and batch size must be positive");
    if (!(learning_rate > 0.0) || !(epsilon > 0.0))
        throw std::invalid_argument("learning rate and epsilon must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("Adam betas must lie in [0, 1)");
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               const TrainConfig& config)
{
    if (params.size() != grad.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw std::invalid_argument("Adam buffers have mismatched sizes");
    ++state.step;
    const double c1 = 1.0 - std::pow(config.beta1, double(state.step));
    const double c2 = 1.0 - std::pow(config.beta2, double(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        const double mh = state.m[i] / c1;
        const double vh = state.v[i] / c2;
        params[i] -= config.learning_rate * mh / (std::sqrt(vh) + config.epsilon);
    }
}

double epoch_mean(const std::vector<LossRecord>& history, int epoch)
{
    double s = 0.0;
    int n = 0;
    for (const auto& r : history)
        if (r.epoch == epoch) {
            s += r.loss;
            ++n;
        }
    return n ? s / n : NAN;
}

TrainResult train(closures::ClosureModel& model, std::span<const Sample> samples, const TrainConfig& config,
                  const std::function<void(const LossRecord&)>& on_batch)
{
    config.validate();
    if (!closures::is_trainable(model.variant()))
        throw std::invalid_argument("model " + std::string(closures::to_string(model.variant())) +
                                    " has no trainable network");
    if (samples.empty())
        throw std::invalid_argument("no training samples");

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(samples.size());
    std::vector<double> params = model.parameters();
    std::vector<double> grad;
    AdamState state(params.size());
    std::vector<PhysicalField> vgt;
    std::vector<PhysicalField> tau;

    TrainResult result;
    int batch_counter = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += std::size_t(config.batch_size)) {
            const std::size_t end = std::min(order.size(), start + std::size_t(config.batch_size));
            vgt.clear();
            tau.clear();
            for (std::size_t i = start; i < end; ++i) {
                vgt.push_back(samples[order[i]].vgt);
                tau.push_back(samples[order[i]].tau);
            }
            const double loss = closures::batch_loss(model, vgt, tau, &grad);
            ++batch_counter;
            const bool finite_grad =
                std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); });
            if (!std::isfinite(loss) || !finite_grad)
                throw NonFiniteLoss("non-finite loss or gradient at epoch " + std::to_string(epoch) +
                                    " batch " + std::to_string(batch_counter) + " (loss " +
                                    std::to_string(loss) + ")");
            const LossRecord rec{batch_counter, epoch, loss};
            result.history.push_back(rec);
            if (on_batch)
                on_batch(rec);
            adam_step(params, grad, state, config);
            model.set_parameters(params);
        }
    }
    result.first_epoch_mean = epoch_mean(result.history, 1);
    result.final_epoch_mean = epoch_mean(result.history, config.epochs);
    return result;
}

}  // namespace leslab::training
