#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "network.hpp"
#include "sampler.hpp"

namespace innie {

struct TrainSettings {
    int epochs = 2;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double dist_cap = 10.0;
    double distance_weight = 1.0;
    double fraction = 1.0;  // recorded in the report; the plan already applies it
    bool augment = true;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct EpochStats {
    int epoch = 0;
    double class_loss = 0;     // mean per sample
    double distance_loss = 0;  // mean per sample, lambda included
    double seconds = 0;
};

/// Training budget bookkeeping: T = E * N samples shown, N = round(F * M),
/// and EF is reported as T / M.
struct TrainReport {
    std::vector<EpochStats> epochs;
    int epoch_count = 0;        // E
    double fraction = 0;        // F
    std::size_t available = 0;  // M
    std::size_t plan_size = 0;  // N
    std::size_t steps = 0;      // T, samples that contributed gradients
    double ef = 0;              // T / M
    std::size_t optimizer_steps = 0;
    double seconds = 0;
};

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive-moment optimizer (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam {
public:
    Adam(std::size_t size, double learning_rate);
    void step(std::span<float> params, std::span<const float> grad);
    std::size_t steps() const noexcept { return t_; }

private:
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    std::size_t t_ = 0;
    std::vector<float> m_, v_;
};

/// Called after each epoch.
using EpochCallback = std::function<void(const EpochStats&, const TrainReport&)>;

/// Minibatch training over the plan. Each batch is cut into a fixed number of
/// gradient shards reduced in a fixed order, so results do not depend on the
/// thread count.
TrainReport train_network(Network<float>& net, const SamplePlan& plan, const TrainingSet& set,
                          const TrainSettings& settings, const EpochCallback& on_epoch = {});

}  // namespace innie
