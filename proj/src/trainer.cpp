#include "trainer.hpp"

#include <chrono>
#include <cmath>

#include "log.hpp"
#include "parallel.hpp"

namespace innie {

namespace {

constexpr std::size_t kShards = 8;

struct Shard {
    ParamVector<float> grad;
    std::vector<float> stack;
    WorkspacePtr<float> workspace;
    double class_loss = 0;
    double distance_loss = 0;
    std::size_t samples = 0;
};

}  // namespace

Adam::Adam(std::size_t size, double learning_rate) : lr_(learning_rate), m_(size, 0.0f), v_(size, 0.0f) {}

void Adam::step(std::span<float> params, std::span<const float> grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const float step = static_cast<float>(lr_ / c1);
    const float inv_c2 = static_cast<float>(1.0 / c2);
    const float b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
    const float eps = static_cast<float>(eps_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const float g = grad[i];
        m_[i] = b1 * m_[i] + (1.0f - b1) * g;
        v_[i] = b2 * v_[i] + (1.0f - b2) * g * g;
        params[i] -= step * m_[i] / (std::sqrt(v_[i] * inv_c2) + eps);
    }
}

TrainReport train_network(Network<float>& net, const SamplePlan& plan, const TrainingSet& set,
                          const TrainSettings& settings, const EpochCallback& on_epoch) {
    if (settings.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
    if (plan.entries.empty()) throw std::invalid_argument("training plan is empty");
    if (set.stack_size() != static_cast<std::size_t>(net.architecture().input_size()))
        throw ChannelMismatch("training set scales do not match the network's input channels");

    const auto start = std::chrono::steady_clock::now();
    TrainReport report;
    report.epoch_count = settings.epochs;
    report.fraction = settings.fraction;
    report.available = plan.available;
    report.plan_size = plan.entries.size();

    const std::size_t n_params = net.parameters().size();
    std::vector<Shard> shards(kShards);
    for (auto& s : shards) {
        s.grad.assign(n_params, 0.0f);
        s.stack.assign(set.stack_size(), 0.0f);
        s.workspace = net.make_workspace();
    }
    ParamVector<float> grad(n_params, 0.0f);
    Adam adam(n_params, settings.learning_rate);
    const LossSettings<float> loss{static_cast<float>(settings.dist_cap), static_cast<float>(settings.distance_weight)};

    BatchStream stream(plan, settings.batch_size, settings.augment, settings.seed);
    std::vector<Visit> batch;
    for (int epoch = 0; epoch < settings.epochs; ++epoch) {
        const auto epoch_start = std::chrono::steady_clock::now();
        stream.begin_epoch(epoch);
        double class_sum = 0, distance_sum = 0;
        std::size_t seen = 0;
        while (stream.next(batch)) {
            const std::size_t n = batch.size();
            const float scale = 1.0f / static_cast<float>(n);
            parallel_for(kShards, settings.threads, [&](std::size_t k) {
                Shard& shard = shards[k];
                std::fill(shard.grad.begin(), shard.grad.end(), 0.0f);
                shard.class_loss = shard.distance_loss = 0;
                shard.samples = 0;
                const std::size_t lo = n * k / kShards, hi = n * (k + 1) / kShards;
                for (std::size_t i = lo; i < hi; ++i) {
                    const auto [cls, dist] = set.materialize(plan.entries[batch[i].entry], batch[i].orientation, shard.stack);
                    const auto terms =
                        net.accumulate_gradient(shard.stack, cls, dist, loss, scale, shard.grad, *shard.workspace);
                    shard.class_loss += terms.class_term;
                    shard.distance_loss += terms.distance_term;
                    ++shard.samples;
                }
            });
            std::copy(shards[0].grad.begin(), shards[0].grad.end(), grad.begin());
            for (std::size_t k = 1; k < kShards; ++k) {
                const float* g = shards[k].grad.data();
                for (std::size_t i = 0; i < n_params; ++i) grad[i] += g[i];
            }
            double batch_loss = 0;
            for (const auto& s : shards) {
                class_sum += s.class_loss;
                distance_sum += s.distance_loss;
                batch_loss += s.class_loss + s.distance_loss;
                seen += s.samples;
            }
            if (!std::isfinite(batch_loss))
                throw TrainingDiverged("loss became non-finite in epoch " + std::to_string(epoch + 1) +
                                       "; try a smaller learning_rate");
            adam.step(net.parameters(), grad);
            for (float p : net.parameters())
                if (!std::isfinite(p))
                    throw TrainingDiverged("parameters became non-finite in epoch " + std::to_string(epoch + 1) +
                                           "; try a smaller learning_rate");
        }
        report.steps += seen;
        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.class_loss = class_sum / static_cast<double>(seen);
        stats.distance_loss = distance_sum / static_cast<double>(seen);
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
        report.epochs.push_back(stats);
        if (on_epoch) on_epoch(stats, report);
    }
    report.optimizer_steps = adam.steps();
    report.ef = report.available ? static_cast<double>(report.steps) / static_cast<double>(report.available) : 0.0;
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace innie
