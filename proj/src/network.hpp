#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace innie {

/// Layer table of the per-pixel classifier/regressor.
///
/// Input is `in_channels` patches of 25x25 (one per scale). Each of the three
/// blocks is conv3x3 -> ReLU -> conv3x3 -> ReLU, plus an additive skip from
/// the block input (1x1 projection when widths differ), then 2x2/2 max pooling
/// with floor. Same-padding keeps spatial size through the convolutions, so
/// the map goes 25 -> 12 -> 6 -> 3 and the flattened features are 3x3x96.
/// Four ReLU dense layers follow, then two scalar heads: a class logit
/// (squashed by the logistic function) and a linear distance output.
///
/// Layer count: 6 conv + 3 pool + 4 dense + 2 heads = 15.
struct Architecture {
    static constexpr int kPatch = 25;

    int in_channels = 4;
    std::array<int, 3> block_widths{24, 48, 96};
    std::array<int, 4> dense_widths{256, 128, 64, 32};

    static Architecture reduced(int in_channels) {
        return Architecture{in_channels, {4, 8, 16}, {16, 8, 4, 4}};
    }

    /// Side of the map entering block `b` (b = 3 means after the last pool).
    static constexpr int side_at(int b) {
        int side = kPatch;
        for (int i = 0; i < b; ++i) side /= 2;
        return side;
    }
    int flat_features() const { return block_widths[2] * side_at(3) * side_at(3); }
    int input_size() const { return in_channels * kPatch * kPatch; }

    std::size_t parameter_count() const;
    std::uint64_t fingerprint() const;
    std::string describe() const;
    void validate() const;

    bool operator==(const Architecture&) const = default;
};

/// Feature-map shape (channels, rows, cols) after each stage; used to check
/// the layer table.
struct StageShape {
    std::string name;
    int channels;
    int rows;
    int cols;
};
std::vector<StageShape> stage_shapes(const Architecture& arch);

template <class T>
struct Prediction {
    T class_prob;
    T distance;
    T class_logit;
};

template <class T>
struct LossTerms {
    T class_term = 0;
    T distance_term = 0;
    T total() const { return class_term + distance_term; }
};

template <class T>
struct LossSettings {
    T dist_cap = 10;
    T distance_weight = 1;  // lambda
};

/// Per-sample loss: binary cross-entropy on the class head plus
/// lambda * ((d - t) / cap)^2 on the distance head. Outies train toward 0.
template <class T>
LossTerms<T> sample_loss(const Prediction<T>& pred, T class_target, T distance_target,
                         const LossSettings<T>& settings);

template <class T>
struct Workspace;

template <class T>
struct WorkspaceDeleter {
    void operator()(Workspace<T>* ws) const;
};
template <class T>
using WorkspacePtr = std::unique_ptr<Workspace<T>, WorkspaceDeleter<T>>;

/// Parameter and gradient storage. A fixed base alignment keeps the
/// vectorized kernels on the same path every run.
template <class T>
using ParamVector = std::vector<T, Eigen::aligned_allocator<T>>;

/// Network with flat parameter storage in canonical order: per block conv1
/// W,b, conv2 W,b, projection W (if any); per dense layer W,b; class head W,b;
/// distance head W,b. Weight matrices are column-major (out x in).
///
/// Every forward/backward call processes exactly one sample, so the result
/// for a sample never depends on what else is in its batch.
template <class T>
class Network {
public:
    explicit Network(Architecture arch);

    /// Fan-in scaled uniform weights, zero biases.
    static Network initialized(Architecture arch, std::uint64_t seed);

    const Architecture& architecture() const noexcept { return arch_; }
    std::span<T> parameters() noexcept { return params_; }
    std::span<const T> parameters() const noexcept { return params_; }

    WorkspacePtr<T> make_workspace() const;

    /// `input` is in_channels planes of 25x25, each row-major.
    Prediction<T> forward(std::span<const T> input, Workspace<T>& ws) const;

    /// Forward + backward for one sample. Adds `scale` * d(loss)/d(params)
    /// into `grad` and returns the unscaled loss terms.
    LossTerms<T> accumulate_gradient(std::span<const T> input, T class_target, T distance_target,
                                     const LossSettings<T>& settings, T scale, std::span<T> grad,
                                     Workspace<T>& ws) const;

    struct Slot {
        std::string name;
        std::size_t offset;
        int rows;
        int cols;
    };
    /// Parameter tensors in canonical order.
    const std::vector<Slot>& slots() const noexcept { return slots_; }

private:
    void check_input(std::span<const T> input) const;
    Prediction<T> run_forward(std::span<const T> input, Workspace<T>& ws) const;

    Architecture arch_;
    std::vector<Slot> slots_;
    ParamVector<T> params_;
};

class ChannelMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace innie
