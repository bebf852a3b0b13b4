#include "network.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "rng.hpp"

namespace innie {

namespace {

constexpr int kTaps = 9;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using MatMap = Eigen::Map<Mat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const Mat<T>>;
template <class T>
using VecMap = Eigen::Map<Vec<T>>;
template <class T>
using ConstVecMap = Eigen::Map<const Vec<T>>;

// Feature maps are (channels x pixels), column-major, so each pixel's channel
// vector is contiguous. im2col rows are ordered tap-major: row = tap*C + c.
template <class T>
void im2col(const Mat<T>& in, int side, Mat<T>& col) {
    const int channels = static_cast<int>(in.rows());
    col.resize(kTaps * channels, side * side);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            T* dst = col.col(r * side + c).data();
            for (int dr = -1; dr <= 1; ++dr) {
                const int rr = r + dr;
                for (int dc = -1; dc <= 1; ++dc, dst += channels) {
                    const int cc = c + dc;
                    if (rr < 0 || rr >= side || cc < 0 || cc >= side) {
                        std::fill(dst, dst + channels, T(0));
                    } else {
                        const T* src = in.col(rr * side + cc).data();
                        std::copy(src, src + channels, dst);
                    }
                }
            }
        }
    }
}

template <class T>
void col2im_add(const Mat<T>& col, int side, int channels, Mat<T>& out) {
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const T* src = col.col(r * side + c).data();
            for (int dr = -1; dr <= 1; ++dr) {
                const int rr = r + dr;
                for (int dc = -1; dc <= 1; ++dc, src += channels) {
                    const int cc = c + dc;
                    if (rr < 0 || rr >= side || cc < 0 || cc >= side) continue;
                    T* dst = out.col(rr * side + cc).data();
                    for (int k = 0; k < channels; ++k) dst[k] += src[k];
                }
            }
        }
    }
}

template <class T>
void relu_inplace(Mat<T>& m) {
    m = m.cwiseMax(T(0));
}

// Zero the gradient wherever the activation was clamped.
template <class T>
void relu_mask(const Mat<T>& activation, Mat<T>& grad) {
    grad = (activation.array() > T(0)).select(grad, T(0));
}

}  // namespace

template <class T>
struct Workspace {
    struct Block {
        Mat<T> in, col1, a1, col2, a2, sum, pooled;
        std::vector<int> argmax;  // index into sum's storage for each pooled element
        Mat<T> d_sum, d_a2, d_col, d_a1, d_in;
    };
    std::array<Block, 3> blocks;
    std::array<Vec<T>, 5> dense;  // dense[0] = flattened features
    std::array<Vec<T>, 5> d_dense;
    Vec<T> dz;
};

template <class T>
void WorkspaceDeleter<T>::operator()(Workspace<T>* ws) const {
    delete ws;
}

std::size_t Architecture::parameter_count() const {
    std::size_t count = 0;
    int in = in_channels;
    for (int width : block_widths) {
        count += static_cast<std::size_t>(width) * (kTaps * in) + width;
        count += static_cast<std::size_t>(width) * (kTaps * width) + width;
        if (in != width) count += static_cast<std::size_t>(width) * in;
        in = width;
    }
    int features = flat_features();
    for (int width : dense_widths) {
        count += static_cast<std::size_t>(width) * features + width;
        features = width;
    }
    count += 2 * (static_cast<std::size_t>(features) + 1);
    return count;
}

std::uint64_t Architecture::fingerprint() const {
    // FNV-1a over the integer descriptor.
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::int64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= static_cast<std::uint64_t>(v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ull;
        }
    };
    mix(kPatch);
    mix(in_channels);
    for (int w : block_widths) mix(w);
    for (int w : dense_widths) mix(w);
    return h;
}

std::string Architecture::describe() const {
    std::ostringstream out;
    out << "in=" << in_channels << " blocks=" << block_widths[0] << "/" << block_widths[1] << "/"
        << block_widths[2] << " dense=" << dense_widths[0] << "/" << dense_widths[1] << "/" << dense_widths[2]
        << "/" << dense_widths[3];
    return out.str();
}

void Architecture::validate() const {
    if (in_channels < 1) throw std::invalid_argument("architecture needs at least one input channel");
    for (int w : block_widths)
        if (w < 1) throw std::invalid_argument("block widths must be positive");
    for (int w : dense_widths)
        if (w < 1) throw std::invalid_argument("dense widths must be positive");
}

std::vector<StageShape> stage_shapes(const Architecture& arch) {
    std::vector<StageShape> shapes;
    shapes.push_back({"input", arch.in_channels, Architecture::kPatch, Architecture::kPatch});
    for (int b = 0; b < 3; ++b) {
        const int side = Architecture::side_at(b);
        const int width = arch.block_widths[b];
        const std::string prefix = "block" + std::to_string(b + 1);
        shapes.push_back({prefix + ".conv1", width, side, side});
        shapes.push_back({prefix + ".conv2", width, side, side});
        shapes.push_back({prefix + ".pool", width, side / 2, side / 2});
    }
    shapes.push_back({"flatten", arch.flat_features(), 1, 1});
    for (int i = 0; i < 4; ++i) shapes.push_back({"dense" + std::to_string(i + 1), arch.dense_widths[i], 1, 1});
    shapes.push_back({"class_head", 1, 1, 1});
    shapes.push_back({"distance_head", 1, 1, 1});
    return shapes;
}

template <class T>
LossTerms<T> sample_loss(const Prediction<T>& pred, T class_target, T distance_target,
                         const LossSettings<T>& settings) {
    LossTerms<T> terms;
    // BCE from the logit: softplus(z) - y z, stable for large |z|.
    const T z = pred.class_logit;
    terms.class_term = std::max(z, T(0)) - z * class_target + std::log1p(std::exp(-std::abs(z)));
    const T diff = (pred.distance - distance_target) / settings.dist_cap;
    terms.distance_term = settings.distance_weight * diff * diff;
    return terms;
}

template <class T>
Network<T>::Network(Architecture arch) : arch_(arch) {
    arch_.validate();
    std::size_t offset = 0;
    auto add = [&](std::string name, int rows, int cols) {
        slots_.push_back({std::move(name), offset, rows, cols});
        offset += static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    };
    int in = arch_.in_channels;
    for (int b = 0; b < 3; ++b) {
        const int width = arch_.block_widths[b];
        const std::string prefix = "block" + std::to_string(b + 1);
        add(prefix + ".conv1.weight", width, kTaps * in);
        add(prefix + ".conv1.bias", width, 1);
        add(prefix + ".conv2.weight", width, kTaps * width);
        add(prefix + ".conv2.bias", width, 1);
        if (in != width) add(prefix + ".skip.weight", width, in);
        in = width;
    }
    int features = arch_.flat_features();
    for (int i = 0; i < 4; ++i) {
        const std::string prefix = "dense" + std::to_string(i + 1);
        add(prefix + ".weight", arch_.dense_widths[i], features);
        add(prefix + ".bias", arch_.dense_widths[i], 1);
        features = arch_.dense_widths[i];
    }
    add("class_head.weight", 1, features);
    add("class_head.bias", 1, 1);
    add("distance_head.weight", 1, features);
    add("distance_head.bias", 1, 1);
    params_.assign(offset, T(0));
}

template <class T>
Network<T> Network<T>::initialized(Architecture arch, std::uint64_t seed) {
    Network net(arch);
    Rng rng(seed);
    for (const Slot& slot : net.slots_) {
        if (slot.cols == 1 && slot.name.ends_with(".bias")) continue;  // biases stay zero
        const bool rectified = slot.name.starts_with("block") ? slot.name.find("skip") == std::string::npos
                                                              : slot.name.starts_with("dense");
        const double limit = std::sqrt((rectified ? 6.0 : 3.0) / slot.cols);
        T* w = net.params_.data() + slot.offset;
        const std::size_t n = static_cast<std::size_t>(slot.rows) * slot.cols;
        for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<T>(rng.uniform(-limit, limit));
    }
    return net;
}

template <class T>
WorkspacePtr<T> Network<T>::make_workspace() const {
    return WorkspacePtr<T>(new Workspace<T>());
}

template <class T>
void Network<T>::check_input(std::span<const T> input) const {
    if (input.size() != static_cast<std::size_t>(arch_.input_size())) {
        throw ChannelMismatch("network expects " + std::to_string(arch_.in_channels) + " input channels (" +
                              std::to_string(arch_.input_size()) + " values), got " +
                              std::to_string(input.size()) + " values");
    }
}

template <class T>
Prediction<T> Network<T>::forward(std::span<const T> input, Workspace<T>& ws) const {
    check_input(input);
    return run_forward(input, ws);
}

template <class T>
Prediction<T> Network<T>::run_forward(std::span<const T> input, Workspace<T>& ws) const {
    const T* p = params_.data();
    std::size_t slot = 0;
    auto next_matrix = [&]() {
        const Slot& s = slots_[slot++];
        return ConstMatMap<T>(p + s.offset, s.rows, s.cols);
    };

    // Planar (channel, row, col) input -> (channel x pixel).
    constexpr int area = Architecture::kPatch * Architecture::kPatch;
    auto& first = ws.blocks[0].in;
    first = ConstMatMap<T>(input.data(), area, arch_.in_channels).transpose();

    int in = arch_.in_channels;
    for (int b = 0; b < 3; ++b) {
        auto& blk = ws.blocks[b];
        const int side = Architecture::side_at(b);
        const int width = arch_.block_widths[b];

        const auto w1 = next_matrix();
        const auto b1 = next_matrix();
        const auto w2 = next_matrix();
        const auto b2 = next_matrix();

        im2col(blk.in, side, blk.col1);
        blk.a1.noalias() = w1 * blk.col1;
        blk.a1.colwise() += b1.col(0);
        relu_inplace(blk.a1);

        im2col(blk.a1, side, blk.col2);
        blk.a2.noalias() = w2 * blk.col2;
        blk.a2.colwise() += b2.col(0);
        relu_inplace(blk.a2);

        if (in != width) {
            const auto skip = next_matrix();
            blk.sum.noalias() = skip * blk.in;
            blk.sum += blk.a2;
        } else {
            blk.sum = blk.a2 + blk.in;
        }

        const int out_side = side / 2;
        Mat<T>& pooled = (b + 1 < 3) ? ws.blocks[b + 1].in : blk.pooled;
        pooled.resize(width, out_side * out_side);
        blk.argmax.resize(static_cast<std::size_t>(width) * out_side * out_side);
        for (int r = 0; r < out_side; ++r) {
            for (int c = 0; c < out_side; ++c) {
                const int o = r * out_side + c;
                const int corners[4] = {(2 * r) * side + 2 * c, (2 * r) * side + 2 * c + 1,
                                        (2 * r + 1) * side + 2 * c, (2 * r + 1) * side + 2 * c + 1};
                for (int ch = 0; ch < width; ++ch) {
                    int best = corners[0];
                    T best_value = blk.sum(ch, best);
                    for (int k = 1; k < 4; ++k) {
                        const T v = blk.sum(ch, corners[k]);
                        if (v > best_value) {
                            best_value = v;
                            best = corners[k];
                        }
                    }
                    pooled(ch, o) = best_value;
                    blk.argmax[static_cast<std::size_t>(o) * width + ch] = best;
                }
            }
        }
        in = width;
    }

    const Mat<T>& last = ws.blocks[2].pooled;
    ws.dense[0] = ConstVecMap<T>(last.data(), last.size());
    for (int i = 0; i < 4; ++i) {
        const auto w = next_matrix();
        const auto bias = next_matrix();
        ws.dense[i + 1].noalias() = w * ws.dense[i];
        ws.dense[i + 1] += bias.col(0);
        ws.dense[i + 1] = ws.dense[i + 1].cwiseMax(T(0));
    }
    const auto wc = next_matrix();
    const auto bc = next_matrix();
    const auto wd = next_matrix();
    const auto bd = next_matrix();
    const T logit = wc.row(0).dot(ws.dense[4]) + bc(0, 0);
    const T distance = wd.row(0).dot(ws.dense[4]) + bd(0, 0);
    const T prob = T(1) / (T(1) + std::exp(-logit));
    return {prob, distance, logit};
}

template <class T>
LossTerms<T> Network<T>::accumulate_gradient(std::span<const T> input, T class_target, T distance_target,
                                             const LossSettings<T>& settings, T scale, std::span<T> grad,
                                             Workspace<T>& ws) const {
    check_input(input);
    if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer has the wrong size");
    const Prediction<T> pred = run_forward(input, ws);
    const LossTerms<T> terms = sample_loss(pred, class_target, distance_target, settings);

    const T d_logit = scale * (pred.class_prob - class_target);
    const T d_distance =
        scale * T(2) * settings.distance_weight * (pred.distance - distance_target) /
        (settings.dist_cap * settings.dist_cap);

    const T* p = params_.data();
    T* g = grad.data();
    std::size_t slot = slots_.size();
    // Walk the slots backwards; each call hands out (weights, gradient).
    auto prev = [&]() {
        const Slot& s = slots_[--slot];
        return std::pair{ConstMatMap<T>(p + s.offset, s.rows, s.cols), MatMap<T>(g + s.offset, s.rows, s.cols)};
    };

    auto [bd, gbd] = prev();
    auto [wd, gwd] = prev();
    auto [bc, gbc] = prev();
    auto [wc, gwc] = prev();
    (void)bd;
    (void)bc;
    gbd(0, 0) += d_distance;
    gwd.row(0) += d_distance * ws.dense[4].transpose();
    gbc(0, 0) += d_logit;
    gwc.row(0) += d_logit * ws.dense[4].transpose();
    ws.d_dense[4] = wc.row(0).transpose() * d_logit + wd.row(0).transpose() * d_distance;

    for (int i = 3; i >= 0; --i) {
        auto [bias, gbias] = prev();
        auto [w, gw] = prev();
        (void)bias;
        ws.dz = (ws.dense[i + 1].array() > T(0)).select(ws.d_dense[i + 1], T(0));
        gbias.col(0) += ws.dz;
        gw.noalias() += ws.dz * ws.dense[i].transpose();
        ws.d_dense[i].noalias() = w.transpose() * ws.dz;
    }

    // d(pooled output of block 3)
    Mat<T> d_pooled = ConstMatMap<T>(ws.d_dense[0].data(), arch_.block_widths[2], 9);
    for (int b = 2; b >= 0; --b) {
        auto& blk = ws.blocks[b];
        const int side = Architecture::side_at(b);
        const int width = arch_.block_widths[b];
        const int in = b == 0 ? arch_.in_channels : arch_.block_widths[b - 1];
        const bool need_input_grad = b > 0;

        blk.d_sum.setZero(width, side * side);
        const std::size_t pooled_count = static_cast<std::size_t>(d_pooled.size());
        const T* dp = d_pooled.data();
        T* ds = blk.d_sum.data();
        for (std::size_t k = 0; k < pooled_count; ++k) {
            const std::size_t ch = k % static_cast<std::size_t>(width);
            ds[static_cast<std::size_t>(blk.argmax[k]) * width + ch] += dp[k];
        }

        if (in != width) {
            auto [skip, gskip] = prev();
            gskip.noalias() += blk.d_sum * blk.in.transpose();
            if (need_input_grad) blk.d_in.noalias() = skip.transpose() * blk.d_sum;
        } else if (need_input_grad) {
            blk.d_in = blk.d_sum;
        }

        auto [b2, gb2] = prev();
        auto [w2, gw2] = prev();
        auto [b1, gb1] = prev();
        auto [w1, gw1] = prev();
        (void)b1;
        (void)b2;

        blk.d_a2 = blk.d_sum;
        relu_mask(blk.a2, blk.d_a2);
        gw2.noalias() += blk.d_a2 * blk.col2.transpose();
        gb2.col(0) += blk.d_a2.rowwise().sum();
        blk.d_col.noalias() = w2.transpose() * blk.d_a2;
        blk.d_a1.setZero(width, side * side);
        col2im_add(blk.d_col, side, width, blk.d_a1);
        relu_mask(blk.a1, blk.d_a1);

        gw1.noalias() += blk.d_a1 * blk.col1.transpose();
        gb1.col(0) += blk.d_a1.rowwise().sum();
        if (need_input_grad) {
            blk.d_col.noalias() = w1.transpose() * blk.d_a1;
            col2im_add(blk.d_col, side, in, blk.d_in);
            d_pooled = blk.d_in;
        }
    }
    return terms;
}

template LossTerms<float> sample_loss(const Prediction<float>&, float, float, const LossSettings<float>&);
template LossTerms<double> sample_loss(const Prediction<double>&, double, double, const LossSettings<double>&);
template struct WorkspaceDeleter<float>;
template struct WorkspaceDeleter<double>;
template class Network<float>;
template class Network<double>;

}  // namespace innie
