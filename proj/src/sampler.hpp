#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace innie {

inline constexpr int kPatchSide = 25;
inline constexpr int kPatchArea = kPatchSide * kPatchSide;

/// Zero mean, unit population standard deviation over AOI-true pixels
/// (all pixels when `aoi` is null). Near-constant images map to all zeros.
Image normalize_image(const Image& image, const Mask* aoi = nullptr);

/// Patch extractor for one normalized image at a fixed set of scales.
///
/// At scale s the window has side 25*s; block (i, j) covers rows
/// c.row - 12*s - s/2 + i*s ... + s-1 (likewise columns), so the centre pixel
/// sits in block 12 at offset s/2. Reads outside the image reflect about the
/// edge pixels (the edge itself is not repeated), periodically for windows
/// wider than the image. Scale 1 copies pixels unchanged; larger scales
/// average each block.
///
/// Block sums are taken over intensities quantized to 2^-20 in integer
/// arithmetic (summed-area tables over the reflect-padded image), so a block
/// mean does not depend on the order its pixels are visited and patches are
/// exactly equivariant under the 8 symmetries of the square for odd scales.
class PatchSource {
public:
    PatchSource(Image normalized, std::vector<int> scales);

    int rows() const noexcept { return image_.rows(); }
    int cols() const noexcept { return image_.cols(); }
    const std::vector<int>& scales() const noexcept { return scales_; }
    const Image& image() const noexcept { return image_; }
    std::size_t stack_size() const noexcept { return scales_.size() * kPatchArea; }

    /// One 25x25 patch, row-major, for scale index `scale_index`.
    void extract(Pixel center, std::size_t scale_index, std::span<float> out) const;

    /// All scales, channel-major (scale, row, col).
    void extract_stack(Pixel center, std::span<float> out) const;

private:
    struct Table {
        int scale;
        int pad;
        int stride;
        std::vector<std::uint64_t> sums;  // (rows+2pad+1) x (cols+2pad+1), wrapping arithmetic
    };

    Image image_;
    std::vector<int> scales_;
    std::vector<Table> tables_;  // one per scale, empty sums for scale 1
};

/// Reflect index into [0, n) about the end pixels.
int reflect_index(int i, int n);

/// Convenience: normalized input, single patch.
std::vector<float> extract_patch(const Image& normalized, Pixel center, int scale);

/// Apply orientation (see dihedral.hpp) to every channel of a stack.
void augment_stack(std::span<float> stack, int orientation);

struct PlanEntry {
    std::uint32_t image = 0;
    Pixel pixel;
    std::uint8_t orientation = 0;
    bool operator==(const PlanEntry&) const = default;
};

/// Which pixels are trained on. `available` is M, the AOI-true pixel count
/// over all training images; entries.size() is N = round(F*M).
struct SamplePlan {
    std::vector<PlanEntry> entries;
    std::size_t available = 0;
    std::size_t innie_pool = 0;
    std::size_t outie_pool = 0;
    std::size_t innie_count = 0;
    std::size_t outie_count = 0;
    bool innies_repeated = false;
    bool outies_repeated = false;
    std::uint64_t seed = 0;
    bool operator==(const SamplePlan&) const = default;
};

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// N = round(F*M) samples, round(b*N) of them innies, the rest outies, each
/// class drawn uniformly without replacement from its pool (with
/// replacement, and a warning, only when the pool is smaller than its
/// quota). Rounding is half-to-even. Orientations are drawn when `augment`.
SamplePlan build_sample_plan(std::span<const LabelMap> labels, std::span<const Mask> aois, double fraction,
                             double balance, bool augment, std::uint64_t seed);

/// One line per entry: image row col orientation.
void dump_plan(const SamplePlan& plan, std::ostream& out);

struct TrainingSample {
    std::vector<float> stack;
    float class_target = 0;
    float distance_target = 0;
    std::uint32_t image = 0;
    Pixel center;
    int orientation = 0;
};

/// Everything needed to turn plan entries into network inputs and targets.
struct TrainingSet {
    std::vector<PatchSource> sources;
    std::vector<LabelMap> labels;
    std::vector<DistanceMap> distances;
    double dist_cap = 10.0;

    std::size_t stack_size() const { return sources.empty() ? 0 : sources.front().stack_size(); }

    /// Fill `stack` and return (class, distance) targets.
    std::pair<float, float> materialize(const PlanEntry& entry, int orientation, std::span<float> stack) const;
    TrainingSample sample(const PlanEntry& entry, int orientation) const;
};

/// Builds the per-image sources, labels and capped distance maps.
TrainingSet make_training_set(std::span<const Image> images, std::span<const LabelMap> labels,
                              std::span<const Mask> aois, const std::vector<int>& scales, double dist_cap);

struct Visit {
    std::size_t entry;
    int orientation;
};

/// Epoch-wise batching of a plan: ceil(N / batch_size) batches per epoch,
/// order reshuffled each epoch from the seed. Epoch 0 uses the plan's
/// orientations; with augmentation on, later epochs draw fresh ones.
class BatchStream {
public:
    BatchStream(const SamplePlan& plan, int batch_size, bool augment, std::uint64_t seed);

    std::size_t batches_per_epoch() const;
    void begin_epoch(int epoch);
    /// False once the epoch is exhausted.
    bool next(std::vector<Visit>& batch);

private:
    const SamplePlan& plan_;
    int batch_size_;
    bool augment_;
    std::uint64_t seed_;
    std::vector<Visit> order_;
    std::size_t cursor_ = 0;
};

/// Materialized batches for one epoch, in stream order.
std::vector<std::vector<TrainingSample>> assemble_batches(const SamplePlan& plan, const TrainingSet& set,
                                                          int batch_size, bool augment, std::uint64_t seed,
                                                          int epoch);

}  // namespace innie
