#include "sampler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include "dihedral.hpp"
#include "geometry.hpp"
#include "log.hpp"
#include "rng.hpp"

namespace innie {

namespace {

constexpr double kQuantum = 0x1.0p20;   // fixed-point scale for block sums
constexpr double kClampValue = 0x1.0p16;

std::int64_t quantize(float v) {
    const double clamped = std::clamp(static_cast<double>(v), -kClampValue, kClampValue);
    return std::llround(clamped * kQuantum);
}

std::size_t round_half_even(double x) {
    // nearbyint follows the current rounding mode, which defaults to half-to-even.
    return static_cast<std::size_t>(std::nearbyint(x));
}

}  // namespace

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

Image normalize_image(const Image& image, const Mask* aoi) {
    if (image.empty()) throw std::invalid_argument("cannot normalize an empty image");
    if (aoi) require_same_shape(image, *aoi, "image vs area of interest");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < image.size(); ++i)
        if (!aoi || (*aoi)[i]) {
            sum += image[i];
            ++count;
        }
    Image out(image.rows(), image.cols(), 0.0f);
    if (count == 0) return out;
    const double mean = sum / static_cast<double>(count);
    double var = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i)
        if (!aoi || (*aoi)[i]) {
            const double d = image[i] - mean;
            var += d * d;
        }
    const double stddev = std::sqrt(var / static_cast<double>(count));
    if (stddev < 1e-12) return out;
    for (std::size_t i = 0; i < image.size(); ++i) out[i] = static_cast<float>((image[i] - mean) / stddev);
    return out;
}

PatchSource::PatchSource(Image normalized, std::vector<int> scales)
    : image_(std::move(normalized)), scales_(std::move(scales)) {
    if (image_.empty()) throw std::invalid_argument("patch source needs a non-empty image");
    if (scales_.empty()) throw std::invalid_argument("patch source needs at least one scale");
    const int rows = image_.rows(), cols = image_.cols();
    for (int s : scales_) {
        if (s < 1) throw std::invalid_argument("patch scales must be >= 1");
        Table table{s, 0, 0, {}};
        if (s > 1) {
            table.pad = 12 * s + s / 2 + 1;
            const int pr = rows + 2 * table.pad, pc = cols + 2 * table.pad;
            table.stride = pc + 1;
            table.sums.assign(static_cast<std::size_t>(pr + 1) * table.stride, 0);
            std::vector<std::int64_t> line(pc);
            for (int i = 0; i < pr; ++i) {
                const int r = reflect_index(i - table.pad, rows);
                for (int j = 0; j < pc; ++j) line[j] = quantize(image_(r, reflect_index(j - table.pad, cols)));
                std::uint64_t running = 0;
                std::uint64_t* above = table.sums.data() + static_cast<std::size_t>(i) * table.stride;
                std::uint64_t* here = above + table.stride;
                for (int j = 0; j < pc; ++j) {
                    running += static_cast<std::uint64_t>(line[j]);
                    here[j + 1] = above[j + 1] + running;
                }
            }
        }
        tables_.push_back(std::move(table));
    }
}

void PatchSource::extract(Pixel center, std::size_t scale_index, std::span<float> out) const {
    if (!image_.contains(center.row, center.col)) throw std::out_of_range("patch centre outside the image");
    if (out.size() < static_cast<std::size_t>(kPatchArea)) throw std::invalid_argument("patch buffer too small");
    const Table& t = tables_.at(scale_index);
    const int s = t.scale;
    const int top = center.row - 12 * s - s / 2;
    const int left = center.col - 12 * s - s / 2;
    if (s == 1) {
        for (int i = 0; i < kPatchSide; ++i) {
            const int r = reflect_index(top + i, image_.rows());
            for (int j = 0; j < kPatchSide; ++j)
                out[i * kPatchSide + j] = image_(r, reflect_index(left + j, image_.cols()));
        }
        return;
    }
    const double scale = 1.0 / (kQuantum * s * s);
    const std::uint64_t* sums = t.sums.data();
    for (int i = 0; i < kPatchSide; ++i) {
        const std::size_t r0 = static_cast<std::size_t>(top + i * s + t.pad) * t.stride;
        const std::size_t r1 = r0 + static_cast<std::size_t>(s) * t.stride;
        for (int j = 0; j < kPatchSide; ++j) {
            const std::size_t c0 = static_cast<std::size_t>(left + j * s + t.pad);
            const std::size_t c1 = c0 + s;
            const std::uint64_t block = sums[r1 + c1] - sums[r0 + c1] - sums[r1 + c0] + sums[r0 + c0];
            out[i * kPatchSide + j] = static_cast<float>(static_cast<double>(static_cast<std::int64_t>(block)) * scale);
        }
    }
}

void PatchSource::extract_stack(Pixel center, std::span<float> out) const {
    if (out.size() < stack_size()) throw std::invalid_argument("stack buffer too small");
    for (std::size_t k = 0; k < scales_.size(); ++k) extract(center, k, out.subspan(k * kPatchArea, kPatchArea));
}

std::vector<float> extract_patch(const Image& normalized, Pixel center, int scale) {
    PatchSource source(normalized, {scale});
    std::vector<float> patch(kPatchArea);
    source.extract(center, 0, patch);
    return patch;
}

void augment_stack(std::span<float> stack, int orientation) {
    if (orientation < 0 || orientation >= kOrientations) throw std::invalid_argument("orientation must be in 0..7");
    if (stack.size() % kPatchArea != 0) throw std::invalid_argument("stack is not a whole number of 25x25 patches");
    if (orientation == 0) return;
    float scratch[kPatchArea];
    for (std::size_t k = 0; k < stack.size(); k += kPatchArea)
        transform_square(stack.data() + k, kPatchSide, orientation, scratch);
}

SamplePlan build_sample_plan(std::span<const LabelMap> labels, std::span<const Mask> aois, double fraction,
                             double balance, bool augment, std::uint64_t seed) {
    if (!(fraction > 0 && fraction <= 1)) throw PlanError("fraction must be in (0,1]");
    if (!(balance >= 0 && balance <= 1)) throw PlanError("balance must be in [0,1]");
    if (labels.size() != aois.size()) throw PlanError("one area of interest per label map is required");

    std::vector<PlanEntry> innies, outies;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        require_same_shape(labels[k], aois[k], "labels vs area of interest");
        for (int r = 0; r < labels[k].rows(); ++r)
            for (int c = 0; c < labels[k].cols(); ++c) {
                if (!aois[k](r, c)) continue;
                PlanEntry e{static_cast<std::uint32_t>(k), {r, c}, 0};
                (labels[k](r, c) ? innies : outies).push_back(e);
            }
    }

    SamplePlan plan;
    plan.seed = seed;
    plan.innie_pool = innies.size();
    plan.outie_pool = outies.size();
    plan.available = innies.size() + outies.size();
    const std::size_t total = round_half_even(fraction * static_cast<double>(plan.available));
    plan.innie_count = std::min(total, round_half_even(balance * static_cast<double>(total)));
    plan.outie_count = total - plan.innie_count;

    if (plan.innie_count > 0 && innies.empty())
        throw PlanError("no innie (inside-region) pixels in the training data; nothing to learn from");
    if (plan.outie_count > 0 && outies.empty())
        throw PlanError("no outie (background) pixels in the training data; lower balance or add background");

    Rng rng(Rng::derive(seed, 0x504c414e));
    auto draw = [&](std::vector<PlanEntry>& pool, std::size_t quota, bool& repeated, const char* what) {
        std::vector<PlanEntry> chosen;
        chosen.reserve(quota);
        if (quota <= pool.size()) {
            // Partial Fisher-Yates: the first `quota` slots become a uniform sample.
            for (std::size_t i = 0; i < quota; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
                std::swap(pool[i], pool[j]);
                chosen.push_back(pool[i]);
            }
        } else {
            repeated = true;
            log::warn("only {} {} pixels for a quota of {}; drawing the remainder with replacement", pool.size(),
                      what, quota);
            chosen = pool;
            while (chosen.size() < quota) chosen.push_back(pool[rng.below(pool.size())]);
        }
        return chosen;
    };
    auto in = draw(innies, plan.innie_count, plan.innies_repeated, "innie");
    auto out = draw(outies, plan.outie_count, plan.outies_repeated, "outie");
    plan.entries = std::move(in);
    plan.entries.insert(plan.entries.end(), out.begin(), out.end());
    if (augment)
        for (auto& e : plan.entries) e.orientation = static_cast<std::uint8_t>(rng.below(kOrientations));
    return plan;
}

void dump_plan(const SamplePlan& plan, std::ostream& out) {
    out << "# image\trow\tcol\torientation\n";
    for (const auto& e : plan.entries)
        out << e.image << '\t' << e.pixel.row << '\t' << e.pixel.col << '\t' << int(e.orientation) << '\n';
}

std::pair<float, float> TrainingSet::materialize(const PlanEntry& entry, int orientation,
                                                 std::span<float> stack) const {
    if (entry.image >= sources.size()) throw PlanError("plan refers to a missing image");
    sources[entry.image].extract_stack(entry.pixel, stack);
    augment_stack(stack.first(stack_size()), orientation);
    const bool innie = labels[entry.image](entry.pixel.row, entry.pixel.col) != 0;
    const float distance = innie ? distances[entry.image](entry.pixel.row, entry.pixel.col) : 0.0f;
    return {innie ? 1.0f : 0.0f, distance};
}

TrainingSample TrainingSet::sample(const PlanEntry& entry, int orientation) const {
    TrainingSample s;
    s.stack.resize(stack_size());
    std::tie(s.class_target, s.distance_target) = materialize(entry, orientation, s.stack);
    s.image = entry.image;
    s.center = entry.pixel;
    s.orientation = orientation;
    return s;
}

TrainingSet make_training_set(std::span<const Image> images, std::span<const LabelMap> labels,
                              std::span<const Mask> aois, const std::vector<int>& scales, double dist_cap) {
    if (images.size() != labels.size() || images.size() != aois.size())
        throw std::invalid_argument("images, labels and areas of interest must pair up");
    TrainingSet set;
    set.dist_cap = dist_cap;
    for (std::size_t k = 0; k < images.size(); ++k) {
        require_same_shape(images[k], labels[k], "image vs mask");
        set.sources.emplace_back(normalize_image(images[k], &aois[k]), scales);
        set.labels.push_back(labels[k]);
        set.distances.push_back(distance_map(labels[k], dist_cap));
    }
    return set;
}

BatchStream::BatchStream(const SamplePlan& plan, int batch_size, bool augment, std::uint64_t seed)
    : plan_(plan), batch_size_(batch_size), augment_(augment), seed_(seed) {
    if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
}

std::size_t BatchStream::batches_per_epoch() const {
    return (plan_.entries.size() + static_cast<std::size_t>(batch_size_) - 1) / static_cast<std::size_t>(batch_size_);
}

void BatchStream::begin_epoch(int epoch) {
    Rng rng(Rng::derive(seed_, 0x45504f43ull + static_cast<std::uint64_t>(epoch)));
    order_.resize(plan_.entries.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = {i, plan_.entries[i].orientation};
    rng.shuffle(std::span<Visit>(order_));
    if (augment_ && epoch > 0)
        for (auto& v : order_) v.orientation = static_cast<int>(rng.below(kOrientations));
    cursor_ = 0;
}

bool BatchStream::next(std::vector<Visit>& batch) {
    batch.clear();
    if (cursor_ >= order_.size()) return false;
    const std::size_t end = std::min(order_.size(), cursor_ + static_cast<std::size_t>(batch_size_));
    batch.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_), order_.begin() + static_cast<std::ptrdiff_t>(end));
    cursor_ = end;
    return true;
}

std::vector<std::vector<TrainingSample>> assemble_batches(const SamplePlan& plan, const TrainingSet& set,
                                                          int batch_size, bool augment, std::uint64_t seed,
                                                          int epoch) {
    BatchStream stream(plan, batch_size, augment, seed);
    stream.begin_epoch(epoch);
    std::vector<std::vector<TrainingSample>> batches;
    std::vector<Visit> visits;
    while (stream.next(visits)) {
        auto& batch = batches.emplace_back();
        for (const Visit& v : visits) batch.push_back(set.sample(plan.entries[v.entry], v.orientation));
    }
    return batches;
}

}  // namespace innie
