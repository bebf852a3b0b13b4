#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace innie {

class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// |A ∩ B| / |A ∪ B| for two pixel sets given as masks of equal shape.
/// Throws when A is empty; returns 0 when B is empty.
double jaccard(const Mask& a, const Mask& b);

struct RegionMatch {
    std::uint32_t truth = 0;
    std::optional<std::uint32_t> predicted;  // set only when overlap > |truth| / 2
    std::size_t truth_area = 0;
    std::size_t overlap = 0;
    double jaccard = 0;
};

/// For each true region, the predicted region with the largest overlap
/// (smallest label on ties). It counts only if the overlap is strictly more
/// than half the true region; otherwise the region scores 0. Background is
/// never a candidate on either side.
std::vector<RegionMatch> match_regions(const LabelMap& truth, const LabelMap& predicted);

/// Mean Jaccard over true regions with the majority rule above.
double seg_score(const LabelMap& truth, const LabelMap& predicted);

struct ImageScore {
    std::string stem;
    std::size_t true_regions = 0;
    double seg = 0;
};

struct SegReport {
    std::vector<ImageScore> images;
    std::size_t true_regions = 0;
    double aggregate = 0;  // weighted by true-region count
};

struct LabeledImage {
    std::string stem;
    LabelMap labels;
};

/// Pairs truth and predictions by stem; any truth stem without a prediction
/// is an error listing every missing stem.
SegReport seg_report(std::span<const LabeledImage> truth, std::span<const LabeledImage> predicted);

/// Tab-separated: header, one row per image, then an AGGREGATE row.
std::string render_report(const SegReport& report);

}  // namespace innie
