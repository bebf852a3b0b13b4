#include "evaluate.hpp"

#include <fmt/core.h>

#include <map>
#include <unordered_map>

namespace innie {

double jaccard(const Mask& a, const Mask& b) {
    require_same_shape(a, b, "jaccard operands");
    std::size_t inter = 0, uni = 0, size_a = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool in_a = a[i] != 0, in_b = b[i] != 0;
        size_a += in_a;
        inter += in_a && in_b;
        uni += in_a || in_b;
    }
    if (size_a == 0) throw EvaluationError("jaccard: first set is empty");
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<RegionMatch> match_regions(const LabelMap& truth, const LabelMap& predicted) {
    require_same_shape(truth, predicted, "truth vs prediction");
    std::map<std::uint32_t, std::size_t> truth_area;
    std::unordered_map<std::uint32_t, std::size_t> pred_area;
    std::map<std::uint32_t, std::map<std::uint32_t, std::size_t>> overlaps;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const std::uint32_t t = truth[i], p = predicted[i];
        if (t) ++truth_area[t];
        if (p) ++pred_area[p];
        if (t && p) ++overlaps[t][p];
    }
    std::vector<RegionMatch> matches;
    for (const auto& [label, area] : truth_area) {
        RegionMatch m;
        m.truth = label;
        m.truth_area = area;
        std::uint32_t best = 0;
        if (auto it = overlaps.find(label); it != overlaps.end()) {
            for (const auto& [p, n] : it->second)
                if (n > m.overlap) {
                    m.overlap = n;
                    best = p;
                }
        }
        if (best && 2 * m.overlap > area) {
            m.predicted = best;
            m.jaccard = static_cast<double>(m.overlap) / static_cast<double>(area + pred_area[best] - m.overlap);
        }
        matches.push_back(m);
    }
    return matches;
}

double seg_score(const LabelMap& truth, const LabelMap& predicted) {
    const auto matches = match_regions(truth, predicted);
    if (matches.empty()) throw EvaluationError("SEG needs at least one true region");
    double sum = 0;
    for (const auto& m : matches) sum += m.jaccard;
    return sum / static_cast<double>(matches.size());
}

SegReport seg_report(std::span<const LabeledImage> truth, std::span<const LabeledImage> predicted) {
    std::map<std::string, const LabelMap*> by_stem;
    for (const auto& p : predicted) by_stem[p.stem] = &p.labels;
    std::string missing;
    for (const auto& t : truth)
        if (!by_stem.count(t.stem)) missing += (missing.empty() ? "" : ", ") + t.stem;
    if (!missing.empty()) throw EvaluationError("no prediction for: " + missing);
    if (truth.empty()) throw EvaluationError("no ground truth to evaluate against");

    SegReport report;
    double weighted = 0;
    for (const auto& t : truth) {
        const auto matches = match_regions(t.labels, *by_stem[t.stem]);
        ImageScore score{t.stem, matches.size(), 0.0};
        if (matches.empty()) throw EvaluationError("ground truth for " + t.stem + " has no regions");
        for (const auto& m : matches) score.seg += m.jaccard;
        weighted += score.seg;
        score.seg /= static_cast<double>(matches.size());
        report.true_regions += score.true_regions;
        report.images.push_back(score);
    }
    report.aggregate = weighted / static_cast<double>(report.true_regions);
    return report;
}

std::string render_report(const SegReport& report) {
    std::string out = "image\ttrue_regions\tseg\n";
    for (const auto& s : report.images) out += fmt::format("{}\t{}\t{:.6f}\n", s.stem, s.true_regions, s.seg);
    out += fmt::format("AGGREGATE\t{}\t{:.6f}\n", report.true_regions, report.aggregate);
    return out;
}

}  // namespace innie
