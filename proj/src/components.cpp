#include "components.hpp"

#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace innie {

std::span<const Offset> neighbors(int connectivity) {
    if (connectivity == 4) return kNeighbors4;
    if (connectivity == 8) return kNeighbors8;
    throw std::invalid_argument("connectivity must be 4 or 8");
}

LabelMap label_components(const Mask& mask, int connectivity) {
    const auto offsets = neighbors(connectivity);
    LabelMap labels(mask.rows(), mask.cols(), 0);
    std::vector<Pixel> stack;
    std::uint32_t next = 0;
    for (int r = 0; r < mask.rows(); ++r) {
        for (int c = 0; c < mask.cols(); ++c) {
            if (!mask(r, c) || labels(r, c)) continue;
            ++next;
            labels(r, c) = next;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                for (const Offset& o : offsets) {
                    const int rr = p.row + o.dr, cc = p.col + o.dc;
                    if (!mask.contains(rr, cc) || !mask(rr, cc) || labels(rr, cc)) continue;
                    labels(rr, cc) = next;
                    stack.push_back({rr, cc});
                }
            }
        }
    }
    return labels;
}

LabelMap compact_labels(const LabelMap& labels) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    LabelMap out(labels.rows(), labels.cols(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::uint32_t v = labels[i];
        if (!v) continue;
        auto [it, inserted] = remap.try_emplace(v, static_cast<std::uint32_t>(remap.size() + 1));
        out[i] = it->second;
    }
    return out;
}

std::size_t count_labels(const LabelMap& labels) {
    std::unordered_set<std::uint32_t> seen;
    for (std::uint32_t v : labels.values())
        if (v) seen.insert(v);
    return seen.size();
}

}  // namespace innie
