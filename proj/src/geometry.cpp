#include "geometry.hpp"

#include <algorithm>
#include <map>
#include <vector>

namespace innie {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

// Lower envelope of parabolas f[p] + (q - p)^2 over the finite sites p
// (Felzenszwalb & Huttenlocher). Infinite sites are skipped.
class Envelope1D {
public:
    void run(const std::int64_t* f, std::int64_t* out, int n, std::ptrdiff_t stride) {
        v_.resize(n);
        z_.resize(n + 1);
        int k = -1;
        for (int q = 0; q < n; ++q) {
            const std::int64_t fq = f[q * stride];
            if (fq == kInf) continue;
            if (k < 0) {
                k = 0;
                v_[0] = q;
                z_[0] = -std::numeric_limits<double>::infinity();
                z_[1] = std::numeric_limits<double>::infinity();
                continue;
            }
            double s = 0;
            while (true) {
                const int p = v_[k];
                const std::int64_t fp = f[p * stride];
                s = (static_cast<double>(fq + std::int64_t{q} * q) - static_cast<double>(fp + std::int64_t{p} * p)) /
                    (2.0 * (q - p));
                if (s <= z_[k]) {
                    if (--k < 0) break;
                    continue;
                }
                break;
            }
            if (k < 0) {
                k = 0;
                v_[0] = q;
                z_[0] = -std::numeric_limits<double>::infinity();
                z_[1] = std::numeric_limits<double>::infinity();
                continue;
            }
            ++k;
            v_[k] = q;
            z_[k] = s;
            z_[k + 1] = std::numeric_limits<double>::infinity();
        }
        if (k < 0) {
            for (int q = 0; q < n; ++q) out[q * stride] = kInf;
            return;
        }
        int j = 0;
        for (int q = 0; q < n; ++q) {
            while (z_[j + 1] < q) ++j;
            const std::int64_t dq = q - v_[j];
            out[q * stride] = f[v_[j] * stride] + dq * dq;
        }
    }

private:
    std::vector<int> v_;
    std::vector<double> z_;
};

struct Box {
    int r0, c0, r1, c1;  // inclusive
};

}  // namespace

Grid<std::int64_t> squared_edge_distance(const LabelMap& labels, double cap) {
    Grid<std::int64_t> out(labels.rows(), labels.cols(), 0);
    std::map<std::uint32_t, Box> boxes;
    for (int r = 0; r < labels.rows(); ++r)
        for (int c = 0; c < labels.cols(); ++c) {
            const std::uint32_t k = labels(r, c);
            if (!k) continue;
            auto [it, inserted] = boxes.try_emplace(k, Box{r, c, r, c});
            Box& b = it->second;
            b.r0 = std::min(b.r0, r);
            b.c0 = std::min(b.c0, c);
            b.r1 = std::max(b.r1, r);
            b.c1 = std::max(b.c1, c);
        }

    // Any differing pixel within the cap lies inside the box grown by the cap.
    const int margin = static_cast<int>(std::ceil(cap)) + 1;
    Envelope1D envelope;
    std::vector<std::int64_t> field, pass;
    for (const auto& [label, box] : boxes) {
        const int r0 = std::max(0, box.r0 - margin), r1 = std::min(labels.rows() - 1, box.r1 + margin);
        const int c0 = std::max(0, box.c0 - margin), c1 = std::min(labels.cols() - 1, box.c1 + margin);
        const int h = r1 - r0 + 1, w = c1 - c0 + 1;
        field.assign(static_cast<std::size_t>(h) * w, 0);
        pass.assign(field.size(), 0);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                field[static_cast<std::size_t>(r) * w + c] = labels(r0 + r, c0 + c) == label ? kInf : 0;
        for (int c = 0; c < w; ++c) envelope.run(field.data() + c, pass.data() + c, h, w);
        for (int r = 0; r < h; ++r)
            envelope.run(pass.data() + static_cast<std::size_t>(r) * w, field.data() + static_cast<std::size_t>(r) * w,
                         w, 1);
        for (int r = box.r0; r <= box.r1; ++r)
            for (int c = box.c0; c <= box.c1; ++c)
                if (labels(r, c) == label)
                    out(r, c) = field[static_cast<std::size_t>(r - r0) * w + (c - c0)];
    }
    return out;
}

DistanceMap distance_map(const LabelMap& labels, double cap) {
    if (!(cap > 0)) throw std::invalid_argument("distance cap must be positive");
    const Grid<std::int64_t> squared = squared_edge_distance(labels, cap);
    DistanceMap out(labels.rows(), labels.cols(), 0.0f);
    for (std::size_t i = 0; i < squared.size(); ++i) out[i] = capped_distance(squared[i], cap);
    return out;
}

Grid<PixelClass> classify_pixels(const LabelMap& labels, const Mask& aoi) {
    require_same_shape(labels, aoi, "labels vs area of interest");
    Grid<PixelClass> out(labels.rows(), labels.cols(), PixelClass::outie);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!aoi[i]) out[i] = PixelClass::excluded;
        else out[i] = labels[i] ? PixelClass::innie : PixelClass::outie;
    }
    return out;
}

}  // namespace innie
