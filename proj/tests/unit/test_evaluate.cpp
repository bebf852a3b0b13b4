#include <doctest.h>

#include <map>
#include <numeric>
#include <random>

#include "evaluate.hpp"
#include "support.hpp"

using namespace innie;

namespace {

Mask from_rows(const std::vector<std::string>& rows) {
    Mask m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), 0);
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c] == '#';
    return m;
}

LabelMap labels_from_rows(const std::vector<std::string>& rows) {
    LabelMap m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), 0);
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c] == '.' ? 0 : static_cast<std::uint32_t>(rows[r][c] - '0');
    return m;
}

// Direct transcription of the scoring rule for cross-checking.
double seg_by_hand(const LabelMap& truth, const LabelMap& pred) {
    std::map<std::uint32_t, std::size_t> area_t, area_p;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> overlap;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i]) ++area_t[truth[i]];
        if (pred[i]) ++area_p[pred[i]];
        if (truth[i] && pred[i]) ++overlap[{truth[i], pred[i]}];
    }
    double total = 0;
    for (auto [t, at] : area_t) {
        double best = 0;
        for (auto [p, ap] : area_p) {
            const auto it = overlap.find({t, p});
            const std::size_t o = it == overlap.end() ? 0 : it->second;
            if (2 * o > at) best = static_cast<double>(o) / static_cast<double>(at + ap - o);
        }
        total += best;
    }
    return total / static_cast<double>(area_t.size());
}

}  // namespace

TEST_CASE("jaccard examples") {
    const Mask a = from_rows({"##..", "##..", "##..", "##.."});
    CHECK(jaccard(a, a) == 1.0);
    CHECK(jaccard(a, from_rows({"..##", "..##", "..##", "..##"})) == 0.0);
    // |A| = 8, |B| = 8, overlap 6 -> 6 / 10
    const Mask b = from_rows({"....", "##..", "##..", "####"});
    CHECK(jaccard(a, b) == doctest::Approx(0.6));
    CHECK(jaccard(a, Mask(4, 4, 0)) == 0.0);
    CHECK_THROWS_AS(jaccard(Mask(4, 4, 0), a), EvaluationError);
    CHECK_THROWS_AS(jaccard(a, Mask(3, 4, 0)), ShapeMismatch);
}

TEST_CASE("seg examples") {
    const LabelMap truth = labels_from_rows({
        "........",
        ".11.....",
        ".11.....",
        "........",
        "....22..",
        "....22..",
        "........",
        "........",
    });
    CHECK(seg_score(truth, truth) == 1.0);
    CHECK(seg_score(truth, LabelMap(8, 8, 0)) == 0.0);
    // second region overlapped on exactly half its pixels: fails the strict rule
    const LabelMap pred = labels_from_rows({
        "........",
        ".11.....",
        ".11.....",
        "........",
        "....33..",
        "........",
        "........",
        "........",
    });
    CHECK(seg_score(truth, pred) == 0.5);
    const auto matches = match_regions(truth, pred);
    REQUIRE(matches.size() == 2);
    CHECK(matches[1].overlap == 2);
    CHECK_FALSE(matches[1].predicted.has_value());
    CHECK(matches[1].jaccard == 0.0);
}

TEST_CASE("seg errors") {
    CHECK_THROWS_AS(seg_score(LabelMap(4, 4, 0), LabelMap(4, 4, 0)), EvaluationError);
    CHECK_THROWS_AS(seg_score(LabelMap(4, 4, 1), LabelMap(4, 5, 1)), ShapeMismatch);
}

TEST_CASE("seg properties on random maps") {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 100; ++trial) {
        const LabelMap truth = testing::random_blobs(gen, 32);
        if (std::all_of(truth.values().begin(), truth.values().end(), [](auto v) { return v == 0; })) continue;
        LabelMap pred(truth.rows(), truth.cols(), 0);
        if (trial % 2) {
            // shifted copy of the truth
            for (int r = 0; r < truth.rows(); ++r)
                for (int c = 1; c < truth.cols(); ++c) pred(r, c) = truth(r, c - 1);
        } else {
            pred = testing::random_blobs(gen, 32);
            if (!pred.same_shape(truth)) continue;
        }
        CHECK(seg_score(truth, truth) == 1.0);
        const double s = seg_score(truth, pred);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(s == doctest::Approx(seg_by_hand(truth, pred)).epsilon(1e-12));
        // relabelling either side changes nothing
        LabelMap permuted = pred, truth_perm = truth;
        for (auto& v : permuted.values())
            if (v) v = 1000 - v;
        for (auto& v : truth_perm.values())
            if (v) v = v * 7 + 3;
        CHECK(seg_score(truth, permuted) == s);
        CHECK(seg_score(truth_perm, pred) == s);
    }
}

TEST_CASE("report aggregate is weighted by true-region count") {
    LabelMap one(4, 4, 0);
    one(0, 0) = 1;
    LabelMap three(4, 8, 0);
    three(0, 0) = three(0, 1) = 1;
    three(2, 0) = three(2, 1) = 2;
    three(3, 6) = three(3, 7) = 3;
    // image b: region 1 exact (1), region 2 inside a 4-pixel region (0.5), region 3 split in half (0)
    LabelMap three_pred(4, 8, 0);
    three_pred(0, 0) = three_pred(0, 1) = 1;
    three_pred(2, 0) = three_pred(2, 1) = three_pred(2, 2) = three_pred(2, 3) = 2;  // 2 / 4 = 0.5
    three_pred(3, 6) = 3;
    three_pred(3, 7) = 4;  // 1 of 2 pixels: 0
    REQUIRE(seg_score(three, three_pred) == doctest::Approx(0.5));

    const std::vector<LabeledImage> truth{{"a", one}, {"b", three}};
    const std::vector<LabeledImage> pred{{"b", three_pred}, {"a", one}};
    const SegReport report = seg_report(truth, pred);
    CHECK(report.true_regions == 4);
    CHECK(report.aggregate == doctest::Approx(0.625));
    const std::string text = render_report(report);
    CHECK(text.find("image\ttrue_regions\tseg\n") == 0);
    CHECK(text.find("AGGREGATE\t4\t0.625") != std::string::npos);

    const std::vector<LabeledImage> just_a{{"a", one}};
    CHECK(seg_report(just_a, pred).aggregate == 1.0);
}

TEST_CASE("report lists missing predictions") {
    const std::vector<LabeledImage> truth{{"x", LabelMap(2, 2, 1)}, {"y", LabelMap(2, 2, 1)}};
    try {
        seg_report(truth, {});
        FAIL("expected an error");
    } catch (const EvaluationError& e) {
        const std::string what = e.what();
        CHECK(what.find('x') != std::string::npos);
        CHECK(what.find('y') != std::string::npos);
    }
}
