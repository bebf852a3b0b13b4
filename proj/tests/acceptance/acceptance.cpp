// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: innie_acceptance [criterion ...]   (default: all ten)

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/core.h>

#include "components.hpp"
#include "dihedral.hpp"
#include "evaluate.hpp"
#include "geometry.hpp"
#include "log.hpp"
#include "network.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "postprocess.hpp"
#include "sampler.hpp"
#include "support.hpp"
#include "synth.hpp"

namespace fs = std::filesystem;
using namespace innie;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

// ---- end-to-end benchmark runs, shared by criteria 1-3 ---------------------

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

struct BenchRun {
    double seg = 0;
    double seconds = 0;
};

class Bench {
public:
    explicit Bench(const fs::path& dir) : dir_(dir) {}

    BenchRun run(std::uint64_t seed, int epochs, double fraction) {
        const auto key = std::make_tuple(seed, epochs, fraction);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
        const fs::path root = dir_ / fmt::format("seed{}_E{}_F{}", seed, epochs, fraction);
        const ProjectLayout layout = init_project(root);
        SceneSpec spec;  // 256x256, 25-35 fringe disks, radii 8-16, overlap <= 0.15
        spec.seed = seed;
        generate_dataset(layout, spec, 4, 0.5);

        ProjectConfig config;
        config.scales = {1, 3, 9};
        config.epochs = epochs;
        config.fraction = fraction;
        config.seed = seed;
        const int threads = default_thread_count();
        fmt::print(stderr, "  benchmark seed={} E={} F={} ...\n", seed, epochs, fraction);
        const auto start = Clock::now();
        train_project(layout, config, threads);
        predict_project(layout, config, std::nullopt, threads);
        BenchRun result;
        result.seconds = seconds_since(start);
        result.seg = evaluate_project(layout, config).aggregate;
        fmt::print(stderr, "  -> SEG {:.4f} in {:.0f} s\n", result.seg, result.seconds);
        fs::remove_all(root);
        cache_[key] = result;
        return result;
    }

    std::vector<BenchRun> over_seeds(int epochs, double fraction) {
        std::vector<BenchRun> out;
        for (auto seed : kSeeds) out.push_back(run(seed, epochs, fraction));
        return out;
    }

private:
    fs::path dir_;
    std::map<std::tuple<std::uint64_t, int, double>, BenchRun> cache_;
};

double mean_seg(const std::vector<BenchRun>& runs) {
    double total = 0;
    for (const auto& r : runs) total += r.seg;
    return total / static_cast<double>(runs.size());
}

std::string seg_list(const std::vector<BenchRun>& runs) {
    std::string out;
    for (const auto& r : runs) out += fmt::format("{}{:.4f}", out.empty() ? "" : ",", r.seg);
    return out;
}

Verdict end_to_end(Bench& bench) {
    auto runs = bench.over_seeds(4, 1.0);
    std::vector<double> segs;
    double slowest = 0;
    for (const auto& r : runs) segs.push_back(r.seg), slowest = std::max(slowest, r.seconds);
    std::sort(segs.begin(), segs.end());
    const double median = segs[segs.size() / 2];
    const bool pass = median >= 0.85 && slowest <= 20 * 60;
    return {pass, fmt::format("median SEG {:.4f} (runs {}), slowest seed {:.0f} s on {} thread(s); need >= 0.85, <= 1200 s",
                              median, seg_list(runs), slowest, default_thread_count())};
}

Verdict ef_collapse(Bench& bench) {
    const auto a = bench.over_seeds(4, 0.5);
    const auto b = bench.over_seeds(2, 1.0);
    const double gap = std::abs(mean_seg(a) - mean_seg(b));
    return {gap <= 0.05, fmt::format("mean SEG E=4,F=0.5 {:.4f} vs E=2,F=1 {:.4f}; gap {:.4f}, need <= 0.05", mean_seg(a),
                                     mean_seg(b), gap)};
}

Verdict fraction_tolerance(Bench& bench) {
    // EF = 4 for both
    const auto low = bench.over_seeds(40, 0.1);
    const auto high = bench.over_seeds(4, 1.0);
    const double lo = mean_seg(low), hi = mean_seg(high);
    const bool pass = std::abs(lo - hi) <= 0.10 && hi >= lo - 0.05;
    return {pass, fmt::format("mean SEG F=0.1,E=40 {:.4f} ({}) vs F=1,E=4 {:.4f} ({}); need |diff| <= 0.10 and F=1 >= F=0.1 - 0.05",
                              lo, seg_list(low), hi, seg_list(high))};
}

// ---- oracle and property criteria -----------------------------------------

float oracle_value(std::int64_t squared, double cap) {
    if (squared == 0) return 0.0f;
    if (squared == std::numeric_limits<std::int64_t>::max()) return static_cast<float>(cap);
    return static_cast<float>(std::min(std::sqrt(static_cast<double>(squared)), cap));
}

Verdict distance_oracle() {
    std::mt19937_64 gen(2024);
    std::size_t mismatches = 0, pixels = 0;
    double elapsed = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const LabelMap labels = testing::random_blobs(gen, 64);
        const auto brute = testing::brute_squared_distance(labels);
        for (double cap : {3.0, 10.0}) {
            const auto start = Clock::now();
            const DistanceMap d = distance_map(labels, cap);
            elapsed += seconds_since(start);
            for (std::size_t i = 0; i < labels.size(); ++i) mismatches += d[i] != oracle_value(brute[i], cap);
            pixels += labels.size();
        }
    }
    return {mismatches == 0 && elapsed <= 30,
            fmt::format("{} mismatching pixels of {}; transform time {:.3f} s", mismatches, pixels, elapsed)};
}

Verdict gradient_check() {
    constexpr int kArea = Architecture::kPatch * Architecture::kPatch;
    Network<double> net = Network<double>::initialized(Architecture::reduced(2), 11);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (auto& p : net.parameters()) p += u(gen);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<double>> inputs(2, std::vector<double>(2 * kArea));
    for (auto& x : inputs)
        for (auto& v : x) v = normal(gen);
    const double cls[2] = {1.0, 0.0}, dist[2] = {3.5, 0.0};
    const LossSettings<double> settings{10.0, 1.0};
    auto ws = net.make_workspace();
    auto loss = [&] {
        double total = 0;
        for (int i = 0; i < 2; ++i) total += sample_loss(net.forward(inputs[i], *ws), cls[i], dist[i], settings).total();
        return total / 2;
    };

    std::vector<double> grad(net.parameters().size(), 0.0);
    for (int i = 0; i < 2; ++i) net.accumulate_gradient(inputs[i], cls[i], dist[i], settings, 0.5, grad, *ws);
    const double h = 1e-5;
    double worst = 0;
    auto params = net.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double saved = params[k];
        params[k] = saved + h;
        const double up = loss();
        params[k] = saved - h;
        const double down = loss();
        params[k] = saved;
        const double numeric = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(numeric - grad[k]) / std::max({std::abs(numeric), std::abs(grad[k]), 1e-6}));
    }
    return {worst <= 1e-4, fmt::format("max relative error {:.3e} over {} parameters", worst, params.size())};
}

LabelMap labels_from_rows(const std::vector<std::string>& rows) {
    LabelMap m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()), 0);
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            m(r, c) = rows[r][c] == '.' ? 0 : static_cast<std::uint32_t>(rows[r][c] - '0');
    return m;
}

Verdict seg_truth() {
    const LabelMap truth = labels_from_rows(
        {"........", ".11.....", ".11.....", "........", "....22..", "....22..", "........", "........"});
    const LabelMap half = labels_from_rows(
        {"........", ".11.....", ".11.....", "........", "....33..", "........", "........", "........"});
    const double same = seg_score(truth, truth);
    const double none = seg_score(truth, LabelMap(8, 8, 0));
    const double partial = seg_score(truth, half);
    Mask a(4, 4, 0), b(4, 4, 0);
    for (int r = 0; r < 4; ++r) a(r, 0) = a(r, 1) = 1;
    b(1, 0) = b(1, 1) = b(2, 0) = b(2, 1) = 1;
    for (int c = 0; c < 4; ++c) b(3, c) = 1;
    const double j = jaccard(a, b);
    const bool pass = same == 1.0 && none == 0.0 && partial == 0.5 && std::abs(j - 0.6) <= 1e-12;
    return {pass, fmt::format("SEG {} / {} / {}, Jaccard {}", same, none, partial, j)};
}

// Geodesic distance inside the mask from one pixel, 8-connected steps of 1 and sqrt(2).
Grid<double> geodesic_from(const Mask& mask, Pixel source) {
    Grid<double> dist(mask.rows(), mask.cols(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist(source.row, source.col) = 0;
    queue.push({0.0, dist.index(source.row, source.col)});
    while (!queue.empty()) {
        const auto [d, i] = queue.top();
        queue.pop();
        if (d > dist[i]) continue;
        const int r = static_cast<int>(i / static_cast<std::size_t>(mask.cols()));
        const int c = static_cast<int>(i % static_cast<std::size_t>(mask.cols()));
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                const int rr = r + dr, cc = c + dc;
                if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= mask.rows() || cc >= mask.cols() ||
                    !mask(rr, cc))
                    continue;
                const double nd = d + ((dr != 0 && dc != 0) ? std::sqrt(2.0) : 1.0);
                const std::size_t j = dist.index(rr, cc);
                if (nd < dist[j]) dist[j] = nd, queue.push({nd, j});
            }
    }
    return dist;
}

Verdict watershed_split() {
    const int rows = 48, cols = 48;
    const Pixel left{24, 14}, right{24, 34};
    LabelMap binary(rows, cols, 0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (std::hypot(r - left.row, c - left.col) <= 12 || std::hypot(r - right.row, c - right.col) <= 12)
                binary(r, c) = 1;
    Mask mask(rows, cols, 0);
    for (std::size_t i = 0; i < binary.size(); ++i) mask[i] = binary[i] != 0;
    const DistanceMap dist = distance_map(binary, 100.0);

    const ProjectConfig config;
    const auto markers = find_markers(dist, mask, config.min_marker_separation, config.connectivity);
    const LabelMap labels = watershed(mask, dist, markers, config.connectivity);
    const std::size_t regions = count_labels(labels);

    // boundary: labelled pixels with a 4-neighbour carrying another label
    double worst = 0;
    std::size_t boundary = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (!labels(r, c)) continue;
            bool edge = false;
            for (auto [dr, dc] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                const int rr = r + dr, cc = c + dc;
                if (rr >= 0 && cc >= 0 && rr < rows && cc < cols && labels(rr, cc) && labels(rr, cc) != labels(r, c))
                    edge = true;
            }
            if (edge) ++boundary, worst = std::max(worst, std::abs(c - 24.0));
        }

    // geodesic nearest-marker oracle, seeded at the disk centres
    const auto from_left = geodesic_from(mask, left), from_right = geodesic_from(mask, right);
    std::size_t disagreements = 0;
    const std::uint32_t left_label = labels(left.row, left.col), right_label = labels(right.row, right.col);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i] || std::abs(from_left[i] - from_right[i]) <= 2.0) continue;
        const std::uint32_t expect = from_left[i] < from_right[i] ? left_label : right_label;
        disagreements += labels[i] != expect;
    }
    const bool pass = regions == 2 && left_label != right_label && boundary > 0 && worst <= 1.0 && disagreements == 0;
    return {pass, fmt::format("{} regions, {} boundary pixels, max deviation from bisector {:.1f} px, {} oracle "
                              "disagreements away from the tie band",
                              regions, boundary, worst, disagreements)};
}

Verdict equivariance() {
    std::mt19937_64 gen(77);
    const std::vector<int> scales{1, 3, 9};
    std::size_t checks = 0, failures = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = 20 + static_cast<int>(gen() % 50), cols = 20 + static_cast<int>(gen() % 50);
        const Image image = testing::random_image(gen, rows, cols);
        const PatchSource source(image, scales);
        std::vector<float> a(source.stack_size()), b(source.stack_size());
        for (int o = 0; o < kOrientations; ++o) {
            const PatchSource turned(transform_grid(image, o), scales);
            for (int k = 0; k < 25; ++k) {
                const Pixel p{static_cast<int>(gen() % static_cast<unsigned>(rows)),
                              static_cast<int>(gen() % static_cast<unsigned>(cols))};
                source.extract_stack(p, a);
                augment_stack(a, o);
                turned.extract_stack(transform_pixel(p, rows, cols, o), b);
                ++checks;
                failures += a != b;
            }
        }
    }
    return {failures == 0, fmt::format("{} of {} stacks differ", failures, checks)};
}

// ---- CLI-driven criteria --------------------------------------------------

int run_cli(const std::string& args, const fs::path& cwd) {
    const std::string cmd = "cd '" + cwd.string() + "' && '" INNIE_CLI_PATH "' " + args + " >/dev/null 2>>'" +
                            (cwd / "cli.log").string() + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::vector<char>> snapshot(const fs::path& dir) {
    std::map<std::string, std::vector<char>> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) out[entry.path().filename().string()] = testing::read_bytes(entry.path());
    return out;
}

Verdict determinism(const fs::path& dir) {
    const std::string synth = " --images 4 --size 128 --min-particles 8 --max-particles 12";
    const std::string train = " --scales 1,3,9 --epochs 1 --fraction 0.25 --threads 1";
    std::vector<std::vector<char>> checkpoints;
    std::vector<std::map<std::string, std::vector<char>>> outputs;
    int failures = 0;
    for (const char* name : {"a", "b"}) {
        failures += run_cli(std::string("new ") + name, dir) != 0;
        failures += run_cli(std::string("synth ") + name + synth, dir) != 0;
        failures += run_cli(std::string("train ") + name + train, dir) != 0;
        failures += run_cli(std::string("predict ") + name + " --scales 1,3,9 --threads 1", dir) != 0;
        if (failures) return {false, fmt::format("a CLI step failed; see {}", (dir / "cli.log").string())};
        checkpoints.push_back(testing::read_bytes(dir / name / "models/latest.ckpt"));
        outputs.push_back(snapshot(dir / name / "outputs"));
    }
    const bool same_runs = checkpoints[0] == checkpoints[1] && outputs[0] == outputs[1];
    if (run_cli("predict a --scales 1,3,9 --threads 8", dir) != 0) return {false, "8-thread predict failed"};
    const bool same_threads = snapshot(dir / "a/outputs") == outputs[0];
    return {same_runs && same_threads,
            fmt::format("rerun checkpoint+{} outputs identical: {}; 1 vs 8 threads identical: {}", outputs[0].size(),
                        same_runs ? "yes" : "no", same_threads ? "yes" : "no")};
}

Verdict happy_path(const fs::path& dir) {
    std::vector<int> codes;
    for (const char* step : {"new demo", "synth demo", "train demo", "predict demo", "eval demo"})
        codes.push_back(run_cli(step, dir));
    const bool all_zero = std::all_of(codes.begin(), codes.end(), [](int c) { return c == 0; });
    const bool report = fs::exists(dir / "demo/outputs/seg_report.txt");
    std::string list;
    for (int c : codes) list += fmt::format("{}{}", list.empty() ? "" : ",", c);
    return {all_zero && report, fmt::format("exit codes {}; report {}", list, report ? "written" : "missing")};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    if (wanted.empty())
        for (int k = 1; k <= 10; ++k) wanted.insert(k);

    log::set_level(log::Level::warn);
    testing::TempDir work("acceptance");
    Bench bench(work.path());

    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"end-to-end quality", [&] { return end_to_end(bench); }},
        {"EF collapse", [&] { return ef_collapse(bench); }},
        {"fraction tolerance", [&] { return fraction_tolerance(bench); }},
        {"distance-transform oracle", distance_oracle},
        {"gradient correctness", gradient_check},
        {"SEG unit truth", seg_truth},
        {"watershed split", watershed_split},
        {"determinism", [&] {
             fs::create_directories(work / "determinism");
             return determinism(work / "determinism");
         }},
        {"equivariance", equivariance},
        {"no-code workflow", [&] {
             fs::create_directories(work / "happy");
             return happy_path(work / "happy");
         }},
    };

    int failed = 0;
    for (int k : wanted) {
        if (k < 1 || k > static_cast<int>(criteria.size())) continue;
        const auto& [name, check] = criteria[static_cast<std::size_t>(k - 1)];
        fmt::print(stderr, "criterion {} ({}) ...\n", k, name);
        const auto start = Clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        fmt::print("{} criterion {:>2} {}: {} [{:.0f} s]\n", v.pass ? "PASS" : "FAIL", k, name, v.detail,
                   seconds_since(start));
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
