#include "config.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace innie {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw ConfigError(fmt::format("invalid value '{}' for {}: expected {}", value, key, expected));
}

template <class Int>
Int parse_int(std::string_view key, std::string_view value) {
    Int out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty()) bad_value(key, value, "an integer");
    return out;
}

double parse_double(std::string_view key, std::string_view value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end || value.empty() || !std::isfinite(out)) bad_value(key, value, "a number");
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    std::string v(value);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    bad_value(key, value, "true or false");
}

std::vector<int> parse_scales(std::string_view key, std::string_view value) {
    std::vector<int> scales;
    std::size_t start = 0;
    while (start <= value.size()) {
        const std::size_t comma = value.find(',', start);
        const std::string_view item = trim(value.substr(start, comma == std::string_view::npos ? value.npos : comma - start));
        if (item.empty()) bad_value(key, value, "a comma-separated list of positive integers");
        scales.push_back(parse_int<int>(key, item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return scales;
}

std::string join_scales(const std::vector<int>& scales) {
    std::string out;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(scales[i]);
    }
    return out;
}

struct KeyDoc {
    const char* key;
    const char* doc;
};

const KeyDoc kDocs[] = {
    {"scales", "Patch scales fed to the network, comma-separated. Scale s covers a (25*s)-pixel square\n"
               "# around each pixel, block-averaged down to 25x25. Odd scales keep the window centred."},
    {"dist_cap", "Distance-to-edge values are capped at this many pixels."},
    {"fraction", "Fraction (0,1] of the available training pixels used per epoch."},
    {"epochs", "Number of passes over the sampled training pixels."},
    {"balance", "Share of innie (inside-region) pixels among training samples, in [0,1].\n"
                "# 0.5 = innies and outies equally represented; set it to the natural innie share to\n"
                "# sample in the ratio the pixels occur."},
    {"augment", "Train on randomly rotated/flipped patches (true/false)."},
    {"threshold", "Probability threshold in (0,1) separating innies from outies."},
    {"batch_size", "Samples per optimizer step."},
    {"learning_rate", "Optimizer step size."},
    {"seed", "Random seed for sampling, augmentation and weight initialisation."},
    {"output_mode", "What predict writes: labels, binary, distance or all."},
    {"min_marker_separation", "Minimum distance in pixels between watershed seeds in one region."},
    {"connectivity", "Pixel connectivity for masks and watershed: 4 or 8."},
    {"train_test_split", "Share of synthesized images placed in the training folders, in [0,1]."},
};

}  // namespace

std::string_view to_string(OutputMode mode) {
    switch (mode) {
        case OutputMode::labels: return "labels";
        case OutputMode::binary: return "binary";
        case OutputMode::distance: return "distance";
        case OutputMode::all: return "all";
    }
    return "all";
}

const std::vector<std::string>& ProjectConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& d : kDocs) out.emplace_back(d.key);
        return out;
    }();
    return names;
}

void ProjectConfig::set(std::string_view key, std::string_view raw) {
    const std::string_view value = trim(raw);
    if (key == "scales") {
        auto parsed = parse_scales(key, value);
        std::set<int> seen;
        for (int s : parsed) {
            if (s < 1) bad_value(key, value, "scales >= 1");
            if (!seen.insert(s).second) bad_value(key, value, "distinct scales");
        }
        scales = std::move(parsed);
    } else if (key == "dist_cap") {
        const double v = parse_double(key, value);
        if (!(v > 0)) bad_value(key, value, "a positive number");
        dist_cap = v;
    } else if (key == "fraction") {
        const double v = parse_double(key, value);
        if (!(v > 0 && v <= 1)) bad_value(key, value, "a number in (0,1]");
        fraction = v;
    } else if (key == "epochs") {
        const int v = parse_int<int>(key, value);
        if (v < 1) bad_value(key, value, "a positive integer");
        epochs = v;
    } else if (key == "balance") {
        const double v = parse_double(key, value);
        if (!(v >= 0 && v <= 1)) bad_value(key, value, "a number in [0,1]");
        balance = v;
    } else if (key == "augment") {
        augment = parse_bool(key, value);
    } else if (key == "threshold") {
        const double v = parse_double(key, value);
        if (!(v > 0 && v < 1)) bad_value(key, value, "a number in (0,1)");
        threshold = v;
    } else if (key == "batch_size") {
        const int v = parse_int<int>(key, value);
        if (v < 1) bad_value(key, value, "a positive integer");
        batch_size = v;
    } else if (key == "learning_rate") {
        const double v = parse_double(key, value);
        if (!(v > 0)) bad_value(key, value, "a positive number");
        learning_rate = v;
    } else if (key == "seed") {
        seed = parse_int<std::uint64_t>(key, value);
    } else if (key == "output_mode") {
        if (value == "labels") output_mode = OutputMode::labels;
        else if (value == "binary") output_mode = OutputMode::binary;
        else if (value == "distance") output_mode = OutputMode::distance;
        else if (value == "all") output_mode = OutputMode::all;
        else bad_value(key, value, "one of labels, binary, distance, all");
    } else if (key == "min_marker_separation") {
        const double v = parse_double(key, value);
        if (!(v > 0)) bad_value(key, value, "a positive number");
        min_marker_separation = v;
    } else if (key == "connectivity") {
        const int v = parse_int<int>(key, value);
        if (v != 4 && v != 8) bad_value(key, value, "4 or 8");
        connectivity = v;
    } else if (key == "train_test_split") {
        const double v = parse_double(key, value);
        if (!(v >= 0 && v <= 1)) bad_value(key, value, "a number in [0,1]");
        train_test_split = v;
    } else {
        throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
}

std::string ProjectConfig::get(std::string_view key) const {
    if (key == "scales") return join_scales(scales);
    if (key == "dist_cap") return fmt::format("{}", dist_cap);
    if (key == "fraction") return fmt::format("{}", fraction);
    if (key == "epochs") return std::to_string(epochs);
    if (key == "balance") return fmt::format("{}", balance);
    if (key == "augment") return augment ? "true" : "false";
    if (key == "threshold") return fmt::format("{}", threshold);
    if (key == "batch_size") return std::to_string(batch_size);
    if (key == "learning_rate") return fmt::format("{}", learning_rate);
    if (key == "seed") return std::to_string(seed);
    if (key == "output_mode") return std::string(to_string(output_mode));
    if (key == "min_marker_separation") return fmt::format("{}", min_marker_separation);
    if (key == "connectivity") return std::to_string(connectivity);
    if (key == "train_test_split") return fmt::format("{}", train_test_split);
    throw ConfigError(fmt::format("unknown config key '{}'", key));
}

void ProjectConfig::validate() const {
    // Round-trip every field through its own validator.
    ProjectConfig probe;
    for (const auto& key : keys()) probe.set(key, get(key));
    if (scales.empty()) throw ConfigError("at least one scale is required");
}

ProjectConfig parse_config(std::string_view text, const std::string& source) {
    ProjectConfig config;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("{}:{}: expected key=value, got '{}'", source, line_no, line));
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (!seen.insert(std::string(key)).second)
            throw ConfigError(fmt::format("{}:{}: key '{}' given twice", source, line_no, key));
        try {
            config.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}:{}: {}", source, line_no, e.what()));
        }
    }
    config.validate();
    return config;
}

ProjectConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), file.string());
}

std::string render_config(const ProjectConfig& config) {
    std::string out = "# Project settings. One key=value per line; '#' starts a comment.\n"
                      "# Unknown keys are rejected. Command-line flags override these values.\n";
    for (const auto& d : kDocs) {
        out += fmt::format("\n# {}\n{}={}\n", d.doc, d.key, config.get(d.key));
    }
    return out;
}

void save_config(const ProjectConfig& config, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write config file " + file.string());
    out << render_config(config);
    if (!out) throw ConfigError("cannot write config file " + file.string());
}

}  // namespace innie
