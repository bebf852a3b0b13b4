#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace innie {

enum class OutputMode { labels, binary, distance, all };

std::string_view to_string(OutputMode mode);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every user-tunable setting of a project. Defaults are the documented ones.
struct ProjectConfig {
    static constexpr int patch_side = 25;

    std::vector<int> scales{1, 3, 9, 27};
    double dist_cap = 10.0;
    double fraction = 1.0;
    int epochs = 2;
    double balance = 0.5;  // target innie share of the training samples
    bool augment = true;
    double threshold = 0.5;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    OutputMode output_mode = OutputMode::all;
    double min_marker_separation = 3.0;
    int connectivity = 8;
    double train_test_split = 0.5;  // share of synthesized images placed in the training folders

    /// Key names in file order.
    static const std::vector<std::string>& keys();

    /// Parse and assign one key. Throws ConfigError on an unknown key, an
    /// unparseable value, or a value outside the key's valid range.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;

    void validate() const;

    bool operator==(const ProjectConfig&) const = default;
};

/// Parse `key=value` lines; `#` starts a comment, blank lines are ignored.
/// Missing keys keep their defaults.
ProjectConfig parse_config(std::string_view text, const std::string& source = "<config>");
ProjectConfig load_config(const std::filesystem::path& file);

/// The file text for a config, every key present with a comment above it.
std::string render_config(const ProjectConfig& config);
void save_config(const ProjectConfig& config, const std::filesystem::path& file);

}  // namespace innie
