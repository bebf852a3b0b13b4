#include <CLI11.hpp>
#include <innie/innie.h>

#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct ConfigDeleter {
    void operator()(innie_config* c) const { innie_config_free(c); }
};
using ConfigPtr = std::unique_ptr<innie_config, ConfigDeleter>;

struct Failure {
    int code;
    std::string message;
};

void check(innie_status status, int code = kExitRuntime) {
    if (status != INNIE_OK) throw Failure{code, innie_last_error()};
}

std::string flag_name(std::string key) {
    for (char& ch : key)
        if (ch == '_') ch = '-';
    return "--" + key;
}

std::string config_value(const innie_config* config, const char* key) {
    size_t required = 0;
    check(innie_config_get(config, key, nullptr, 0, &required));
    std::string value(required, '\0');
    check(innie_config_get(config, key, value.data(), value.size(), nullptr));
    value.resize(required - 1);
    return value;
}

struct Common {
    std::string project;
    std::map<std::string, std::optional<std::string>> overrides;
    bool save = false;
    bool dry_run = false;
    int threads = 0;
};

void add_config_flags(CLI::App* cmd, Common& common) {
    cmd->add_option("project", common.project, "project directory")->required();
    for (size_t i = 0; i < innie_config_key_count(); ++i) {
        const std::string key = innie_config_key(i);
        cmd->add_option(flag_name(key), common.overrides[key], "override config key " + key);
    }
    cmd->add_flag("--save", common.save, "write the overrides back to config.txt");
    cmd->add_flag("--dry-run", common.dry_run, "print the effective configuration and exit");
    cmd->add_option("--threads", common.threads, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
}

// flags > config.txt > defaults
ConfigPtr effective_config(const Common& common) {
    innie_config* raw = nullptr;
    check(innie_project_config(common.project.c_str(), &raw));
    ConfigPtr config(raw);
    for (const auto& [key, value] : common.overrides)
        if (value) check(innie_config_set(config.get(), key.c_str(), value->c_str()), kExitUsage);
    if (common.save) {
        check(innie_config_save(config.get(), (std::filesystem::path(common.project) / "config.txt").c_str()));
        std::fprintf(stderr, "saved overrides to %s/config.txt\n", common.project.c_str());
    }
    return config;
}

void print_config(const innie_config* config) {
    for (size_t i = 0; i < innie_config_key_count(); ++i) {
        const char* key = innie_config_key(i);
        std::printf("%s=%s\n", key, config_value(config, key).c_str());
    }
}

struct SynthFlags {
    innie_synth_options options{};
    std::string pattern = "fringe";
};

int run(int argc, char** argv) {
    CLI::App app{"innie: per-pixel CNN segmentation with watershed post-processing"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(innie_version()));
    int verbosity = 2;
    app.add_option("--verbosity", verbosity, "0 quiet, 1 warnings, 2 progress, 3 debug")->check(CLI::Range(0, 3));

    std::string new_path;
    auto* cmd_new = app.add_subcommand("new", "create a project folder tree with a default config.txt");
    cmd_new->add_option("project", new_path, "project directory")->required();

    Common common;
    SynthFlags synth;
    innie_synth_defaults(&synth.options);
    std::string model;

    auto* cmd_synth = app.add_subcommand("synth", "fill the project with a synthetic disk dataset");
    add_config_flags(cmd_synth, common);
    auto& o = synth.options;
    cmd_synth->add_option("--images", o.images, "number of scenes")->capture_default_str();
    cmd_synth->add_option("--size", o.size, "canvas side in pixels")->capture_default_str();
    cmd_synth->add_option("--min-particles", o.min_particles)->capture_default_str();
    cmd_synth->add_option("--max-particles", o.max_particles)->capture_default_str();
    cmd_synth->add_option("--min-radius", o.min_radius)->capture_default_str();
    cmd_synth->add_option("--max-radius", o.max_radius)->capture_default_str();
    cmd_synth->add_option("--max-overlap", o.max_overlap)->capture_default_str();
    cmd_synth->add_option("--pattern", synth.pattern)->check(CLI::IsMember({"fringe", "flat"}))->capture_default_str();
    cmd_synth->add_option("--noise", o.noise_sigma, "noise standard deviation")->capture_default_str();
    cmd_synth->add_option("--blur", o.blur_sigma, "Gaussian blur sigma")->capture_default_str();
    cmd_synth->add_option("--illumination", o.illumination, "illumination gradient amplitude")->capture_default_str();

    auto* cmd_train = app.add_subcommand("train", "train a model on train_images/train_masks");
    add_config_flags(cmd_train, common);

    auto* cmd_predict = app.add_subcommand("predict", "segment every image in test_images");
    add_config_flags(cmd_predict, common);
    cmd_predict->add_option("--model", model, "checkpoint file (default models/latest.ckpt)");

    auto* cmd_eval = app.add_subcommand("eval", "score outputs against test_masks");
    add_config_flags(cmd_eval, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    innie_set_verbosity(verbosity);

    try {
        if (cmd_new->parsed()) {
            check(innie_project_init(new_path.c_str()));
            std::fprintf(stderr, "created project %s\n", new_path.c_str());
            return kExitOk;
        }

        const ConfigPtr config = effective_config(common);
        if (common.dry_run) {
            print_config(config.get());
            return kExitOk;
        }

        if (cmd_synth->parsed()) {
            o.fringe = synth.pattern == "fringe";
            size_t train = 0, test = 0;
            check(innie_synth(common.project.c_str(), config.get(), &o, &train, &test));
            std::printf("train_images=%zu\ntest_images=%zu\n", train, test);
        } else if (cmd_train->parsed()) {
            innie_train_report r{};
            std::string path(4096, '\0');
            check(innie_train(common.project.c_str(), config.get(), common.threads, &r, path.data(), path.size()));
            path.resize(path.find('\0'));
            std::printf("E=%d\nF=%s\nM=%llu\nN=%llu\nT=%llu\nEF=%.6g\n", r.epochs,
                        config_value(config.get(), "fraction").c_str(), static_cast<unsigned long long>(r.available),
                        static_cast<unsigned long long>(r.plan_size), static_cast<unsigned long long>(r.steps), r.ef);
            std::printf("class_loss=%.6f\ndistance_loss=%.6f\nseconds=%.1f\ncheckpoint=%s\n", r.final_class_loss,
                        r.final_distance_loss, r.seconds, path.c_str());
        } else if (cmd_predict->parsed()) {
            size_t images = 0, files = 0;
            check(innie_predict(common.project.c_str(), config.get(), model.empty() ? nullptr : model.c_str(),
                                common.threads, &images, &files));
            std::printf("images=%zu\nfiles=%zu\n", images, files);
        } else if (cmd_eval->parsed()) {
            double seg = 0;
            size_t regions = 0;
            check(innie_evaluate(common.project.c_str(), config.get(), &seg, &regions));
            std::printf("SEG=%.6f\ntrue_regions=%zu\nreport=%s\n", seg, regions,
                        (std::filesystem::path(common.project) / "outputs" / "seg_report.txt").c_str());
        }
    } catch (const Failure& f) {
        std::fprintf(stderr, "error: %s\n", f.message.c_str());
        return f.code;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
