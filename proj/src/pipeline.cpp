#include "pipeline.hpp"

#include <fmt/core.h>
#include <fmt/os.h>

#include <chrono>
#include <ctime>

#include "checkpoint.hpp"
#include "log.hpp"
#include "postprocess.hpp"
#include "rng.hpp"
#include "sampler.hpp"

namespace innie {

namespace {

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y%m%d_%H%M%S", &tm);
    return buffer;
}

void write_train_report(const std::filesystem::path& file, const TrainReport& r) {
    auto out = fmt::output_file(file.string());
    out.print("E={}\nF={}\nM={}\nN={}\nT={}\nEF={}\noptimizer_steps={}\nseconds={:.3f}\n", r.epoch_count, r.fraction,
              r.available, r.plan_size, r.steps, r.ef, r.optimizer_steps, r.seconds);
    for (const auto& e : r.epochs)
        out.print("epoch.{}=class_loss:{:.6f} distance_loss:{:.6f} seconds:{:.3f}\n", e.epoch, e.class_loss,
                  e.distance_loss, e.seconds);
}

}  // namespace

std::filesystem::path report_path(const ProjectLayout& layout) { return layout.outputs() / "seg_report.txt"; }

TrainOutcome train_project(const ProjectLayout& layout, const ProjectConfig& config, int threads,
                           const EpochCallback& on_epoch) {
    config.validate();
    const auto entries = training_entries(layout);
    if (entries.empty())
        throw ProjectError(ProjectError::Kind::missing_data,
                           "no training images with masks in " + layout.train_images().string() + " / " +
                               layout.train_masks().string());

    std::vector<Image> images;
    std::vector<LabelMap> labels;
    std::vector<Mask> aois;
    for (const auto& e : entries) {
        images.push_back(load_image(e.image));
        labels.push_back(load_labels(*e.mask, config.connectivity));
        require_same_shape(images.back(), labels.back(), ("mask for " + e.stem).c_str());
        aois.push_back(aoi_for(e, images.back().rows(), images.back().cols()));
    }
    log::info("training on {} image(s), scales {}", entries.size(), config.get("scales"));

    const SamplePlan plan = build_sample_plan(labels, aois, config.fraction, config.balance, config.augment,
                                              Rng::derive(config.seed, 1));
    log::info("M={} available pixels ({} innie, {} outie); N={} sampled ({} innie, {} outie)", plan.available,
              plan.innie_pool, plan.outie_pool, plan.entries.size(), plan.innie_count, plan.outie_count);
    const TrainingSet set = make_training_set(images, labels, aois, config.scales, config.dist_cap);

    Architecture arch;
    arch.in_channels = static_cast<int>(config.scales.size());
    Network<float> net = Network<float>::initialized(arch, Rng::derive(config.seed, 2));

    TrainSettings settings;
    settings.epochs = config.epochs;
    settings.batch_size = config.batch_size;
    settings.learning_rate = config.learning_rate;
    settings.dist_cap = config.dist_cap;
    settings.fraction = config.fraction;
    settings.augment = config.augment;
    settings.seed = Rng::derive(config.seed, 3);
    settings.threads = threads;

    auto progress = [&](const EpochStats& s, const TrainReport& r) {
        log::info("epoch {}/{}: class loss {:.4f}, distance loss {:.4f} ({:.1f}s)", s.epoch, r.epoch_count, s.class_loss,
                  s.distance_loss, s.seconds);
        if (on_epoch) on_epoch(s, r);
    };
    TrainOutcome outcome;
    outcome.report = train_network(net, plan, set, settings, progress);

    std::filesystem::create_directories(layout.models());
    const Checkpoint ck{std::move(net), config.scales, config.dist_cap, config.seed};
    outcome.checkpoint = layout.models() / ("model_" + timestamp() + ".ckpt");
    outcome.latest = layout.models() / "latest.ckpt";
    save_checkpoint(ck, outcome.checkpoint);
    save_checkpoint(ck, outcome.latest);
    write_train_report(layout.models() / "latest_report.txt", outcome.report);
    return outcome;
}

PredictOutcome predict_project(const ProjectLayout& layout, const ProjectConfig& config,
                               const std::optional<std::filesystem::path>& model, int threads) {
    config.validate();
    const std::filesystem::path model_path = model ? *model : layout.models() / "latest.ckpt";
    if (!std::filesystem::exists(model_path))
        throw ProjectError(ProjectError::Kind::missing_data,
                           "no trained model at " + model_path.string() + "; run train first or pass --model");
    const Checkpoint ck = load_checkpoint(model_path);
    require_scales(ck, config.scales);

    const auto entries = test_entries(layout);
    if (entries.empty())
        throw ProjectError(ProjectError::Kind::missing_data, "no test images in " + layout.test_images().string());
    std::filesystem::create_directories(layout.outputs());

    PredictOutcome outcome;
    for (const auto& e : entries) {
        const Image image = load_image(e.image);
        const Mask aoi = aoi_for(e, image.rows(), image.cols());
        PredictionMaps maps = predict_maps(ck.network, image, aoi, ck.scales, config.dist_cap, threads);
        outcome.evaluations += maps.evaluations;
        const Segmentation seg = segment(std::move(maps), config);
        log::info("{}: {} region(s)", e.stem, seg.markers.size());
        auto files = write_outputs(e.stem, seg, config.output_mode, config.dist_cap, layout.outputs());
        outcome.files.insert(outcome.files.end(), files.begin(), files.end());
        ++outcome.images;
    }
    return outcome;
}

SegReport evaluate_project(const ProjectLayout& layout, const ProjectConfig& config) {
    std::vector<LabeledImage> truth, predicted;
    for (const auto& e : test_entries(layout)) {
        if (!e.mask) continue;
        truth.push_back({e.stem, load_labels(*e.mask, config.connectivity)});
        const auto pred_file = layout.outputs() / (e.stem + "_labels.png");
        if (std::filesystem::exists(pred_file)) predicted.push_back({e.stem, load_labels(pred_file, config.connectivity)});
    }
    if (truth.empty())
        throw ProjectError(ProjectError::Kind::missing_data,
                           "no ground truth: put masks for the test images in " + layout.test_masks().string());
    const SegReport report = seg_report(truth, predicted);
    std::filesystem::create_directories(layout.outputs());
    auto out = fmt::output_file(report_path(layout).string());
    out.print("{}", render_report(report));
    return report;
}

}  // namespace innie
