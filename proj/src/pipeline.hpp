#pragma once

#include <filesystem>
#include <optional>

#include "config.hpp"
#include "evaluate.hpp"
#include "project.hpp"
#include "trainer.hpp"

namespace innie {

struct TrainOutcome {
    TrainReport report;
    std::filesystem::path checkpoint;  // models/model_<timestamp>.ckpt
    std::filesystem::path latest;      // models/latest.ckpt
};

/// Plan, train and checkpoint on every training image that has a mask.
TrainOutcome train_project(const ProjectLayout& layout, const ProjectConfig& config, int threads,
                           const EpochCallback& on_epoch = {});

struct PredictOutcome {
    std::size_t images = 0;
    std::size_t evaluations = 0;
    std::vector<std::filesystem::path> files;
};

/// Segment every test image with the given model (default models/latest.ckpt)
/// and write the configured outputs.
PredictOutcome predict_project(const ProjectLayout& layout, const ProjectConfig& config,
                               const std::optional<std::filesystem::path>& model, int threads);

/// SEG of outputs/<stem>_labels.png against test_masks/<stem>; writes
/// outputs/seg_report.txt.
SegReport evaluate_project(const ProjectLayout& layout, const ProjectConfig& config);

std::filesystem::path report_path(const ProjectLayout& layout);

}  // namespace innie
