#include "innie/innie.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>

#include "checkpoint.hpp"
#include "config.hpp"
#include "evaluate.hpp"
#include "geometry.hpp"
#include "log.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "postprocess.hpp"
#include "project.hpp"
#include "raster.hpp"
#include "synth.hpp"

struct innie_config {
    innie::ProjectConfig value;
};

struct innie_model {
    innie::Checkpoint checkpoint;
};

namespace {

thread_local std::string last_error;

innie_status fail(innie_status status, const std::string& message) {
    last_error = message;
    return status;
}

// Exception -> status translation shared by every entry point.
template <class Fn>
innie_status guarded(Fn&& fn) noexcept {
    try {
        fn();
        return INNIE_OK;
    } catch (const innie::ProjectError& e) {
        switch (e.kind()) {
            case innie::ProjectError::Kind::exists: return fail(INNIE_ERR_PROJECT_EXISTS, e.what());
            case innie::ProjectError::Kind::not_writable: return fail(INNIE_ERR_NOT_WRITABLE, e.what());
            case innie::ProjectError::Kind::not_initialized: return fail(INNIE_ERR_NOT_A_PROJECT, e.what());
            case innie::ProjectError::Kind::missing_data: return fail(INNIE_ERR_MISSING_DATA, e.what());
        }
        return fail(INNIE_ERR_INTERNAL, e.what());
    } catch (const innie::ConfigError& e) {
        return fail(INNIE_ERR_CONFIG, e.what());
    } catch (const innie::ShapeMismatch& e) {
        return fail(INNIE_ERR_SHAPE_MISMATCH, e.what());
    } catch (const innie::RasterError& e) {
        return fail(INNIE_ERR_IO, e.what());
    } catch (const innie::ArchitectureMismatch& e) {
        return fail(INNIE_ERR_ARCH_MISMATCH, e.what());
    } catch (const innie::ChannelMismatch& e) {
        return fail(INNIE_ERR_ARCH_MISMATCH, e.what());
    } catch (const innie::CheckpointError& e) {
        return fail(INNIE_ERR_CHECKPOINT, e.what());
    } catch (const innie::PlanError& e) {
        return fail(INNIE_ERR_TRAINING, e.what());
    } catch (const innie::TrainingDiverged& e) {
        return fail(INNIE_ERR_TRAINING, e.what());
    } catch (const innie::EvaluationError& e) {
        return fail(INNIE_ERR_EVALUATION, e.what());
    } catch (const innie::SynthError& e) {
        return fail(INNIE_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(INNIE_ERR_IO, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(INNIE_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(INNIE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(INNIE_ERR_INTERNAL, "unknown error");
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void require_grid(const void* p, int rows, int cols) {
    require(p != nullptr, "null grid pointer");
    require(rows >= 0 && cols >= 0, "negative grid dimension");
}

int resolve_threads(int threads) { return threads > 0 ? threads : innie::default_thread_count(); }

void copy_out(const std::string& value, char* buffer, std::size_t size) {
    if (!buffer || size == 0) return;
    const std::size_t n = std::min(size - 1, value.size());
    std::memcpy(buffer, value.data(), n);
    buffer[n] = '\0';
}

}  // namespace

extern "C" {

const char* innie_version(void) { return "1.0.0"; }

const char* innie_last_error(void) { return last_error.c_str(); }

const char* innie_status_name(innie_status status) {
    switch (status) {
        case INNIE_OK: return "ok";
        case INNIE_ERR_INVALID_ARGUMENT: return "invalid argument";
        case INNIE_ERR_CONFIG: return "config error";
        case INNIE_ERR_PROJECT_EXISTS: return "project exists";
        case INNIE_ERR_NOT_WRITABLE: return "not writable";
        case INNIE_ERR_NOT_A_PROJECT: return "not a project";
        case INNIE_ERR_MISSING_DATA: return "missing data";
        case INNIE_ERR_IO: return "i/o error";
        case INNIE_ERR_SHAPE_MISMATCH: return "shape mismatch";
        case INNIE_ERR_CHECKPOINT: return "checkpoint error";
        case INNIE_ERR_ARCH_MISMATCH: return "architecture mismatch";
        case INNIE_ERR_TRAINING: return "training error";
        case INNIE_ERR_EVALUATION: return "evaluation error";
        case INNIE_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

void innie_set_verbosity(int level) {
    innie::log::set_level(static_cast<innie::log::Level>(std::clamp(level, 0, 3)));
}

innie_status innie_config_default(innie_config** out) {
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        *out = new innie_config{};
    });
}

innie_status innie_config_load(const char* file, innie_config** out) {
    return guarded([&] {
        require(file && out, "null argument");
        *out = new innie_config{innie::load_config(file)};
    });
}

innie_status innie_config_save(const innie_config* config, const char* file) {
    return guarded([&] {
        require(config && file, "null argument");
        innie::save_config(config->value, file);
    });
}

void innie_config_free(innie_config* config) { delete config; }

innie_status innie_config_set(innie_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config && key && value, "null argument");
        config->value.set(key, value);
    });
}

innie_status innie_config_get(const innie_config* config, const char* key, char* buffer, size_t size,
                              size_t* required) {
    return guarded([&] {
        require(config && key, "null argument");
        const std::string value = config->value.get(key);
        if (required) *required = value.size() + 1;
        copy_out(value, buffer, size);
    });
}

size_t innie_config_key_count(void) { return innie::ProjectConfig::keys().size(); }

const char* innie_config_key(size_t index) {
    const auto& keys = innie::ProjectConfig::keys();
    return index < keys.size() ? keys[index].c_str() : nullptr;
}

innie_status innie_project_init(const char* root) {
    return guarded([&] {
        require(root != nullptr, "null project path");
        innie::init_project(root);
    });
}

innie_status innie_project_config(const char* root, innie_config** out) {
    return guarded([&] {
        require(root && out, "null argument");
        const auto layout = innie::open_project(root);
        *out = new innie_config{innie::load_config(layout.config_file())};
    });
}

void innie_synth_defaults(innie_synth_options* options) {
    if (!options) return;
    const innie::SceneSpec spec;
    *options = innie_synth_options{4,
                                   spec.rows,
                                   spec.min_particles,
                                   spec.max_particles,
                                   spec.min_radius,
                                   spec.max_radius,
                                   spec.max_overlap,
                                   spec.pattern == innie::ParticlePattern::fringe,
                                   spec.noise_sigma,
                                   spec.blur_sigma,
                                   spec.illumination};
}

innie_status innie_synth(const char* root, const innie_config* config, const innie_synth_options* options,
                         size_t* train_images, size_t* test_images) {
    return guarded([&] {
        require(root && config && options, "null argument");
        const auto layout = innie::open_project(root);
        innie::SceneSpec spec;
        spec.rows = spec.cols = options->size;
        spec.min_particles = options->min_particles;
        spec.max_particles = options->max_particles;
        spec.min_radius = options->min_radius;
        spec.max_radius = options->max_radius;
        spec.max_overlap = options->max_overlap;
        spec.pattern = options->fringe ? innie::ParticlePattern::fringe : innie::ParticlePattern::flat;
        spec.noise_sigma = options->noise_sigma;
        spec.blur_sigma = options->blur_sigma;
        spec.illumination = options->illumination;
        spec.seed = config->value.seed;
        const auto summary = innie::generate_dataset(layout, spec, options->images, config->value.train_test_split);
        if (train_images) *train_images = summary.train;
        if (test_images) *test_images = summary.test;
    });
}

innie_status innie_train(const char* root, const innie_config* config, int threads, innie_train_report* report,
                         char* model_path, size_t model_path_size) {
    return guarded([&] {
        require(root && config, "null argument");
        const auto layout = innie::open_project(root);
        const auto outcome = innie::train_project(layout, config->value, resolve_threads(threads));
        if (report) {
            const auto& r = outcome.report;
            *report = innie_train_report{r.epoch_count,
                                         r.fraction,
                                         r.available,
                                         r.plan_size,
                                         r.steps,
                                         r.ef,
                                         r.epochs.empty() ? 0.0 : r.epochs.back().class_loss,
                                         r.epochs.empty() ? 0.0 : r.epochs.back().distance_loss,
                                         r.seconds};
        }
        copy_out(outcome.checkpoint.string(), model_path, model_path_size);
    });
}

innie_status innie_predict(const char* root, const innie_config* config, const char* model, int threads,
                           size_t* images, size_t* files_written) {
    return guarded([&] {
        require(root && config, "null argument");
        const auto layout = innie::open_project(root);
        std::optional<std::filesystem::path> model_path;
        if (model && *model) model_path = model;
        const auto outcome = innie::predict_project(layout, config->value, model_path, resolve_threads(threads));
        if (images) *images = outcome.images;
        if (files_written) *files_written = outcome.files.size();
    });
}

innie_status innie_evaluate(const char* root, const innie_config* config, double* aggregate_seg,
                            size_t* true_regions) {
    return guarded([&] {
        require(root && config, "null argument");
        const auto layout = innie::open_project(root);
        const auto report = innie::evaluate_project(layout, config->value);
        if (aggregate_seg) *aggregate_seg = report.aggregate;
        if (true_regions) *true_regions = report.true_regions;
    });
}

innie_status innie_distance_map(const uint32_t* labels, int rows, int cols, double cap, float* out) {
    return guarded([&] {
        require_grid(labels, rows, cols);
        require(out != nullptr, "null output grid");
        innie::LabelMap grid(rows, cols);
        std::copy(labels, labels + grid.size(), grid.data());
        const auto dist = innie::distance_map(grid, cap);
        std::copy(dist.values().begin(), dist.values().end(), out);
    });
}

innie_status innie_seg_score(const uint32_t* truth, const uint32_t* predicted, int rows, int cols, double* out) {
    return guarded([&] {
        require_grid(truth, rows, cols);
        require_grid(predicted, rows, cols);
        require(out != nullptr, "null output");
        innie::LabelMap t(rows, cols), p(rows, cols);
        std::copy(truth, truth + t.size(), t.data());
        std::copy(predicted, predicted + p.size(), p.data());
        *out = innie::seg_score(t, p);
    });
}

innie_status innie_model_load(const char* file, innie_model** out) {
    return guarded([&] {
        require(file && out, "null argument");
        *out = new innie_model{innie::load_checkpoint(file)};
    });
}

void innie_model_free(innie_model* model) { delete model; }

innie_status innie_model_scale_count(const innie_model* model, size_t* count) {
    return guarded([&] {
        require(model && count, "null argument");
        *count = model->checkpoint.scales.size();
    });
}

innie_status innie_model_predict(const innie_model* model, const float* image, const uint8_t* aoi, int rows, int cols,
                                 double dist_cap, int threads, float* probability, float* distance) {
    return guarded([&] {
        require(model != nullptr, "null model");
        require_grid(image, rows, cols);
        require(probability && distance, "null output grid");
        innie::Image img(rows, cols);
        std::copy(image, image + img.size(), img.data());
        innie::Mask mask(rows, cols, 1);
        if (aoi)
            for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = aoi[i] != 0;
        const auto maps = innie::predict_maps(model->checkpoint.network, img, mask, model->checkpoint.scales,
                                              dist_cap, resolve_threads(threads));
        std::copy(maps.probability.values().begin(), maps.probability.values().end(), probability);
        std::copy(maps.distance.values().begin(), maps.distance.values().end(), distance);
    });
}

innie_status innie_segment(const float* probability, const float* distance, int rows, int cols,
                           const innie_config* config, uint32_t* labels, size_t* regions) {
    return guarded([&] {
        require_grid(probability, rows, cols);
        require_grid(distance, rows, cols);
        require(config && labels, "null argument");
        innie::PredictionMaps maps{innie::Grid<float>(rows, cols), innie::DistanceMap(rows, cols), 0};
        std::copy(probability, probability + maps.probability.size(), maps.probability.data());
        std::copy(distance, distance + maps.distance.size(), maps.distance.data());
        const auto seg = innie::segment(std::move(maps), config->value);
        std::copy(seg.labels.values().begin(), seg.labels.values().end(), labels);
        if (regions) *regions = seg.markers.size();
    });
}

}  // extern "C"
