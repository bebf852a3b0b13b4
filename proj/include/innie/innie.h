/*
 * innie: per-pixel CNN segmentation toolkit, C interface.
 *
 * All functions return an innie_status. On failure, innie_last_error()
 * returns a message describing the most recent error on the calling thread;
 * the pointer stays valid until the next failing call on that thread.
 * Handles are opaque and owned by the caller; free them with the matching
 * *_free function (passing NULL is allowed).
 */
#ifndef INNIE_INNIE_H
#define INNIE_INNIE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(INNIE_BUILDING_LIBRARY)
#    define INNIE_API __declspec(dllexport)
#  else
#    define INNIE_API __declspec(dllimport)
#  endif
#else
#  define INNIE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum innie_status {
    INNIE_OK = 0,
    INNIE_ERR_INVALID_ARGUMENT = 1,
    INNIE_ERR_CONFIG = 2,         /* unknown key, bad value */
    INNIE_ERR_PROJECT_EXISTS = 3,
    INNIE_ERR_NOT_WRITABLE = 4,
    INNIE_ERR_NOT_A_PROJECT = 5,
    INNIE_ERR_MISSING_DATA = 6,   /* no images, no model, no ground truth */
    INNIE_ERR_IO = 7,             /* unreadable or unsupported raster */
    INNIE_ERR_SHAPE_MISMATCH = 8,
    INNIE_ERR_CHECKPOINT = 9,     /* corrupt checkpoint */
    INNIE_ERR_ARCH_MISMATCH = 10, /* checkpoint trained with other scales */
    INNIE_ERR_TRAINING = 11,      /* empty plan, diverged loss */
    INNIE_ERR_EVALUATION = 12,
    INNIE_ERR_INTERNAL = 99
} innie_status;

typedef struct innie_config innie_config;
typedef struct innie_model innie_model;

INNIE_API const char* innie_version(void);
INNIE_API const char* innie_last_error(void);
INNIE_API const char* innie_status_name(innie_status status);

/* 0 = quiet, 1 = warnings, 2 = progress (default), 3 = debug. Logs go to stderr. */
INNIE_API void innie_set_verbosity(int level);

/* ---- configuration ---------------------------------------------------- */

INNIE_API innie_status innie_config_default(innie_config** out);
INNIE_API innie_status innie_config_load(const char* file, innie_config** out);
INNIE_API innie_status innie_config_save(const innie_config* config, const char* file);
INNIE_API void innie_config_free(innie_config* config);

/* Keys are the config-file names (e.g. "fraction", "dist_cap"). */
INNIE_API innie_status innie_config_set(innie_config* config, const char* key, const char* value);
/* Copies the value, NUL-terminated, into buffer. *required (optional) receives
 * the needed size including the terminator. */
INNIE_API innie_status innie_config_get(const innie_config* config, const char* key, char* buffer, size_t size,
                                        size_t* required);
INNIE_API size_t innie_config_key_count(void);
INNIE_API const char* innie_config_key(size_t index);

/* ---- project ---------------------------------------------------------- */

INNIE_API innie_status innie_project_init(const char* root);
/* Loads <root>/config.txt; fails with INNIE_ERR_NOT_A_PROJECT when absent. */
INNIE_API innie_status innie_project_config(const char* root, innie_config** out);

typedef struct innie_synth_options {
    int images;       /* number of scenes */
    int size;         /* square canvas side, >= 64 */
    int min_particles;
    int max_particles;
    double min_radius;
    double max_radius;
    double max_overlap;
    int fringe;       /* 1 = concentric fringe pattern, 0 = flat disks */
    double noise_sigma;
    double blur_sigma;
    double illumination;
} innie_synth_options;

INNIE_API void innie_synth_defaults(innie_synth_options* options);
/* Seed and train/test split come from the config. */
INNIE_API innie_status innie_synth(const char* root, const innie_config* config, const innie_synth_options* options,
                                   size_t* train_images, size_t* test_images);

typedef struct innie_train_report {
    int epochs;              /* E */
    double fraction;         /* F */
    uint64_t available;      /* M */
    uint64_t plan_size;      /* N = round(F * M) */
    uint64_t steps;          /* T = E * N */
    double ef;               /* T / M */
    double final_class_loss;
    double final_distance_loss;
    double seconds;
} innie_train_report;

/* Writes models/model_<timestamp>.ckpt and models/latest.ckpt; the path of
 * the timestamped checkpoint is copied into model_path when non-NULL. */
INNIE_API innie_status innie_train(const char* root, const innie_config* config, int threads,
                                   innie_train_report* report, char* model_path, size_t model_path_size);

/* model may be NULL for models/latest.ckpt. threads <= 0 uses all cores. */
INNIE_API innie_status innie_predict(const char* root, const innie_config* config, const char* model, int threads,
                                     size_t* images, size_t* files_written);

/* Writes outputs/seg_report.txt. */
INNIE_API innie_status innie_evaluate(const char* root, const innie_config* config, double* aggregate_seg,
                                      size_t* true_regions);

/* ---- in-memory operations --------------------------------------------- */

/* Grids are row-major, rows x cols. */
INNIE_API innie_status innie_distance_map(const uint32_t* labels, int rows, int cols, double cap, float* out);
INNIE_API innie_status innie_seg_score(const uint32_t* truth, const uint32_t* predicted, int rows, int cols,
                                       double* out);

INNIE_API innie_status innie_model_load(const char* file, innie_model** out);
INNIE_API void innie_model_free(innie_model* model);
INNIE_API innie_status innie_model_scale_count(const innie_model* model, size_t* count);
/* image: raw intensities; aoi may be NULL (all pixels). Outputs are rows*cols. */
INNIE_API innie_status innie_model_predict(const innie_model* model, const float* image, const uint8_t* aoi, int rows,
                                           int cols, double dist_cap, int threads, float* probability,
                                           float* distance);

/* Binarize + markers + watershed on given maps; labels receives rows*cols. */
INNIE_API innie_status innie_segment(const float* probability, const float* distance, int rows, int cols,
                                     const innie_config* config, uint32_t* labels, size_t* regions);

#ifdef __cplusplus
}
#endif

#endif /* INNIE_INNIE_H */
