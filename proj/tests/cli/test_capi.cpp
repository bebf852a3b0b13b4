#include <doctest.h>
#include <innie/innie.h>

#include <string>
#include <vector>

#include "support.hpp"

TEST_CASE("config handle: defaults, set, get, errors") {
    innie_config* cfg = nullptr;
    REQUIRE(innie_config_default(&cfg) == INNIE_OK);
    CHECK(innie_config_key_count() == 14);
    CHECK(std::string(innie_config_key(0)) == "scales");
    CHECK(innie_config_key(14) == nullptr);

    size_t required = 0;
    CHECK(innie_config_get(cfg, "scales", nullptr, 0, &required) == INNIE_OK);
    CHECK(required == 9);
    std::string buffer(required, '\0');
    CHECK(innie_config_get(cfg, "scales", buffer.data(), buffer.size(), nullptr) == INNIE_OK);
    CHECK(std::string(buffer.c_str()) == "1,3,9,27");

    char small[4];
    CHECK(innie_config_get(cfg, "scales", small, sizeof small, nullptr) == INNIE_OK);
    CHECK(std::string(small) == "1,3");

    CHECK(innie_config_set(cfg, "fraction", "0.2") == INNIE_OK);
    CHECK(innie_config_set(cfg, "fraction", "2") == INNIE_ERR_CONFIG);
    CHECK(std::string(innie_last_error()).find("fraction") != std::string::npos);
    CHECK(innie_config_set(cfg, "colour", "red") == INNIE_ERR_CONFIG);
    CHECK(innie_config_set(nullptr, "fraction", "0.2") == INNIE_ERR_INVALID_ARGUMENT);
    CHECK(std::string(innie_status_name(INNIE_ERR_CONFIG)) == "config error");
    innie_config_free(cfg);
    innie_config_free(nullptr);
}

TEST_CASE("project functions map errors to status codes") {
    testing::TempDir dir("capi");
    const std::string root = (dir / "p").string();
    innie_config* cfg = nullptr;
    CHECK(innie_project_config(root.c_str(), &cfg) == INNIE_ERR_NOT_A_PROJECT);
    REQUIRE(innie_project_init(root.c_str()) == INNIE_OK);
    CHECK(innie_project_init(root.c_str()) == INNIE_ERR_PROJECT_EXISTS);
    CHECK(innie_project_init("/proc/innie_not_here") == INNIE_ERR_NOT_WRITABLE);
    REQUIRE(innie_project_config(root.c_str(), &cfg) == INNIE_OK);
    innie_train_report report{};
    CHECK(innie_train(root.c_str(), cfg, 1, &report, nullptr, 0) == INNIE_ERR_MISSING_DATA);
    CHECK(innie_predict(root.c_str(), cfg, nullptr, 1, nullptr, nullptr) == INNIE_ERR_MISSING_DATA);
    innie_model* model = nullptr;
    CHECK(innie_model_load((dir / "none.ckpt").c_str(), &model) == INNIE_ERR_CHECKPOINT);
    innie_config_free(cfg);
}

TEST_CASE("in-memory distance map and SEG") {
    const int rows = 7, cols = 7;
    std::vector<uint32_t> labels(rows * cols, 0);
    labels[3 * cols + 3] = 1;
    std::vector<float> dist(labels.size());
    REQUIRE(innie_distance_map(labels.data(), rows, cols, 10, dist.data()) == INNIE_OK);
    for (std::size_t i = 0; i < dist.size(); ++i) CHECK(dist[i] == (i == 3 * cols + 3 ? 1.0f : 0.0f));

    double seg = -1;
    REQUIRE(innie_seg_score(labels.data(), labels.data(), rows, cols, &seg) == INNIE_OK);
    CHECK(seg == 1.0);
    std::vector<uint32_t> empty(labels.size(), 0);
    CHECK(innie_seg_score(empty.data(), labels.data(), rows, cols, &seg) == INNIE_ERR_EVALUATION);
    CHECK(innie_distance_map(nullptr, rows, cols, 10, dist.data()) == INNIE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("segment from maps") {
    const int rows = 20, cols = 30;
    std::vector<float> prob(rows * cols, 0.0f), dist(rows * cols, 0.0f);
    for (int r = 5; r < 15; ++r)
        for (int c = 3; c < 12; ++c) prob[r * cols + c] = 0.9f, dist[r * cols + c] = 1.0f + (r == 10 && c == 7);
    for (int r = 5; r < 15; ++r)
        for (int c = 18; c < 27; ++c) prob[r * cols + c] = 0.9f, dist[r * cols + c] = 1.0f;
    innie_config* cfg = nullptr;
    REQUIRE(innie_config_default(&cfg) == INNIE_OK);
    std::vector<uint32_t> labels(rows * cols);
    size_t regions = 0;
    REQUIRE(innie_segment(prob.data(), dist.data(), rows, cols, cfg, labels.data(), &regions) == INNIE_OK);
    CHECK(regions == 2);
    CHECK(labels[10 * cols + 7] != 0);
    CHECK(labels[10 * cols + 20] != 0);
    CHECK(labels[10 * cols + 7] != labels[10 * cols + 20]);
    CHECK(labels[0] == 0);
    innie_config_free(cfg);
}
