#pragma once

#include <cstdint>

#include "dssn/config.hpp"
#include "dssn/dataset.hpp"
#include "dssn/synth.hpp"

namespace dssn {

// Synthetic train/test benchmark. Train scenes use indices 0..train_count-1,
// test scenes follow, all drawn from `data_seed`.
struct BenchmarkConfig {
    ModelConfig model;
    TrainConfig train;
    SceneOptions scenes;
    int train_count = 150;
    int test_count = 50;
    std::uint64_t data_seed = 2024;

    // Desk-scale defaults: 64 px scenes, halved channel plan, 20 epochs.
    static BenchmarkConfig desk();
    // Desk defaults overridden by any model.*, train.*, synth.* and data.* keys.
    static BenchmarkConfig from(const KeyValues& kv);
    void write(KeyValues& kv) const;
};

SceneOptions scene_options_from(const KeyValues& kv, SceneOptions base = {});
void write_scene_options(const SceneOptions& o, KeyValues& kv);

struct BenchmarkData {
    Dataset train;
    Dataset test;
};

BenchmarkData make_benchmark_data(const BenchmarkConfig& cfg);

}  // namespace dssn
