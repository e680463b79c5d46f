#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dssn/hsi.hpp"
#include "dssn/synth.hpp"

namespace dssn {

// One labelled cube, scaled and resized for the network.
struct Sample {
    std::string id;
    HsiCube cube;
    GroundTruth gt;
};

using Dataset = std::vector<Sample>;

// Scales a raw cube by 1/10000 (scaled cubes pass through) and resamples to
// side x side.
Sample prepare_sample(std::string id, const HsiCube& cube, const GroundTruth& gt, int side);

// Scene i is drawn from mt19937_64(scene_seed(seed, i)).
std::uint64_t scene_seed(std::uint64_t seed, int index);

struct SyntheticScene {
    std::string id;
    std::uint64_t seed = 0;
    SceneSpec spec;
    HsiCube cube;  // raw
    GroundTruth gt;
};

std::vector<SyntheticScene> synthetic_scenes(int count, std::uint64_t seed, const SceneOptions& opts,
                                             int first_index = 0);
Dataset to_dataset(const std::vector<SyntheticScene>& scenes, int side);

// Writes <id>.hdr / <id>.dat per scene and manifest.json listing seeds and specs.
void write_scene_directory(const std::filesystem::path& dir, const std::vector<SyntheticScene>& scenes,
                           const SceneOptions& opts, std::uint64_t seed);

// Every <id>.hdr with a matching <id>.dat, sorted by id. Unlabelled cubes are
// rejected when `require_labels` is set.
Dataset load_directory(const std::filesystem::path& dir, int side, bool require_labels = true);

// Stacks the samples into an N x H x W x C tensor.
template <typename T>
Tensor<T> batch_tensor(const std::vector<const HsiCube*>& cubes);

}  // namespace dssn
