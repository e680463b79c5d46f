#pragma once

#include <array>
#include <string>
#include <vector>

#include "dssn/config.hpp"
#include "dssn/layers.hpp"

namespace dssn {

inline constexpr int kPyramidLevels = 5;

// Extent of pyramid level `level` for an input extent: repeated ceil halving.
int level_extent(int in, int level);

// Five levels; level i (1-based) is ceil(H/2^i) x ceil(W/2^i) x C_i.
// levels[0] holds level 1.
template <typename T>
struct FeaturePyramid {
    std::array<Var<T>, kPyramidLevels> levels;

    const Var<T>& level(int i) const { return levels[i - 1]; }
    void validate(int in_h, int in_w, const std::array<int, 5>& channels) const;
};

// Plain conv backbone standing in for the spatial branch: per stage a 3x3
// stride-2 conv then (depth - 1) 3x3 convs, ReLU after each.
template <typename T>
class SpatialBackbone {
public:
    SpatialBackbone(ParamStore<T>& store, const std::string& name, const ModelConfig& cfg);
    FeaturePyramid<T> operator()(const Var<T>& cube) const;
    double flops(int h, int w) const;

private:
    std::array<std::vector<Conv<T>>, kPyramidLevels> stages_;
};

template <typename T>
struct SpectralAttentionOutput {
    Var<T> features;
    Var<T> weights;  // N x 1 x 1 x C, softmax-normalized
};

// v = softmax(GAP(attention(x))); out = relu(output(v * relu(project(x)))).
// `attention` and `project` are 1x1. `output` is 1x1 stride 1, or 3x3 stride 2
// when the block also moves down one pyramid level.
template <typename T>
class SpectralAttentionBlock {
public:
    SpectralAttentionBlock() = default;
    SpectralAttentionBlock(ParamStore<T>& store, const std::string& name, int in_c, int out_c, bool downsample);
    SpectralAttentionOutput<T> operator()(const Var<T>& x) const;
    double flops(int h, int w) const;

    Conv<T> attention;
    Conv<T> project;
    Conv<T> output;
};

template <typename T>
class SpectralBranch {
public:
    SpectralBranch(ParamStore<T>& store, const std::string& name, const ModelConfig& cfg);
    FeaturePyramid<T> operator()(const Var<T>& cube, std::vector<Var<T>>* weights = nullptr) const;
    double flops(int h, int w) const;

private:
    std::array<SpectralAttentionBlock<T>, kPyramidLevels> blocks_;
};

// P = relu(reweight(spat)) * spec + GAP(spec) * spat, with `reweight` 1x1.
template <typename T>
Var<T> hierarchical_fuse(const Var<T>& spatial, const Var<T>& spectral, const Conv<T>& reweight);

template <typename T>
struct SjfeOutput {
    FeaturePyramid<T> joint;
    FeaturePyramid<T> spatial;
    FeaturePyramid<T> spectral;
};

// Both branches plus per-level fusion. With one branch disabled, that
// branch's features are replaced by the other branch's.
template <typename T>
class Sjfe {
public:
    Sjfe(ParamStore<T>& store, const std::string& name, const ModelConfig& cfg);
    SjfeOutput<T> operator()(const Var<T>& cube) const;
    double flops(int h, int w) const;

private:
    ModelConfig cfg_;
    std::vector<SpatialBackbone<T>> spatial_;
    std::vector<SpectralBranch<T>> spectral_;
    std::array<Conv<T>, kPyramidLevels> reweight_;
};

}  // namespace dssn
