#pragma once

#include <array>
#include <string>
#include <vector>

#include "dssn/config.hpp"
#include "dssn/layers.hpp"

namespace dssn {

// Levels count octaves below the input: level b has extent level_extent(H, b).
// A path from input level a to output level b is
//   a >  b     bilinear upsample to the output extent, then 3x3 conv
//   a == b     3x3 stride-1 conv
//   a == b - 1 3x3 stride-2 conv
enum class PathKind { upsample_conv, conv, strided_conv };

PathKind path_kind(int in_level, int out_level);

struct FusionStageSpec {
    std::vector<int> in_levels;
    std::vector<int> out_levels;
    int in_channels = 1;
    int width = 1;
};

// The three stages for widths (w1, w2, w3).
std::array<FusionStageSpec, 3> hrfm_plan(const std::array<int, 3>& widths);

// One fusion path; `out_extent` recomputes the output extent from the input
// extent so the three cases can be checked against each other.
template <typename T>
struct FusionPath {
    int in_level = 0;
    int out_level = 0;
    PathKind kind = PathKind::conv;
    Conv<T> conv;

    Var<T> operator()(const Var<T>& x, int out_h, int out_w) const;
    int out_extent(int in_extent, int target) const;
};

template <typename T>
class FusionStage {
public:
    FusionStage(ParamStore<T>& store, const std::string& name, const FusionStageSpec& spec);

    // `inputs[i]` is at spec.in_levels[i]; the result follows spec.out_levels.
    // The full-resolution extent (h, w) fixes every level's extent.
    std::vector<Var<T>> operator()(const std::vector<Var<T>>& inputs, int h, int w) const;
    // Single path output, for superposition checks.
    Var<T> path(std::size_t out_index, std::size_t in_index, const Var<T>& x, int h, int w) const;

    void check_extents(int h, int w) const;
    double flops(int h, int w) const;
    const FusionStageSpec& spec() const { return spec_; }

private:
    FusionStageSpec spec_;
    std::vector<std::vector<FusionPath<T>>> paths_;  // [out][in]
};

// {S_1, S_2, S_3} at levels 1..3 -> S_m at H x W x 1.
template <typename T>
class Hrfm {
public:
    Hrfm(ParamStore<T>& store, const std::string& name, const std::array<int, 3>& widths);
    Var<T> operator()(const std::vector<Var<T>>& maps, int h, int w) const;
    void check_extents(int h, int w) const;
    double flops(int h, int w) const;

    const std::vector<FusionStage<T>>& stages() const { return stages_; }

private:
    std::vector<FusionStage<T>> stages_;
    Conv<T> head_;
};

// Replacement with the same layer count: S_1..S_3 upsampled to H x W,
// concatenated, then 3x3 convs 3 -> w1 -> w2 -> w3 -> 1.
template <typename T>
class StackedFusion {
public:
    StackedFusion(ParamStore<T>& store, const std::string& name, const std::array<int, 3>& widths);
    Var<T> operator()(const std::vector<Var<T>>& maps, int h, int w) const;
    double flops(int h, int w) const;

private:
    std::vector<Conv<T>> convs_;
};

}  // namespace dssn
