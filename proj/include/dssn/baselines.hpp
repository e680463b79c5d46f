#pragma once

#include <string>
#include <vector>

#include "dssn/hsi.hpp"

namespace dssn {

// Level k is a double-precision HWC cube at ceil(H/2^k) x ceil(W/2^k).
struct SpectralPyramid {
    struct Level {
        int height = 0;
        int width = 0;
        std::vector<double> values;
    };
    int bands = 0;
    std::vector<Level> levels;  // levels[0] is the input

    int depth() const { return static_cast<int>(levels.size()) - 1; }
};

// Separable [1 4 6 4 1] / 16 taps.
const std::vector<double>& gaussian_taps();

// 5x5 blur with reflect-101 borders, per band.
std::vector<double> gaussian_blur(const std::vector<double>& values, int h, int w, int bands);

// K blur-and-decimate steps. Each extent must be at least 2^K.
SpectralPyramid gaussian_pyramid(const std::vector<double>& values, int h, int w, int bands, int k);
SpectralPyramid gaussian_pyramid(const HsiCube& cube, int k);

enum class ContrastMode { euclidean, angle };

inline constexpr int kCenterLevels[] = {1, 2};
inline constexpr int kSurroundOffsets[] = {2, 3};
inline constexpr int kMinPyramidDepth = 5;

// One map per (c, s) pair, each at level-0 extent, row-major. An angle
// against a zero spectrum counts as 0.
std::vector<std::vector<double>> center_surround_maps(const SpectralPyramid& pyr, ContrastMode mode);

enum class BaselineMode { sed, sg };

BaselineMode parse_baseline_mode(const std::string& name);
std::string baseline_name(BaselineMode mode);

struct ClassicalResult {
    std::vector<double> map;  // H x W in [0,1]
    std::vector<double> raw;  // summed center-surround maps before normalization
    bool degenerate = false;  // raw map was constant; `map` is all zeros
};

// SED: Euclidean contrast on the cube. SG: angle contrast on the band-wise
// first difference of the cube after dividing it by its global maximum.
ClassicalResult classical_saliency(const HsiCube& cube, BaselineMode mode);

// Band-wise first difference, C - 1 bands.
std::vector<double> spectral_gradient(const std::vector<double>& values, std::size_t pixels, int bands);

}  // namespace dssn
