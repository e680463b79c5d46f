#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "dssn/tensor.hpp"

namespace dssn {

class FormatError : public Error {
public:
    using Error::Error;
};

// H x W x C radiometric cube stored pixel-interleaved (HWC) in memory.
// `scaled` is false for raw sensor integers and true once divided by 10000.
struct HsiCube {
    int height = 0;
    int width = 0;
    int bands = 0;
    std::vector<double> wavelengths;  // nm, strictly increasing
    std::vector<float> values;        // height * width * bands
    bool scaled = false;

    float& at(int y, int x, int b) { return values[(static_cast<std::size_t>(y) * width + x) * bands + b]; }
    float at(int y, int x, int b) const { return values[(static_cast<std::size_t>(y) * width + x) * bands + b]; }

    // 1 x H x W x C tensor view (copy) of the values.
    template <typename T>
    Tensor<T> to_tensor() const;

    void validate() const;
};

// Per-pixel labels: -1 ignore, 0 background, 1 foreground.
struct GroundTruth {
    int height = 0;
    int width = 0;
    std::vector<std::int8_t> labels;

    std::int8_t& at(int y, int x) { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::int8_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }

    std::size_t count(std::int8_t label) const;
    void validate() const;
};

struct LabeledCube {
    HsiCube cube;
    std::optional<GroundTruth> gt;
};

inline constexpr int kCubeFormatVersion = 1;
inline constexpr double kRadiometricScale = 10000.0;

// Header: text, one "key value" pair per line after the magic line "HSICUBE".
// Payload: band-sequential little-endian samples (uint16 for raw cubes,
// float32 for scaled ones), followed by an int8 label plane if has_labels.
void save_cube(const std::filesystem::path& header_path, const std::filesystem::path& data_path, const HsiCube& cube,
               const GroundTruth* gt = nullptr);
LabeledCube load_cube(const std::filesystem::path& header_path, const std::filesystem::path& data_path);

HsiCube scale_radiometric(const HsiCube& cube);

// Bilinear per band, nearest-neighbour labels. Output is side x side.
std::pair<HsiCube, GroundTruth> resize_cube(const HsiCube& cube, const GroundTruth& gt, int side);
HsiCube resize_cube(const HsiCube& cube, int side);

struct AugmentOptions {
    double flip_probability = 0.5;
    double min_crop = 0.875;
    double max_crop = 1.0;
};

// Random horizontal flip, then a random crop of 87.5-100% of each side
// resized back to the original extent. Cube and labels move together.
std::pair<HsiCube, GroundTruth> augment(const HsiCube& cube, const GroundTruth& gt, std::mt19937_64& rng,
                                        const AugmentOptions& opts = {});

std::pair<HsiCube, GroundTruth> flip_horizontal(const HsiCube& cube, const GroundTruth& gt);
std::pair<HsiCube, GroundTruth> crop(const HsiCube& cube, const GroundTruth& gt, int y0, int x0, int h, int w);

// 1.0 where the label is 0 or 1, 0.0 where it is -1.
std::vector<double> valid_mask(const GroundTruth& gt);

// Labels as {0,1} doubles (ignore pixels map to 0; pair with valid_mask).
std::vector<double> binary_targets(const GroundTruth& gt);

std::vector<double> linear_wavelengths(int bands, double first_nm = 466.0, double last_nm = 940.0);

}  // namespace dssn
