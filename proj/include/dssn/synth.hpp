#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "dssn/hsi.hpp"

namespace dssn {

// Recipe for one synthetic scene. Signatures are reflectances per band.
struct SceneSpec {
    int height = 64;
    int width = 64;
    std::vector<double> wavelengths = linear_wavelengths(32);
    int object_count = 1;
    double size_min = 0.05;  // object extent as a fraction of the image side
    double size_max = 0.3;
    std::vector<double> fg_signature;
    std::vector<double> bg_signature;
    // Optional second background material filling one side of a random
    // straight boundary. Empty means a single-material background.
    std::vector<double> clutter_signature;
    double noise_std = 0.0;  // reflectance units
    double shading = 0.0;    // amplitude of smooth multiplicative illumination
    bool reversal = false;   // blobs take the background signature and vice versa

    int bands() const { return static_cast<int>(wavelengths.size()); }
    void validate() const;
};

// Raw (uint16-valued, unscaled) cube plus labels: 1 inside blobs, -1 on the
// one-pixel inner rim of every blob, 0 elsewhere.
std::pair<HsiCube, GroundTruth> synth_scene(const SceneSpec& spec, std::mt19937_64& rng);

double spectral_angle(const std::vector<double>& a, const std::vector<double>& b);

// Smooth random reflectance spectrum over the given wavelength grid.
std::vector<double> random_signature(std::mt19937_64& rng, const std::vector<double>& wavelengths);

struct SceneOptions {
    int side = 64;
    int bands = 32;
    int min_objects = 1;
    int max_objects = 14;
    double size_min = 0.06;
    double size_max = 0.45;
    double noise_std = 0.01;
    double shading = 0.0;
    double clutter_probability = 0.0;
    double reversal_probability = 0.5;
    double min_spectral_angle = 0.1;  // floor between every pair of materials
};

// Draws a SceneSpec whose materials are pairwise separated by at least
// `min_spectral_angle` radians.
SceneSpec random_scene_spec(std::mt19937_64& rng, const SceneOptions& opts);

}  // namespace dssn
