#include "dssn/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "dssn/kernels.hpp"

namespace dssn {

namespace {

int reflect101(int i, int n)
{
    if (n == 1) return 0;
    while (i < 0 || i >= n) i = i < 0 ? -i : 2 * n - 2 - i;
    return i;
}

std::vector<double> resize_hwc(const std::vector<double>& v, int h, int w, int c, int oh, int ow)
{
    if (h == oh && w == ow) return v;
    Tensor<double> t(Shape(1, h, w, c), v);
    return kernels::bilinear_resize(t, oh, ow).storage();
}

double pixel_distance(const double* a, const double* b, int bands, ContrastMode mode)
{
    if (mode == ContrastMode::euclidean) {
        double acc = 0;
        for (int k = 0; k < bands; ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
        return std::sqrt(acc);
    }
    double dot = 0, na = 0, nb = 0;
    for (int k = 0; k < bands; ++k) {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    if (na == 0 || nb == 0) return 0;
    return std::acos(std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0));
}

}  // namespace

const std::vector<double>& gaussian_taps()
{
    static const std::vector<double> taps{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
    return taps;
}

std::vector<double> gaussian_blur(const std::vector<double>& values, int h, int w, int bands)
{
    const auto& taps = gaussian_taps();
    std::vector<double> tmp(values.size()), out(values.size());
    auto idx = [&](int y, int x) { return (static_cast<std::size_t>(y) * w + x) * bands; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int b = 0; b < bands; ++b) {
                double acc = 0;
                for (int k = -2; k <= 2; ++k) acc += taps[k + 2] * values[idx(y, reflect101(x + k, w)) + b];
                tmp[idx(y, x) + b] = acc;
            }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int b = 0; b < bands; ++b) {
                double acc = 0;
                for (int k = -2; k <= 2; ++k) acc += taps[k + 2] * tmp[idx(reflect101(y + k, h), x) + b];
                out[idx(y, x) + b] = acc;
            }
    return out;
}

SpectralPyramid gaussian_pyramid(const std::vector<double>& values, int h, int w, int bands, int k)
{
    if (k < 1) throw Error("gaussian_pyramid: need at least one level, got K = " + std::to_string(k));
    if (h < (1 << k) || w < (1 << k))
        throw ShapeError("gaussian_pyramid: " + std::to_string(h) + "x" + std::to_string(w) + " too small for " +
                         std::to_string(k) + " levels");
    if (values.size() != static_cast<std::size_t>(h) * w * bands) throw ShapeError("gaussian_pyramid: size mismatch");
    SpectralPyramid pyr;
    pyr.bands = bands;
    pyr.levels.push_back({h, w, values});
    for (int i = 0; i < k; ++i) {
        const auto& prev = pyr.levels.back();
        const auto blurred = gaussian_blur(prev.values, prev.height, prev.width, bands);
        SpectralPyramid::Level next{(prev.height + 1) / 2, (prev.width + 1) / 2, {}};
        next.values.resize(static_cast<std::size_t>(next.height) * next.width * bands);
        for (int y = 0; y < next.height; ++y)
            for (int x = 0; x < next.width; ++x)
                for (int b = 0; b < bands; ++b)
                    next.values[(static_cast<std::size_t>(y) * next.width + x) * bands + b] =
                        blurred[(static_cast<std::size_t>(2 * y) * prev.width + 2 * x) * bands + b];
        pyr.levels.push_back(std::move(next));
    }
    return pyr;
}

SpectralPyramid gaussian_pyramid(const HsiCube& cube, int k)
{
    return gaussian_pyramid(std::vector<double>(cube.values.begin(), cube.values.end()), cube.height, cube.width,
                            cube.bands, k);
}

std::vector<std::vector<double>> center_surround_maps(const SpectralPyramid& pyr, ContrastMode mode)
{
    if (pyr.depth() < kMinPyramidDepth)
        throw Error("center_surround_maps: pyramid depth " + std::to_string(pyr.depth()) +
                    " is too shallow for the centre/surround grid (needs " + std::to_string(kMinPyramidDepth) + ")");
    const int bands = pyr.bands;
    const auto& base = pyr.levels[0];
    std::vector<std::vector<double>> maps;
    for (int c : kCenterLevels)
        for (int d : kSurroundOffsets) {
            const auto& center = pyr.levels[c];
            const auto& surround = pyr.levels[c + d];
            const auto up = resize_hwc(surround.values, surround.height, surround.width, bands, center.height,
                                       center.width);
            const std::size_t px = static_cast<std::size_t>(center.height) * center.width;
            std::vector<double> m(px);
            for (std::size_t i = 0; i < px; ++i)
                m[i] = pixel_distance(&center.values[i * bands], &up[i * bands], bands, mode);
            maps.push_back(resize_hwc(m, center.height, center.width, 1, base.height, base.width));
        }
    return maps;
}

BaselineMode parse_baseline_mode(const std::string& name)
{
    if (name == "sed") return BaselineMode::sed;
    if (name == "sg") return BaselineMode::sg;
    throw Error("unknown baseline mode '" + name + "' (expected sed or sg)");
}

std::string baseline_name(BaselineMode mode) { return mode == BaselineMode::sed ? "SED" : "SG"; }

std::vector<double> spectral_gradient(const std::vector<double>& values, std::size_t pixels, int bands)
{
    if (bands < 2) throw ShapeError("spectral_gradient: need at least 2 bands");
    std::vector<double> out(pixels * (bands - 1));
    for (std::size_t p = 0; p < pixels; ++p)
        for (int b = 0; b + 1 < bands; ++b)
            out[p * (bands - 1) + b] = values[p * bands + b + 1] - values[p * bands + b];
    return out;
}

ClassicalResult classical_saliency(const HsiCube& cube, BaselineMode mode)
{
    cube.validate();
    const std::size_t px = static_cast<std::size_t>(cube.height) * cube.width;
    std::vector<double> values(cube.values.begin(), cube.values.end());
    int bands = cube.bands;
    ContrastMode contrast = ContrastMode::euclidean;
    if (mode == BaselineMode::sg) {
        const double peak = *std::max_element(values.begin(), values.end());
        if (peak > 0)
            for (auto& v : values) v /= peak;
        values = spectral_gradient(values, px, bands);
        bands -= 1;
        contrast = ContrastMode::angle;
    }
    const auto pyr = gaussian_pyramid(values, cube.height, cube.width, bands, kMinPyramidDepth);
    const auto maps = center_surround_maps(pyr, contrast);

    ClassicalResult r;
    r.raw.assign(px, 0.0);
    for (const auto& m : maps)
        for (std::size_t i = 0; i < px; ++i) r.raw[i] += m[i];
    const auto [lo, hi] = std::minmax_element(r.raw.begin(), r.raw.end());
    const double span = *hi - *lo;
    r.map.assign(px, 0.0);
    if (!(span > 0)) {
        r.degenerate = true;
        return r;
    }
    for (std::size_t i = 0; i < px; ++i) r.map[i] = (r.raw[i] - *lo) / span;
    return r;
}

}  // namespace dssn
