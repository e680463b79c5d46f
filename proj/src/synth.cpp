#include "dssn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dssn/random.hpp"

namespace dssn {

void SceneSpec::validate() const
{
    const int c = bands();
    if (height < 8 || width < 8) throw Error("scene spec: extent must be at least 8x8");
    if (object_count < 1) throw Error("scene spec: object_count must be >= 1");
    if (!(size_min > 0.0 && size_max < 1.0 && size_min <= size_max))
        throw Error("scene spec: size range must lie within (0, 1)");
    if (static_cast<int>(fg_signature.size()) != c || static_cast<int>(bg_signature.size()) != c)
        throw Error("scene spec: signature length must equal band count");
    if (!clutter_signature.empty() && static_cast<int>(clutter_signature.size()) != c)
        throw Error("scene spec: clutter signature length must equal band count");
    if (noise_std < 0.0 || shading < 0.0 || shading >= 1.0) throw Error("scene spec: bad noise or shading");
}

double spectral_angle(const std::vector<double>& a, const std::vector<double>& b)
{
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) throw NumericError("spectral_angle: zero vector");
    return std::acos(std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0));
}

namespace {

struct Blob {
    bool ellipse = true;
    double cy = 0, cx = 0;
    double a = 1, b = 1, theta = 0;      // ellipse semi-axes and rotation
    std::vector<double> vy, vx;          // polygon vertices
};

bool inside_polygon(const Blob& blob, double y, double x)
{
    bool in = false;
    const std::size_t n = blob.vy.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double yi = blob.vy[i], xi = blob.vx[i], yj = blob.vy[j], xj = blob.vx[j];
        if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
    }
    return in;
}

bool inside(const Blob& blob, double y, double x)
{
    if (blob.ellipse) {
        const double dy = y - blob.cy, dx = x - blob.cx;
        const double c = std::cos(blob.theta), s = std::sin(blob.theta);
        const double u = (dx * c + dy * s) / blob.a;
        const double v = (-dx * s + dy * c) / blob.b;
        return u * u + v * v <= 1.0;
    }
    return inside_polygon(blob, y, x);
}

Blob sample_blob(const SceneSpec& spec, std::mt19937_64& rng)
{
    const int side = std::min(spec.height, spec.width);
    Blob blob;
    blob.ellipse = uniform01(rng) < 0.5;
    blob.cy = uniform(rng, 0.0, spec.height);
    blob.cx = uniform(rng, 0.0, spec.width);
    // Log-uniform extent reproduces the wide scale spread of real scenes.
    const double frac = std::exp(uniform(rng, std::log(spec.size_min), std::log(spec.size_max)));
    const double major = std::max(3.0, frac * side);
    const double aspect = uniform(rng, 0.5, 1.0);
    blob.theta = uniform(rng, 0.0, std::numbers::pi);
    blob.a = major / 2.0;
    blob.b = std::max(1.5, aspect * major / 2.0);
    const int vertices = uniform_int(rng, 5, 9);
    std::vector<double> angles(vertices);
    for (double& t : angles) t = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    std::sort(angles.begin(), angles.end());
    for (double t : angles) {
        const double r = blob.a * uniform(rng, 0.6, 1.0);
        blob.vy.push_back(blob.cy + r * std::sin(t));
        blob.vx.push_back(blob.cx + r * std::cos(t));
    }
    return blob;
}

}  // namespace

std::pair<HsiCube, GroundTruth> synth_scene(const SceneSpec& spec, std::mt19937_64& rng)
{
    spec.validate();
    const int H = spec.height, W = spec.width, C = spec.bands();
    std::vector<std::uint8_t> region(static_cast<std::size_t>(H) * W, 0);

    for (int k = 0; k < spec.object_count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
            const Blob blob = sample_blob(spec, rng);
            std::vector<std::size_t> pixels;
            bool adds = false;
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x)
                    if (inside(blob, y + 0.5, x + 0.5)) {
                        const std::size_t i = static_cast<std::size_t>(y) * W + x;
                        pixels.push_back(i);
                        if (!region[i]) adds = true;
                    }
            if (!adds) continue;
            for (std::size_t i : pixels) region[i] = 1;
            placed = true;
        }
        if (!placed)
            throw Error("synth_scene: object " + std::to_string(k) +
                        " could not be placed without total overlap after 100 attempts");
    }

    GroundTruth gt;
    gt.height = H;
    gt.width = W;
    gt.labels.assign(static_cast<std::size_t>(H) * W, 0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            if (!region[i]) continue;
            bool rim = false;
            const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
            for (int d = 0; d < 4; ++d) {
                const int ny = y + dy[d], nx = x + dx[d];
                if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
                if (!region[static_cast<std::size_t>(ny) * W + nx]) rim = true;
            }
            gt.labels[i] = rim ? -1 : 1;
        }
    if (gt.count(1) == 0) throw Error("synth_scene: objects too small to hold any foreground pixel");

    // Straight boundary splitting the background into two materials.
    const double line_y = uniform(rng, 0.25 * H, 0.75 * H), line_x = uniform(rng, 0.25 * W, 0.75 * W);
    const double line_t = uniform(rng, 0.0, std::numbers::pi);
    // Smooth illumination: a few random low-frequency cosines.
    double wave[3][4];
    for (auto& w : wave) {
        w[0] = uniform(rng, 0.3, 2.0) * 2.0 * std::numbers::pi / H;
        w[1] = uniform(rng, 0.3, 2.0) * 2.0 * std::numbers::pi / W;
        w[2] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        w[3] = uniform(rng, -1.0, 1.0);
    }

    const std::vector<double>& blob_sig = spec.reversal ? spec.bg_signature : spec.fg_signature;
    const std::vector<double>& back_sig = spec.reversal ? spec.fg_signature : spec.bg_signature;

    HsiCube cube;
    cube.height = H;
    cube.width = W;
    cube.bands = C;
    cube.wavelengths = spec.wavelengths;
    cube.values.resize(static_cast<std::size_t>(H) * W * C);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            const std::vector<double>* sig = &back_sig;
            if (region[i]) {
                sig = &blob_sig;
            } else if (!spec.clutter_signature.empty()) {
                const double side = (x + 0.5 - line_x) * std::sin(line_t) - (y + 0.5 - line_y) * std::cos(line_t);
                if (side > 0) sig = &spec.clutter_signature;
            }
            double field = 0.0;
            for (const auto& w : wave) field += w[3] * std::cos(w[0] * y + w[1] * x + w[2]);
            const double gain = 1.0 + spec.shading * field / 3.0;
            for (int b = 0; b < C; ++b) {
                const double n = standard_normal(rng);
                const double r = (*sig)[b] * gain + spec.noise_std * n;
                const double raw = std::clamp(std::round(r * kRadiometricScale), 0.0, 65535.0);
                cube.values[i * C + b] = static_cast<float>(raw);
            }
        }
    return {std::move(cube), std::move(gt)};
}

std::vector<double> random_signature(std::mt19937_64& rng, const std::vector<double>& wavelengths)
{
    const double lo = wavelengths.front(), hi = wavelengths.back();
    const double span = std::max(hi - lo, 1.0);
    const double base = uniform(rng, 0.05, 0.35);
    const double slope = uniform(rng, -0.15, 0.25);
    double bumps[3][3];
    for (auto& bmp : bumps) {
        bmp[0] = uniform(rng, lo, hi);
        bmp[1] = uniform(rng, 0.05, 0.3) * span;
        bmp[2] = uniform(rng, -0.15, 0.3);
    }
    std::vector<double> sig(wavelengths.size());
    for (std::size_t i = 0; i < sig.size(); ++i) {
        const double t = (wavelengths[i] - lo) / span;
        double v = base + slope * t;
        for (const auto& bmp : bumps) {
            const double z = (wavelengths[i] - bmp[0]) / bmp[1];
            v += bmp[2] * std::exp(-0.5 * z * z);
        }
        sig[i] = std::clamp(v, 0.01, 0.9);
    }
    return sig;
}

SceneSpec random_scene_spec(std::mt19937_64& rng, const SceneOptions& opts)
{
    SceneSpec spec;
    spec.height = opts.side;
    spec.width = opts.side;
    spec.wavelengths = linear_wavelengths(opts.bands);
    spec.object_count = uniform_int(rng, opts.min_objects, opts.max_objects);
    spec.size_min = opts.size_min;
    spec.size_max = opts.size_max;
    spec.noise_std = opts.noise_std;
    spec.shading = opts.shading;
    const bool clutter = uniform01(rng) < opts.clutter_probability;
    spec.reversal = uniform01(rng) < opts.reversal_probability;

    auto separated = [&](const std::vector<double>& s, const std::vector<std::vector<double>*>& others) {
        for (const auto* o : others)
            if (spectral_angle(s, *o) < opts.min_spectral_angle) return false;
        return true;
    };
    spec.bg_signature = random_signature(rng, spec.wavelengths);
    for (int tries = 0;; ++tries) {
        spec.fg_signature = random_signature(rng, spec.wavelengths);
        if (separated(spec.fg_signature, {&spec.bg_signature})) break;
        if (tries > 1000) throw Error("random_scene_spec: cannot satisfy spectral angle floor");
    }
    if (clutter) {
        for (int tries = 0;; ++tries) {
            spec.clutter_signature = random_signature(rng, spec.wavelengths);
            if (separated(spec.clutter_signature, {&spec.bg_signature, &spec.fg_signature})) break;
            if (tries > 1000) throw Error("random_scene_spec: cannot satisfy spectral angle floor");
        }
    }
    return spec;
}

}  // namespace dssn
