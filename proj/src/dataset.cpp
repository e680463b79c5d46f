#include "dssn/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace dssn {

Sample prepare_sample(std::string id, const HsiCube& cube, const GroundTruth& gt, int side)
{
    HsiCube scaled = cube.scaled ? cube : scale_radiometric(cube);
    auto [c, g] = resize_cube(scaled, gt, side);
    return {std::move(id), std::move(c), std::move(g)};
}

std::uint64_t scene_seed(std::uint64_t seed, int index)
{
    return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index) + 1;
}

std::vector<SyntheticScene> synthetic_scenes(int count, std::uint64_t seed, const SceneOptions& opts, int first_index)
{
    std::vector<SyntheticScene> out;
    for (int i = first_index; i < first_index + count; ++i) {
        SyntheticScene s;
        char id[32];
        std::snprintf(id, sizeof id, "scene_%04d", i);
        s.id = id;
        s.seed = scene_seed(seed, i);
        std::mt19937_64 rng(s.seed);
        // A draw whose blobs are all rim, or cannot be placed, is redrawn from the same stream.
        for (int attempt = 0;; ++attempt) {
            s.spec = random_scene_spec(rng, opts);
            try {
                std::tie(s.cube, s.gt) = synth_scene(s.spec, rng);
                break;
            } catch (const Error&) {
                if (attempt == 9) throw;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

Dataset to_dataset(const std::vector<SyntheticScene>& scenes, int side)
{
    Dataset d;
    for (const auto& s : scenes) d.push_back(prepare_sample(s.id, s.cube, s.gt, side));
    return d;
}

void write_scene_directory(const std::filesystem::path& dir, const std::vector<SyntheticScene>& scenes,
                           const SceneOptions& opts, std::uint64_t seed)
{
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json manifest;
    manifest["seed"] = seed;
    manifest["options"] = {{"side", opts.side},
                           {"bands", opts.bands},
                           {"min_objects", opts.min_objects},
                           {"max_objects", opts.max_objects},
                           {"size_min", opts.size_min},
                           {"size_max", opts.size_max},
                           {"noise_std", opts.noise_std},
                           {"shading", opts.shading},
                           {"clutter_probability", opts.clutter_probability},
                           {"reversal_probability", opts.reversal_probability},
                           {"min_spectral_angle", opts.min_spectral_angle}};
    auto& list = manifest["scenes"] = nlohmann::ordered_json::array();
    for (const auto& s : scenes) {
        save_cube(dir / (s.id + ".hdr"), dir / (s.id + ".dat"), s.cube, &s.gt);
        list.push_back({{"id", s.id},
                        {"seed", s.seed},
                        {"header", s.id + ".hdr"},
                        {"data", s.id + ".dat"},
                        {"spec",
                         {{"height", s.spec.height},
                          {"width", s.spec.width},
                          {"object_count", s.spec.object_count},
                          {"size_range", {s.spec.size_min, s.spec.size_max}},
                          {"noise_std", s.spec.noise_std},
                          {"shading", s.spec.shading},
                          {"reversal", s.spec.reversal},
                          {"clutter", !s.spec.clutter_signature.empty()},
                          {"fg_signature", s.spec.fg_signature},
                          {"bg_signature", s.spec.bg_signature}}}});
    }
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

Dataset load_directory(const std::filesystem::path& dir, int side, bool require_labels)
{
    if (!std::filesystem::is_directory(dir)) throw Error("dataset: " + dir.string() + " is not a directory");
    std::vector<std::filesystem::path> headers;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".hdr") headers.push_back(e.path());
    std::sort(headers.begin(), headers.end());
    Dataset d;
    for (const auto& h : headers) {
        auto data = h;
        data.replace_extension(".dat");
        if (!std::filesystem::exists(data)) throw Error("dataset: missing payload " + data.string());
        LabeledCube lc = load_cube(h, data);
        if (!lc.gt) {
            if (require_labels) throw Error("dataset: " + h.string() + " has no labels");
            GroundTruth blank{lc.cube.height, lc.cube.width,
                              std::vector<std::int8_t>(static_cast<std::size_t>(lc.cube.height) * lc.cube.width, 0)};
            lc.gt = blank;
        }
        d.push_back(prepare_sample(h.stem().string(), lc.cube, *lc.gt, side));
    }
    if (d.empty()) throw Error("dataset: no cubes in " + dir.string());
    return d;
}

template <typename T>
Tensor<T> batch_tensor(const std::vector<const HsiCube*>& cubes)
{
    if (cubes.empty()) throw Error("batch_tensor: empty batch");
    const HsiCube& f = *cubes.front();
    Tensor<T> out(Shape(static_cast<int>(cubes.size()), f.height, f.width, f.bands));
    std::size_t k = 0;
    for (const HsiCube* c : cubes) {
        if (c->height != f.height || c->width != f.width || c->bands != f.bands)
            throw ShapeError("batch_tensor: cubes differ in shape");
        for (float v : c->values) out[k++] = static_cast<T>(v);
    }
    return out;
}

template Tensor<float> batch_tensor(const std::vector<const HsiCube*>&);
template Tensor<double> batch_tensor(const std::vector<const HsiCube*>&);

}  // namespace dssn
