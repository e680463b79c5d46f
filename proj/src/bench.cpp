#include "dssn/bench.hpp"

#include <cstdio>

namespace dssn {

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

BenchmarkConfig BenchmarkConfig::desk()
{
    BenchmarkConfig c;
    c.scenes.side = 64;
    c.scenes.bands = 32;
    c.model.in_bands = c.scenes.bands;
    c.model = c.model.scaled_channels(0.5);
    c.train.side = 64;
    c.train.epochs = 20;
    c.train.batch = 4;
    return c;
}

SceneOptions scene_options_from(const KeyValues& kv, SceneOptions o)
{
    o.side = kv.get_int("synth.side", o.side);
    o.bands = kv.get_int("synth.bands", o.bands);
    o.min_objects = kv.get_int("synth.min_objects", o.min_objects);
    o.max_objects = kv.get_int("synth.max_objects", o.max_objects);
    o.size_min = kv.get_double("synth.size_min", o.size_min);
    o.size_max = kv.get_double("synth.size_max", o.size_max);
    o.noise_std = kv.get_double("synth.noise_std", o.noise_std);
    o.shading = kv.get_double("synth.shading", o.shading);
    o.clutter_probability = kv.get_double("synth.clutter_probability", o.clutter_probability);
    o.reversal_probability = kv.get_double("synth.reversal_probability", o.reversal_probability);
    o.min_spectral_angle = kv.get_double("synth.min_spectral_angle", o.min_spectral_angle);
    if (o.side < 8) throw ConfigError("synth.side must be >= 8");
    if (o.bands < 2) throw ConfigError("synth.bands must be >= 2");
    if (o.min_objects < 1 || o.max_objects < o.min_objects) throw ConfigError("synth object count range is invalid");
    return o;
}

void write_scene_options(const SceneOptions& o, KeyValues& kv)
{
    kv.set("synth.side", std::to_string(o.side));
    kv.set("synth.bands", std::to_string(o.bands));
    kv.set("synth.min_objects", std::to_string(o.min_objects));
    kv.set("synth.max_objects", std::to_string(o.max_objects));
    kv.set("synth.size_min", num(o.size_min));
    kv.set("synth.size_max", num(o.size_max));
    kv.set("synth.noise_std", num(o.noise_std));
    kv.set("synth.shading", num(o.shading));
    kv.set("synth.clutter_probability", num(o.clutter_probability));
    kv.set("synth.reversal_probability", num(o.reversal_probability));
    kv.set("synth.min_spectral_angle", num(o.min_spectral_angle));
}

BenchmarkConfig BenchmarkConfig::from(const KeyValues& kv)
{
    BenchmarkConfig c = desk();
    KeyValues merged;
    c.write(merged);
    for (const auto& [k, v] : kv.entries()) {
        if (!merged.has(k)) throw ConfigError("unknown config key '" + k + "'");
        merged.set(k, v);
    }
    c.model = ModelConfig::from(merged);
    c.train = TrainConfig::from(merged);
    c.scenes = scene_options_from(merged, c.scenes);
    c.train_count = merged.get_int("data.train_count", c.train_count);
    c.test_count = merged.get_int("data.test_count", c.test_count);
    c.data_seed = merged.get_u64("data.seed", c.data_seed);
    if (c.train_count < 1 || c.test_count < 1) throw ConfigError("data.train_count and data.test_count must be >= 1");
    if (c.model.in_bands != c.scenes.bands) throw ConfigError("model.bands must equal synth.bands");
    return c;
}

void BenchmarkConfig::write(KeyValues& kv) const
{
    model.write(kv);
    train.write(kv);
    write_scene_options(scenes, kv);
    kv.set("data.train_count", std::to_string(train_count));
    kv.set("data.test_count", std::to_string(test_count));
    kv.set("data.seed", std::to_string(data_seed));
}

BenchmarkData make_benchmark_data(const BenchmarkConfig& cfg)
{
    BenchmarkData d;
    d.train = to_dataset(synthetic_scenes(cfg.train_count, cfg.data_seed, cfg.scenes, 0), cfg.train.side);
    d.test = to_dataset(synthetic_scenes(cfg.test_count, cfg.data_seed, cfg.scenes, cfg.train_count), cfg.train.side);
    return d;
}

}  // namespace dssn
