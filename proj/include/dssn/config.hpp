#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "dssn/tensor.hpp"

namespace dssn {

class ConfigError : public Error {
public:
    using Error::Error;
};

// Flat "key = value" configuration; '#' starts a comment.
class KeyValues {
public:
    static KeyValues parse(const std::string& text);
    static KeyValues load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    // "key=value" override as given on the command line.
    void set_override(const std::string& assignment);
    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const { return kv_; }

    std::string get(const std::string& key, const std::string& fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    std::string str() const;

private:
    std::map<std::string, std::string> kv_;
};

struct ModelConfig {
    int in_bands = 32;
    std::array<int, 5> channels{16, 24, 32, 64, 96};
    int backbone_depth = 2;  // convolutions per backbone stage
    int hidden = 0;          // CSAB hidden width; 0 means channels[0]
    std::array<int, 3> hrfm_widths{16, 8, 4};
    std::uint64_t seed = 7;
    bool spatial_branch = true;
    bool spectral_branch = true;
    bool pixelwise_attention = true;  // false: similarity maps are summed directly
    bool hrfm = true;                 // false: stacked convolutions replace HRFM

    int hidden_width() const { return hidden > 0 ? hidden : channels[0]; }
    void validate() const;

    static ModelConfig from(const KeyValues& kv);
    void write(KeyValues& kv) const;
    ModelConfig scaled_channels(double factor) const;
};

struct TrainConfig {
    double lr0 = 3e-3;
    int epochs = 100;
    int batch = 16;
    std::uint64_t seed = 1;
    int side = 256;
    bool augment = true;
    bool bce = true;
    bool iou = true;
    bool ssim = false;
    bool deep_supervision = true;

    void validate() const;

    static TrainConfig from(const KeyValues& kv);
    void write(KeyValues& kv) const;
};

struct MetricConfig {
    double beta2 = 0.3;
    int thresholds = 256;
    double s_alpha = 0.5;
};

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

}  // namespace dssn
