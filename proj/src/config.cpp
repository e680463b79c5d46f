#include "dssn/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dssn {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <std::size_t N>
std::array<int, N> parse_list(const std::string& key, const std::string& text)
{
    std::array<int, N> out{};
    std::istringstream is(text);
    std::string tok;
    std::size_t i = 0;
    while (std::getline(is, tok, ',')) {
        if (i >= N) throw ConfigError("config: '" + key + "' expects " + std::to_string(N) + " values");
        tok = trim(tok);
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out[i]);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw ConfigError("config: '" + key + "' has non-integer entry '" + tok + "'");
        ++i;
    }
    if (i != N) throw ConfigError("config: '" + key + "' expects " + std::to_string(N) + " values");
    return out;
}

template <std::size_t N>
std::string join(const std::array<int, N>& a)
{
    std::string s;
    for (std::size_t i = 0; i < N; ++i) s += (i ? "," : "") + std::to_string(a[i]);
    return s;
}

std::string fmt_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text)
{
    KeyValues kv;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

void KeyValues::set_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string KeyValues::get(const std::string& key, const std::string& fallback) const
{
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

int KeyValues::get_int(const std::string& key, int fallback) const
{
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    int v = 0;
    const auto& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("config: '" + key + "' is not an integer: " + s);
    return v;
}

std::uint64_t KeyValues::get_u64(const std::string& key, std::uint64_t fallback) const
{
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("config: '" + key + "' is not an unsigned integer: " + s);
    return v;
}

double KeyValues::get_double(const std::string& key, double fallback) const
{
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    double v = 0;
    const auto& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("config: '" + key + "' is not a number: " + s);
    return v;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const
{
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const auto& s = it->second;
    if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "off" || s == "no") return false;
    throw ConfigError("config: '" + key + "' is not a boolean: " + s);
}

std::string KeyValues::str() const
{
    std::string out;
    for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
    return out;
}

void ModelConfig::validate() const
{
    if (in_bands < 1) throw ConfigError("model.bands must be >= 1");
    for (int c : channels)
        if (c < 1) throw ConfigError("model.channels entries must be >= 1");
    if (backbone_depth < 1) throw ConfigError("model.backbone_depth must be >= 1");
    if (hidden < 0) throw ConfigError("model.hidden must be >= 0");
    for (int i = 0; i < 3; ++i) {
        if (hrfm_widths[i] < 1) throw ConfigError("model.hrfm_widths entries must be >= 1");
        if (i > 0 && hrfm_widths[i] >= hrfm_widths[i - 1])
            throw ConfigError("model.hrfm_widths must strictly decrease");
    }
    if (!spatial_branch && !spectral_branch) throw ConfigError("model: at least one SJFE branch must be enabled");
}

ModelConfig ModelConfig::from(const KeyValues& kv)
{
    ModelConfig c;
    c.in_bands = kv.get_int("model.bands", c.in_bands);
    if (kv.has("model.channels")) c.channels = parse_list<5>("model.channels", kv.get("model.channels", ""));
    c.backbone_depth = kv.get_int("model.backbone_depth", c.backbone_depth);
    c.hidden = kv.get_int("model.hidden", c.hidden);
    if (kv.has("model.hrfm_widths"))
        c.hrfm_widths = parse_list<3>("model.hrfm_widths", kv.get("model.hrfm_widths", ""));
    c.seed = kv.get_u64("model.seed", c.seed);
    c.spatial_branch = kv.get_bool("model.spatial", c.spatial_branch);
    c.spectral_branch = kv.get_bool("model.spectral", c.spectral_branch);
    c.pixelwise_attention = kv.get_bool("model.csab", c.pixelwise_attention);
    c.hrfm = kv.get_bool("model.hrfm", c.hrfm);
    c.validate();
    return c;
}

void ModelConfig::write(KeyValues& kv) const
{
    kv.set("model.bands", std::to_string(in_bands));
    kv.set("model.channels", join(channels));
    kv.set("model.backbone_depth", std::to_string(backbone_depth));
    kv.set("model.hidden", std::to_string(hidden));
    kv.set("model.hrfm_widths", join(hrfm_widths));
    kv.set("model.seed", std::to_string(seed));
    kv.set("model.spatial", spatial_branch ? "1" : "0");
    kv.set("model.spectral", spectral_branch ? "1" : "0");
    kv.set("model.csab", pixelwise_attention ? "1" : "0");
    kv.set("model.hrfm", hrfm ? "1" : "0");
}

ModelConfig ModelConfig::scaled_channels(double factor) const
{
    ModelConfig c = *this;
    for (int& ch : c.channels) ch = std::max(1, static_cast<int>(ch * factor + 0.5));
    return c;
}

void TrainConfig::validate() const
{
    if (!(lr0 >= 0.0)) throw ConfigError("train.lr must be >= 0");
    if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (batch < 1) throw ConfigError("train.batch must be >= 1");
    if (side < 32 || side % 32 != 0) throw ConfigError("train.side must be a positive multiple of 32");
    if (!bce && !iou && !ssim) throw ConfigError("train: no loss term enabled");
}

TrainConfig TrainConfig::from(const KeyValues& kv)
{
    TrainConfig c;
    c.lr0 = kv.get_double("train.lr", c.lr0);
    c.epochs = kv.get_int("train.epochs", c.epochs);
    c.batch = kv.get_int("train.batch", c.batch);
    c.seed = kv.get_u64("train.seed", c.seed);
    c.side = kv.get_int("train.side", c.side);
    c.augment = kv.get_bool("train.augment", c.augment);
    c.bce = kv.get_bool("train.bce", c.bce);
    c.iou = kv.get_bool("train.iou", c.iou);
    c.ssim = kv.get_bool("train.ssim", c.ssim);
    c.deep_supervision = kv.get_bool("train.deep_supervision", c.deep_supervision);
    c.validate();
    return c;
}

void TrainConfig::write(KeyValues& kv) const
{
    kv.set("train.lr", fmt_double(lr0));
    kv.set("train.epochs", std::to_string(epochs));
    kv.set("train.batch", std::to_string(batch));
    kv.set("train.seed", std::to_string(seed));
    kv.set("train.side", std::to_string(side));
    kv.set("train.augment", augment ? "1" : "0");
    kv.set("train.bce", bce ? "1" : "0");
    kv.set("train.iou", iou ? "1" : "0");
    kv.set("train.ssim", ssim ? "1" : "0");
    kv.set("train.deep_supervision", deep_supervision ? "1" : "0");
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

std::string hex64(std::uint64_t v)
{
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[v & 0xf];
        v >>= 4;
    }
    buf[16] = 0;
    return buf;
}

}  // namespace dssn
