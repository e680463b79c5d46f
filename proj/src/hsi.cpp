#include "dssn/hsi.hpp"

#include <algorithm>
#include <cstring>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "dssn/kernels.hpp"
#include "dssn/random.hpp"

namespace dssn {

template <typename T>
Tensor<T> HsiCube::to_tensor() const
{
    std::vector<T> data(values.begin(), values.end());
    return Tensor<T>(Shape(1, height, width, bands), std::move(data));
}

template Tensor<float> HsiCube::to_tensor() const;
template Tensor<double> HsiCube::to_tensor() const;

void HsiCube::validate() const
{
    if (height <= 0 || width <= 0 || bands <= 0) throw FormatError("cube: extents must be positive");
    if (values.size() != static_cast<std::size_t>(height) * width * bands)
        throw FormatError("cube: value count " + std::to_string(values.size()) + " != H*W*C");
    if (wavelengths.size() != static_cast<std::size_t>(bands))
        throw FormatError("cube: " + std::to_string(wavelengths.size()) + " wavelengths for " +
                          std::to_string(bands) + " bands");
    for (std::size_t i = 1; i < wavelengths.size(); ++i)
        if (!(wavelengths[i] > wavelengths[i - 1])) throw FormatError("cube: wavelengths not strictly increasing");
}

std::size_t GroundTruth::count(std::int8_t label) const
{
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void GroundTruth::validate() const
{
    if (labels.size() != static_cast<std::size_t>(height) * width)
        throw FormatError("labels: count " + std::to_string(labels.size()) + " != H*W");
    for (std::int8_t v : labels)
        if (v < -1 || v > 1) throw FormatError("labels: illegal value " + std::to_string(v));
}

namespace {

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("header: bad number '" + s + "'");
    return v;
}

int parse_int(const std::string& s)
{
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("header: bad integer '" + s + "'");
    return v;
}

void put_u16(std::string& out, std::uint16_t v)
{
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_f32(std::string& out, float f)
{
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

HsiCube resample(const HsiCube& cube, int out_h, int out_w)
{
    HsiCube out = cube;
    out.height = out_h;
    out.width = out_w;
    Tensor<float> t = kernels::bilinear_resize(cube.to_tensor<float>(), out_h, out_w);
    out.values = std::move(t.storage());
    return out;
}

GroundTruth nearest_labels(const GroundTruth& gt, int out_h, int out_w)
{
    GroundTruth out;
    out.height = out_h;
    out.width = out_w;
    out.labels.resize(static_cast<std::size_t>(out_h) * out_w);
    auto pick = [](int i, int in, int outn) {
        const int s = static_cast<int>(std::floor((i + 0.5) * in / outn));
        return std::min(s, in - 1);
    };
    for (int y = 0; y < out_h; ++y) {
        const int sy = pick(y, gt.height, out_h);
        for (int x = 0; x < out_w; ++x) out.at(y, x) = gt.at(sy, pick(x, gt.width, out_w));
    }
    return out;
}

}  // namespace

void save_cube(const std::filesystem::path& header_path, const std::filesystem::path& data_path, const HsiCube& cube,
               const GroundTruth* gt)
{
    cube.validate();
    if (gt) {
        gt->validate();
        if (gt->height != cube.height || gt->width != cube.width)
            throw FormatError("save_cube: label plane extent differs from cube");
    }
    std::ostringstream hdr;
    hdr << "HSICUBE\n";
    hdr << "version " << kCubeFormatVersion << "\n";
    hdr << "height " << cube.height << "\n";
    hdr << "width " << cube.width << "\n";
    hdr << "bands " << cube.bands << "\n";
    hdr << "dtype " << (cube.scaled ? "float32" : "uint16") << "\n";
    hdr << "scaled " << (cube.scaled ? 1 : 0) << "\n";
    hdr << "wavelengths";
    for (double w : cube.wavelengths) hdr << " " << format_double(w);
    hdr << "\n";
    hdr << "has_labels " << (gt ? 1 : 0) << "\n";

    const std::size_t plane = static_cast<std::size_t>(cube.height) * cube.width;
    std::string payload;
    payload.reserve(plane * cube.bands * (cube.scaled ? 4 : 2) + (gt ? plane : 0));
    for (int b = 0; b < cube.bands; ++b)
        for (std::size_t p = 0; p < plane; ++p) {
            const float v = cube.values[p * cube.bands + b];
            if (cube.scaled) {
                put_f32(payload, v);
            } else {
                if (!(v >= 0.0f && v <= 65535.0f) || v != std::floor(v))
                    throw FormatError("save_cube: raw cube value " + format_double(v) + " is not a uint16");
                put_u16(payload, static_cast<std::uint16_t>(v));
            }
        }
    if (gt)
        for (std::int8_t l : gt->labels) payload.push_back(static_cast<char>(l));

    std::ofstream h(header_path, std::ios::binary);
    if (!h) throw FormatError("save_cube: cannot open " + header_path.string());
    h << hdr.str();
    std::ofstream d(data_path, std::ios::binary);
    if (!d) throw FormatError("save_cube: cannot open " + data_path.string());
    d.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!h || !d) throw FormatError("save_cube: write failed");
}

LabeledCube load_cube(const std::filesystem::path& header_path, const std::filesystem::path& data_path)
{
    std::ifstream h(header_path);
    if (!h) throw FormatError("load_cube: cannot open " + header_path.string());
    std::string line;
    std::getline(h, line);
    if (line != "HSICUBE") throw FormatError("load_cube: bad magic in " + header_path.string());
    std::map<std::string, std::string> kv;
    while (std::getline(h, line)) {
        if (line.empty()) continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw FormatError("load_cube: malformed header line '" + line + "'");
        kv[line.substr(0, sp)] = line.substr(sp + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError(std::string("load_cube: header missing '") + key + "'");
        return it->second;
    };
    const int version = parse_int(need("version"));
    if (version != kCubeFormatVersion) throw FormatError("load_cube: unknown version " + std::to_string(version));

    LabeledCube out;
    HsiCube& cube = out.cube;
    cube.height = parse_int(need("height"));
    cube.width = parse_int(need("width"));
    cube.bands = parse_int(need("bands"));
    const std::string dtype = need("dtype");
    if (dtype != "uint16" && dtype != "float32") throw FormatError("load_cube: unknown dtype " + dtype);
    cube.scaled = parse_int(need("scaled")) != 0;
    if (cube.scaled != (dtype == "float32")) throw FormatError("load_cube: dtype inconsistent with scaled flag");
    {
        std::istringstream ws(need("wavelengths"));
        std::string tok;
        while (ws >> tok) cube.wavelengths.push_back(parse_double(tok));
    }
    const bool has_labels = parse_int(need("has_labels")) != 0;
    if (cube.height <= 0 || cube.width <= 0 || cube.bands <= 0) throw FormatError("load_cube: non-positive extent");

    const std::size_t plane = static_cast<std::size_t>(cube.height) * cube.width;
    const std::size_t sample = cube.scaled ? 4 : 2;
    const std::size_t expected = plane * cube.bands * sample + (has_labels ? plane : 0);

    std::ifstream d(data_path, std::ios::binary);
    if (!d) throw FormatError("load_cube: cannot open " + data_path.string());
    std::string bytes((std::istreambuf_iterator<char>(d)), std::istreambuf_iterator<char>());
    if (bytes.size() != expected)
        throw FormatError("load_cube: " + data_path.string() + " has " + std::to_string(bytes.size()) +
                          " bytes, expected " + std::to_string(expected) +
                          (bytes.size() < expected ? " (truncated)" : " (trailing data)"));

    cube.values.resize(plane * cube.bands);
    const auto* u = reinterpret_cast<const unsigned char*>(bytes.data());
    std::size_t off = 0;
    for (int b = 0; b < cube.bands; ++b)
        for (std::size_t p = 0; p < plane; ++p) {
            float v;
            if (cube.scaled) {
                std::uint32_t bits = 0;
                for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(u[off + i]) << (8 * i);
                std::memcpy(&v, &bits, 4);
                off += 4;
            } else {
                v = static_cast<float>(static_cast<std::uint16_t>(u[off] | (u[off + 1] << 8)));
                off += 2;
            }
            cube.values[p * cube.bands + b] = v;
        }
    cube.validate();
    if (has_labels) {
        GroundTruth gt;
        gt.height = cube.height;
        gt.width = cube.width;
        gt.labels.resize(plane);
        for (std::size_t p = 0; p < plane; ++p) gt.labels[p] = static_cast<std::int8_t>(u[off + p]);
        gt.validate();
        out.gt = std::move(gt);
    }
    return out;
}

HsiCube scale_radiometric(const HsiCube& cube)
{
    if (cube.scaled) throw FormatError("scale_radiometric: cube is already scaled");
    HsiCube out = cube;
    for (float& v : out.values) v = static_cast<float>(static_cast<double>(v) / kRadiometricScale);
    out.scaled = true;
    return out;
}

HsiCube resize_cube(const HsiCube& cube, int side)
{
    if (side < 8) throw Error("resize_cube: side must be >= 8, got " + std::to_string(side));
    return resample(cube, side, side);
}

std::pair<HsiCube, GroundTruth> resize_cube(const HsiCube& cube, const GroundTruth& gt, int side)
{
    if (gt.height != cube.height || gt.width != cube.width)
        throw ShapeError("resize_cube: label extent differs from cube extent");
    return {resize_cube(cube, side), nearest_labels(gt, side, side)};
}

std::pair<HsiCube, GroundTruth> flip_horizontal(const HsiCube& cube, const GroundTruth& gt)
{
    HsiCube c = cube;
    GroundTruth g = gt;
    for (int y = 0; y < cube.height; ++y)
        for (int x = 0; x < cube.width; ++x) {
            const int sx = cube.width - 1 - x;
            for (int b = 0; b < cube.bands; ++b) c.at(y, x, b) = cube.at(y, sx, b);
            g.at(y, x) = gt.at(y, sx);
        }
    return {std::move(c), std::move(g)};
}

std::pair<HsiCube, GroundTruth> crop(const HsiCube& cube, const GroundTruth& gt, int y0, int x0, int h, int w)
{
    if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > cube.height || x0 + w > cube.width)
        throw ShapeError("crop: window outside the cube");
    HsiCube c = cube;
    c.height = h;
    c.width = w;
    c.values.resize(static_cast<std::size_t>(h) * w * cube.bands);
    GroundTruth g;
    g.height = h;
    g.width = w;
    g.labels.resize(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            for (int b = 0; b < cube.bands; ++b) c.at(y, x, b) = cube.at(y0 + y, x0 + x, b);
            g.at(y, x) = gt.at(y0 + y, x0 + x);
        }
    return {std::move(c), std::move(g)};
}

std::pair<HsiCube, GroundTruth> augment(const HsiCube& cube, const GroundTruth& gt, std::mt19937_64& rng,
                                        const AugmentOptions& opts)
{
    const bool do_flip = uniform01(rng) < opts.flip_probability;
    const double frac = uniform(rng, opts.min_crop, opts.max_crop);
    const int ch = std::clamp(static_cast<int>(std::lround(frac * cube.height)), 1, cube.height);
    const int cw = std::clamp(static_cast<int>(std::lround(frac * cube.width)), 1, cube.width);
    const int y0 = uniform_int(rng, 0, cube.height - ch);
    const int x0 = uniform_int(rng, 0, cube.width - cw);

    auto [c, g] = do_flip ? flip_horizontal(cube, gt) : std::pair<HsiCube, GroundTruth>{cube, gt};
    if (ch == cube.height && cw == cube.width) return {std::move(c), std::move(g)};
    auto [cc, cg] = crop(c, g, y0, x0, ch, cw);
    return {resample(cc, cube.height, cube.width), nearest_labels(cg, cube.height, cube.width)};
}

std::vector<double> valid_mask(const GroundTruth& gt)
{
    std::vector<double> m(gt.labels.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const std::int8_t l = gt.labels[i];
        if (l < -1 || l > 1) throw FormatError("valid_mask: illegal label " + std::to_string(l));
        m[i] = l == -1 ? 0.0 : 1.0;
    }
    return m;
}

std::vector<double> binary_targets(const GroundTruth& gt)
{
    std::vector<double> t(gt.labels.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = gt.labels[i] == 1 ? 1.0 : 0.0;
    return t;
}

std::vector<double> linear_wavelengths(int bands, double first_nm, double last_nm)
{
    std::vector<double> w(bands);
    for (int i = 0; i < bands; ++i)
        w[i] = bands == 1 ? first_nm : first_nm + (last_nm - first_nm) * i / (bands - 1);
    return w;
}

}  // namespace dssn
