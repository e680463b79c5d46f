#include "dssn/mapio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "dssn/tensor.hpp"

namespace dssn {

namespace {

void check_size(const std::vector<double>& map, int height, int width)
{
    if (height < 1 || width < 1 || map.size() != static_cast<std::size_t>(height) * width)
        throw ShapeError("map has " + std::to_string(map.size()) + " values, expected " + std::to_string(height) +
                         "x" + std::to_string(width));
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const std::vector<double>& map, int height, int width)
{
    check_size(map, height, width);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P5\n" << width << " " << height << "\n255\n";
    for (double v : map) {
        const double c = std::clamp(v, 0.0, 1.0);
        out.put(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255))));
    }
}

void write_float_map(const std::filesystem::path& path, const std::vector<double>& map, int height, int width)
{
    check_size(map, height, width);
    std::vector<float> f(map.begin(), map.end());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
}

std::vector<float> read_float_map(const std::filesystem::path& path, int height, int width)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<float> f(static_cast<std::size_t>(height) * width);
    in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
    if (!in) throw Error(path.string() + " is shorter than " + std::to_string(f.size() * 4) + " bytes");
    return f;
}

}  // namespace dssn
