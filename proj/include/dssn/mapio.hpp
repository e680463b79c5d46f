#pragma once

#include <filesystem>
#include <vector>

namespace dssn {

// 8-bit binary PGM; values are clamped to [0,1] and scaled to 0..255.
void write_pgm(const std::filesystem::path& path, const std::vector<double>& map, int height, int width);

// Raw little-endian float32, row-major, no header.
void write_float_map(const std::filesystem::path& path, const std::vector<double>& map, int height, int width);
std::vector<float> read_float_map(const std::filesystem::path& path, int height, int width);

}  // namespace dssn
