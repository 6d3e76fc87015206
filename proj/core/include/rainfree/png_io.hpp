#pragma once

#include <filesystem>

#include "rainfree/image.hpp"

namespace rainfree {

// Decodes any PNG color type to 8-bit RGB and maps value v to v / 255.
// Throws std::runtime_error on unreadable or malformed files.
ImageTensor read_png(const std::filesystem::path& path);

// Writes the first sample of `img` as 8-bit RGB, rounding clamp01(v) * 255.
void write_png(const std::filesystem::path& path, const ImageTensor& img);

}  // namespace rainfree
