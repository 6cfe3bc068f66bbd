#pragma once

#include <filesystem>

#include "dermfuse/raster.hpp"

namespace dermfuse {

// Decodes PNG or JPEG (by signature) into an 8-bit RGB raster. Alpha is dropped and
// grayscale is expanded. Throws IoError.
RasterImage read_image(const std::filesystem::path& path);

// Writes an 8-bit RGB PNG; normalized images are converted with to_bytes().
void write_png(const std::filesystem::path& path, const RasterImage& img);

}  // namespace dermfuse
