#pragma once

#include <string>

#include "ecgraph/raster.hpp"

namespace ecgraph {

// Format chosen by magic bytes: PNG (8-byte signature) or BMP ("BM",
// uncompressed 24/32-bit). Anything else is a DecodeError.
RasterImage load_image(const std::string& path);

void save_png(const RasterImage& img, const std::string& path);

// 8-bit grayscale PNG, 255 where the bit is set.
void save_mask_png(const BinaryRaster& mask, const std::string& path);
BinaryRaster load_mask_png(const std::string& path);

} // namespace ecgraph
