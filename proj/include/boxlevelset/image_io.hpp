#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "boxlevelset/grid.hpp"

namespace boxlevelset {

/// Reads an 8-bit PNG or JPEG. Gray images load as one channel, everything
/// else as three (alpha dropped). Values stay in [0, 255]. Throws IoError.
RawImage read_image(const std::filesystem::path& path);

/// Writes interleaved 8-bit pixels. `channels` is 1 (gray) or 3 (RGB).
void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<std::uint8_t>& pixels);

/// Writes a {0,1} mask as a 0/255 grayscale PNG.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

/// Reads a grayscale PNG back as a mask (nonzero -> 1).
BinaryMask read_mask_png(const std::filesystem::path& path);

/// Quantizes a 1- or 3-channel image with values in [0, 255] and writes it.
void write_image_png(const std::filesystem::path& path, const RawImage& image);

}  // namespace boxlevelset
