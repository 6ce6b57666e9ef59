#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "parkvision/types.hpp"

namespace parkvision {

/// Decodes a PNG/JPEG file. Grayscale files load as 1 channel, color
/// files as 3-channel RGB (alpha is dropped).
ImageBuffer load_image(const std::filesystem::path& path);

/// Encodes by file extension (.png, .jpg, ...).
void save_image(const ImageBuffer& image, const std::filesystem::path& path);

/// JPEG bytes for the remote inference request body.
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& image, int quality = 90);

/// Decodes an in-memory PNG/JPEG buffer.
ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes);

}  // namespace parkvision
