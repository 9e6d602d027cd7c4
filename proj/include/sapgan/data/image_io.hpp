#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sapgan/data/image.hpp"

namespace sapgan::data {

/// Decodes PNG or binary/ASCII PPM/PGM by content sniffing. Gray stays 1-channel;
/// alpha is dropped; 16-bit samples are reduced to 8 bits.
/// Throws IoError naming the path on any read or decode failure.
RawImage load_image(const std::filesystem::path& path);

/// Writes PNG, or PGM/PPM when the extension is .pgm/.ppm.
void save_image(const RawImage& img, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RawImage& img);
RawImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& origin);

bool is_image_file(const std::filesystem::path& path);

}  // namespace sapgan::data
