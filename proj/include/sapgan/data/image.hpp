#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sapgan::data {

/// 8-bit image, 1 (gray) or 3 (RGB) interleaved channels, row-major.
struct RawImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;

  RawImage() = default;
  RawImage(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill = 0);

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c = 0) { return pixels[(y * width + x) * channels + c]; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels[(y * width + x) * channels + c];
  }
  bool valid() const { return width > 0 && height > 0 && (channels == 1 || channels == 3) &&
                              pixels.size() == width * height * channels; }

  friend bool operator==(const RawImage&, const RawImage&) = default;
};

/// Quarter turn clockwise: (x, y) -> (h-1-y, x).
RawImage rotate_cw(const RawImage& img);
/// Quarter turn counter-clockwise; inverse of rotate_cw.
RawImage rotate_ccw(const RawImage& img);
/// Bilinear resample with half-pixel centers and edge clamping.
RawImage resize_bilinear(const RawImage& img, std::size_t width, std::size_t height);
RawImage crop(const RawImage& img, std::size_t x0, std::size_t y0, std::size_t width, std::size_t height);
/// Rec.601 luma for RGB input; copy for gray input.
RawImage to_gray(const RawImage& img);
RawImage to_rgb(const RawImage& img);

}  // namespace sapgan::data
