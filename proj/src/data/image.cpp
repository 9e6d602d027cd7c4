#include "sapgan/data/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sapgan/errors.hpp"

namespace sapgan::data {

RawImage::RawImage(std::size_t w, std::size_t h, std::size_t c, std::uint8_t fill)
    : width(w), height(h), channels(c), pixels(w * h * c, fill) {}

RawImage rotate_cw(const RawImage& img) {
  RawImage out(img.height, img.width, img.channels);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) out.at(img.height - 1 - y, x, c) = img.at(x, y, c);
  return out;
}

RawImage rotate_ccw(const RawImage& img) {
  RawImage out(img.height, img.width, img.channels);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < img.channels; ++c) out.at(y, img.width - 1 - x, c) = img.at(x, y, c);
  return out;
}

RawImage resize_bilinear(const RawImage& img, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) throw ShapeError("resize to an empty image");
  if (width == img.width && height == img.height) return img;
  RawImage out(width, height, img.channels);
  const double sx = static_cast<double>(img.width) / static_cast<double>(width);
  const double sy = static_cast<double>(img.height) / static_cast<double>(height);
  for (std::size_t y = 0; y < height; ++y) {
    double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    auto y0 = static_cast<std::size_t>(fy);
    std::size_t y1 = std::min(y0 + 1, img.height - 1);
    double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      auto x0 = static_cast<std::size_t>(fx);
      std::size_t x1 = std::min(x0 + 1, img.width - 1);
      double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < img.channels; ++c) {
        double top = img.at(x0, y0, c) * (1 - wx) + img.at(x1, y0, c) * wx;
        double bottom = img.at(x0, y1, c) * (1 - wx) + img.at(x1, y1, c) * wx;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(std::clamp(top * (1 - wy) + bottom * wy, 0.0, 255.0)));
      }
    }
  }
  return out;
}

RawImage crop(const RawImage& img, std::size_t x0, std::size_t y0, std::size_t width, std::size_t height) {
  if (x0 + width > img.width || y0 + height > img.height)
    throw ShapeError("crop " + std::to_string(width) + "x" + std::to_string(height) + " at (" + std::to_string(x0) +
                     "," + std::to_string(y0) + ") exceeds " + std::to_string(img.width) + "x" +
                     std::to_string(img.height));
  RawImage out(width, height, img.channels);
  const std::size_t row = width * img.channels;
  for (std::size_t y = 0; y < height; ++y)
    std::copy_n(img.pixels.begin() + static_cast<std::ptrdiff_t>(((y0 + y) * img.width + x0) * img.channels), row,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(y * row));
  return out;
}

RawImage to_gray(const RawImage& img) {
  if (img.channels == 1) return img;
  RawImage out(img.width, img.height, 1);
  for (std::size_t i = 0; i < img.width * img.height; ++i) {
    const auto* p = &img.pixels[i * 3];
    out.pixels[i] = static_cast<std::uint8_t>(std::lround(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]));
  }
  return out;
}

RawImage to_rgb(const RawImage& img) {
  if (img.channels == 3) return img;
  RawImage out(img.width, img.height, 3);
  for (std::size_t i = 0; i < img.width * img.height; ++i)
    out.pixels[i * 3] = out.pixels[i * 3 + 1] = out.pixels[i * 3 + 2] = img.pixels[i];
  return out;
}

}  // namespace sapgan::data
