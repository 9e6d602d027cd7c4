#include "sapgan/data/normalize.hpp"

#include <algorithm>
#include <cmath>

#include "sapgan/errors.hpp"

namespace sapgan::data {

Tensor normalize(const RawImage& img) { return normalize_batch(std::span<const RawImage>(&img, 1)); }

Tensor normalize_batch(std::span<const RawImage> images) {
  if (images.empty()) throw ShapeError("normalize_batch: no images");
  const auto& first = images.front();
  const std::size_t c = first.channels, h = first.height, w = first.width;
  std::vector<float> v(images.size() * c * h * w);
  for (std::size_t n = 0; n < images.size(); ++n) {
    const auto& img = images[n];
    if (img.channels != c || img.height != h || img.width != w)
      throw ShapeError("normalize_batch: image " + std::to_string(n) + " differs in size or channels");
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
          v[((n * c + ch) * h + y) * w + x] = static_cast<float>(img.at(x, y, ch)) / 127.5f - 1.0f;
  }
  return Tensor({images.size(), c, h, w}, std::move(v));
}

RawImage denormalize(const Tensor& t, std::size_t index) {
  if (t.rank() != 4 || index >= t.dim(0) || (t.dim(1) != 1 && t.dim(1) != 3))
    throw ShapeError("denormalize: expected N×{1,3}×H×W with index < N, got " + to_string(t.shape()));
  const std::size_t c = t.dim(1), h = t.dim(2), w = t.dim(3);
  RawImage img(w, h, c);
  auto d = t.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        float v = d[((index * c + ch) * h + y) * w + x];
        if (std::isnan(v)) v = -1.0f;
        v = std::clamp(v, -1.0f, 1.0f);
        img.at(x, y, ch) = static_cast<std::uint8_t>(std::lround((v + 1.0f) * 127.5f));
      }
  return img;
}

}  // namespace sapgan::data
