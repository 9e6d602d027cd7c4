#include "sapgan/eval/nearest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "sapgan/data/image_io.hpp"
#include "sapgan/errors.hpp"

namespace sapgan::eval {

data::RawImage conform(const data::RawImage& img, std::size_t width, std::size_t height, std::size_t channels) {
  data::RawImage out = (img.width == width && img.height == height) ? img : data::resize_bilinear(img, width, height);
  if (out.channels != channels) out = channels == 1 ? data::to_gray(out) : data::to_rgb(out);
  return out;
}

double pixel_distance(const data::RawImage& a, const data::RawImage& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw ShapeError("pixel_distance: " + std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                     std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" + std::to_string(b.height) +
                     "x" + std::to_string(b.channels));
  // Integer accumulation keeps the sum exact; one sqrt and one division at the end.
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const std::int64_t d = static_cast<std::int64_t>(a.pixels[i]) - static_cast<std::int64_t>(b.pixels[i]);
    acc += static_cast<std::uint64_t>(d * d);
  }
  return std::sqrt(static_cast<double>(acc)) / 255.0;
}

namespace {

std::vector<Neighbor> top_k(std::vector<Neighbor> all, std::size_t k) {
  std::sort(all.begin(), all.end(), [](const Neighbor& x, const Neighbor& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.id < y.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace

std::vector<Neighbor> nearest_neighbors(const data::RawImage& query, std::span<const CorpusImage> corpus,
                                        std::size_t k) {
  if (corpus.empty()) throw std::invalid_argument("nearest-neighbor search over an empty corpus");
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  std::vector<Neighbor> all;
  all.reserve(corpus.size());
  for (const auto& c : corpus) {
    const auto q = conform(query, c.image.width, c.image.height, c.image.channels);
    all.push_back({c.id, pixel_distance(q, c.image)});
  }
  return top_k(std::move(all), k);
}

std::vector<Neighbor> nearest_neighbors(const data::RawImage& query, const data::DatasetManifest& manifest,
                                        std::size_t k) {
  if (manifest.records.empty()) throw std::invalid_argument("nearest-neighbor search over an empty manifest");
  if (k == 0) throw std::invalid_argument("k must be >= 1");
  std::vector<Neighbor> all;
  all.reserve(manifest.records.size());
  data::RawImage q;
  for (const auto& r : manifest.records) {
    const auto tile = data::load_image(manifest.painting_path(r));
    if (q.width != tile.width || q.height != tile.height || q.channels != tile.channels)
      q = conform(query, tile.width, tile.height, tile.channels);
    all.push_back({r.id, pixel_distance(q, tile)});
  }
  return top_k(std::move(all), k);
}

}  // namespace sapgan::eval
