#pragma once

// Memorization probe: pixel-space L2 search of a query against the training tiles.

#include <span>
#include <string>
#include <vector>

#include "sapgan/data/manifest.hpp"

namespace sapgan::eval {

struct Neighbor {
  std::string id;
  double distance = 0;  // Euclidean norm over all pixels and channels on the [0,1] scale
};

struct CorpusImage {
  std::string id;
  data::RawImage image;
};

/// Resizes and channel-converts `img` to the given geometry (no-op when it already matches).
data::RawImage conform(const data::RawImage& img, std::size_t width, std::size_t height, std::size_t channels);

/// Distance between two images of identical geometry.
double pixel_distance(const data::RawImage& a, const data::RawImage& b);

/// Top-k by ascending distance, ties broken by id. The query is conformed to
/// each corpus image. Throws std::invalid_argument on an empty corpus or k == 0.
std::vector<Neighbor> nearest_neighbors(const data::RawImage& query, std::span<const CorpusImage> corpus,
                                        std::size_t k);

/// Same search over the painting tiles referenced by a manifest.
std::vector<Neighbor> nearest_neighbors(const data::RawImage& query, const data::DatasetManifest& manifest,
                                        std::size_t k);

}  // namespace sapgan::eval
