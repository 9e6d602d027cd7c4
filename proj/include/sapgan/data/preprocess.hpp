#pragma once

#include <vector>

#include "sapgan/data/image.hpp"

namespace sapgan::data {

inline constexpr double kDefaultRatioThreshold = 1.5;

struct TilePlan {
  bool rotated = false;          // input was landscape and got turned upright
  std::size_t resized_height = 0;
  bool center_crop = false;      // height/width at or below the threshold
  std::size_t tile_count = 0;
};

/// Tiling arithmetic for an image of the given size, without touching pixels.
/// Throws ShapeError when the shorter side is below `tile` (no upscaling) or
/// the resized height falls below `tile`.
TilePlan plan_tiles(std::size_t width, std::size_t height, std::size_t tile, double ratio_threshold);

/// Orient upright, resize to width `tile`, then either center-crop one tile
/// (height/width <= ratio_threshold) or cut floor(height/tile) stacked tiles
/// from the top. Tiles of rotated inputs are turned back to the original
/// orientation. Every tile is tile×tile.
std::vector<RawImage> preprocess_painting(const RawImage& img, std::size_t tile, double ratio_threshold);

}  // namespace sapgan::data
