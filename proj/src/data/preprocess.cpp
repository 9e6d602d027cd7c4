#include "sapgan/data/preprocess.hpp"

#include <cmath>
#include <string>

#include "sapgan/errors.hpp"

namespace sapgan::data {

TilePlan plan_tiles(std::size_t width, std::size_t height, std::size_t tile, double ratio_threshold) {
  if (tile < 8) throw ShapeError("tile size must be >= 8, got " + std::to_string(tile));
  TilePlan plan;
  plan.rotated = width > height;
  const std::size_t w = plan.rotated ? height : width;
  const std::size_t h = plan.rotated ? width : height;
  if (w < tile)
    throw ShapeError("image " + std::to_string(width) + "x" + std::to_string(height) + " is smaller than tile " +
                     std::to_string(tile) + " on its short side");
  plan.resized_height = static_cast<std::size_t>(std::llround(static_cast<double>(h) * static_cast<double>(tile) /
                                                              static_cast<double>(w)));
  if (plan.resized_height < tile)
    throw ShapeError("image " + std::to_string(width) + "x" + std::to_string(height) + " resizes to " +
                     std::to_string(tile) + "x" + std::to_string(plan.resized_height) + ", shorter than tile " +
                     std::to_string(tile));
  const double ratio = static_cast<double>(plan.resized_height) / static_cast<double>(tile);
  plan.center_crop = ratio <= ratio_threshold;
  plan.tile_count = plan.center_crop ? 1 : plan.resized_height / tile;
  return plan;
}

std::vector<RawImage> preprocess_painting(const RawImage& img, std::size_t tile, double ratio_threshold) {
  if (!img.valid()) throw ShapeError("preprocess_painting: invalid image buffer");
  const TilePlan plan = plan_tiles(img.width, img.height, tile, ratio_threshold);
  const RawImage upright = plan.rotated ? rotate_cw(img) : img;
  const RawImage resized = resize_bilinear(upright, tile, plan.resized_height);

  std::vector<RawImage> tiles;
  tiles.reserve(plan.tile_count);
  if (plan.center_crop) {
    tiles.push_back(crop(resized, 0, (plan.resized_height - tile) / 2, tile, tile));
  } else {
    for (std::size_t i = 0; i < plan.tile_count; ++i) tiles.push_back(crop(resized, 0, i * tile, tile, tile));
  }
  if (plan.rotated)
    for (auto& t : tiles) t = rotate_ccw(t);
  return tiles;
}

}  // namespace sapgan::data
