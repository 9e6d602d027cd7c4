#include "sapgan/data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sapgan::data {

RawImage synth_landscape(Rng& rng, std::size_t size) {
  if (size < 16) throw std::invalid_argument("synth_landscape: size must be >= 16");
  const double s = static_cast<double>(size);
  std::array<double, 3> paper{232 + rng.uniform(-8, 8), 222 + rng.uniform(-8, 8), 196 + rng.uniform(-10, 10)};
  const std::array<double, 3> ink{38 + rng.uniform(-6, 6), 44 + rng.uniform(-6, 6), 48 + rng.uniform(-6, 6)};

  std::vector<std::array<double, 3>> canvas(size * size);
  for (std::size_t y = 0; y < size; ++y) {
    // Faint vertical wash so the sky is not perfectly flat.
    const double wash = 1.0 - 0.04 * static_cast<double>(y) / s;
    for (std::size_t x = 0; x < size; ++x)
      for (std::size_t c = 0; c < 3; ++c) canvas[y * size + x][c] = paper[c] * wash;
  }

  const std::size_t ridges = 2 + rng.below(3);
  for (std::size_t r = 0; r < ridges; ++r) {
    const double depth = static_cast<double>(r + 1) / static_cast<double>(ridges);  // far -> near
    const double baseline = s * (0.25 + 0.5 * depth) + rng.uniform(-0.05, 0.05) * s;
    const double amplitude = s * rng.uniform(0.06, 0.18);
    struct Wave { double freq, phase, weight; };
    std::array<Wave, 3> waves{};
    double wsum = 0;
    for (auto& wv : waves) {
      wv = {rng.uniform(0.5, 3.5), rng.uniform(0, 2 * std::numbers::pi), rng.uniform(0.2, 1.0)};
      wsum += wv.weight;
    }
    const double tone = 0.2 + 0.65 * depth;
    const double mist = rng.uniform(0.15, 0.45);
    for (std::size_t x = 0; x < size; ++x) {
      const double u = static_cast<double>(x) / s;
      double crest = 0;
      for (const auto& wv : waves) crest += wv.weight * std::sin(2 * std::numbers::pi * wv.freq * u + wv.phase);
      const double ridge_y = baseline - amplitude * crest / wsum;
      for (std::size_t y = 0; y < size; ++y) {
        const double coverage = std::clamp(static_cast<double>(y) + 0.5 - ridge_y, 0.0, 1.0);
        if (coverage <= 0) continue;
        // Ink thins out below the crest, like mist at the foot of a mountain.
        const double below = std::max(0.0, static_cast<double>(y) - ridge_y) / s;
        const double t = tone * std::max(0.15, 1.0 - mist * below * 4.0);
        auto& px = canvas[y * size + x];
        for (std::size_t c = 0; c < 3; ++c) {
          const double target = paper[c] * (1 - t) + ink[c] * t;
          px[c] = px[c] * (1 - coverage) + target * coverage;
        }
      }
    }
  }

  RawImage img(size, size, 3);
  for (std::size_t i = 0; i < size * size; ++i)
    for (std::size_t c = 0; c < 3; ++c)
      img.pixels[i * 3 + c] = static_cast<std::uint8_t>(std::lround(std::clamp(canvas[i][c], 0.0, 255.0)));
  return img;
}

}  // namespace sapgan::data
