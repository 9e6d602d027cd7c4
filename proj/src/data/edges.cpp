#include "sapgan/data/edges.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sapgan::data {

void EdgeParams::validate() const {
  if (blur_sigma < 0.0) throw std::invalid_argument("edge blur sigma must be >= 0");
  if (low < 0.0 || high > 1.0 || low > high)
    throw std::invalid_argument("edge thresholds must satisfy 0 <= low <= high <= 1");
}

namespace {

struct Plane {
  std::size_t w, h;
  std::vector<double> v;
  double at(std::ptrdiff_t x, std::ptrdiff_t y) const {
    x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(w) - 1);
    y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(h) - 1);
    return v[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
  }
};

Plane gaussian_blur(const Plane& in, double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double norm = 0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    norm += k[static_cast<std::size_t>(i + radius)];
  }
  for (auto& kv : k) kv /= norm;
  Plane tmp{in.w, in.h, std::vector<double>(in.v.size())};
  for (std::size_t y = 0; y < in.h; ++y)
    for (std::size_t x = 0; x < in.w; ++x) {
      double acc = 0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] * in.at(static_cast<std::ptrdiff_t>(x) + i, static_cast<std::ptrdiff_t>(y));
      tmp.v[y * in.w + x] = acc;
    }
  Plane out{in.w, in.h, std::vector<double>(in.v.size())};
  for (std::size_t y = 0; y < in.h; ++y)
    for (std::size_t x = 0; x < in.w; ++x) {
      double acc = 0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i)
        acc += k[static_cast<std::size_t>(i + radius)] * tmp.at(static_cast<std::ptrdiff_t>(x), static_cast<std::ptrdiff_t>(y) + i);
      out.v[y * in.w + x] = acc;
    }
  return out;
}

}  // namespace

RawImage edge_map(const RawImage& img, const EdgeParams& params) {
  params.validate();
  const RawImage gray = to_gray(img);
  const std::size_t w = gray.width, h = gray.height;
  Plane lum{w, h, std::vector<double>(gray.pixels.begin(), gray.pixels.end())};
  if (params.blur_sigma > 0.0) lum = gaussian_blur(lum, params.blur_sigma);

  std::vector<double> mag(w * h), gx(w * h), gy(w * h);
  double peak = 0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const auto xi = static_cast<std::ptrdiff_t>(x), yi = static_cast<std::ptrdiff_t>(y);
      const double dx = (lum.at(xi + 1, yi - 1) + 2 * lum.at(xi + 1, yi) + lum.at(xi + 1, yi + 1)) -
                        (lum.at(xi - 1, yi - 1) + 2 * lum.at(xi - 1, yi) + lum.at(xi - 1, yi + 1));
      const double dy = (lum.at(xi - 1, yi + 1) + 2 * lum.at(xi, yi + 1) + lum.at(xi + 1, yi + 1)) -
                        (lum.at(xi - 1, yi - 1) + 2 * lum.at(xi, yi - 1) + lum.at(xi + 1, yi - 1));
      const std::size_t i = y * w + x;
      gx[i] = dx;
      gy[i] = dy;
      mag[i] = std::hypot(dx, dy);
      peak = std::max(peak, mag[i]);
    }

  RawImage out(w, h, 1, params.invert ? 255 : 0);
  if (peak <= 0.0) return out;
  for (auto& m : mag) m /= peak;

  std::vector<double> nms = mag;
  if (params.thin) {
    auto m_at = [&](std::ptrdiff_t x, std::ptrdiff_t y) {
      if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(w) || y >= static_cast<std::ptrdiff_t>(h)) return 0.0;
      return mag[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
    };
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t i = y * w + x;
        if (mag[i] == 0.0) continue;
        // Sector of the gradient direction, folded into [0, 180).
        double angle = std::atan2(gy[i], gx[i]) * 180.0 / 3.14159265358979323846;
        if (angle < 0) angle += 180.0;
        std::ptrdiff_t ox, oy;
        if (angle < 22.5 || angle >= 157.5) { ox = 1; oy = 0; }
        else if (angle < 67.5) { ox = 1; oy = 1; }
        else if (angle < 112.5) { ox = 0; oy = 1; }
        else { ox = -1; oy = 1; }
        const auto xi = static_cast<std::ptrdiff_t>(x), yi = static_cast<std::ptrdiff_t>(y);
        const double before = m_at(xi - ox, yi - oy);
        const double after = m_at(xi + ox, yi + oy);
        // Strict on one side, inclusive on the other: plateaus keep exactly one pixel.
        if (!(mag[i] > before && mag[i] >= after)) nms[i] = 0.0;
      }
  }

  std::vector<std::uint8_t> keep(w * h, 0);
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < w * h; ++i)
    if (nms[i] >= params.high && nms[i] > 0.0) {
      keep[i] = 1;
      frontier.push_back(i);
    }
  while (!frontier.empty()) {
    const std::size_t i = frontier.back();
    frontier.pop_back();
    const auto x = static_cast<std::ptrdiff_t>(i % w), y = static_cast<std::ptrdiff_t>(i / w);
    for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
      for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
        const auto nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(w) || ny >= static_cast<std::ptrdiff_t>(h)) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
        if (!keep[j] && nms[j] >= params.low && nms[j] > 0.0) {
          keep[j] = 1;
          frontier.push_back(j);
        }
      }
  }

  for (std::size_t i = 0; i < w * h; ++i) {
    if (!keep[i]) continue;
    const auto v = static_cast<std::uint8_t>(std::lround(std::clamp(nms[i], 0.0, 1.0) * 255.0));
    out.pixels[i] = params.invert ? static_cast<std::uint8_t>(255 - v) : v;
  }
  return out;
}

}  // namespace sapgan::data
