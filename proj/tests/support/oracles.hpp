#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's kernels; every value is produced by direct loops in double.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace oracle {

struct ConvDims {
  std::size_t n, cin, h, w, cout, k, stride, pad;
  std::size_t out_h() const { return (h + 2 * pad - k) / stride + 1; }
  std::size_t out_w() const { return (w + 2 * pad - k) / stride + 1; }
};

// Direct cross-correlation. x: n×cin×h×w, wt: cout×cin×k×k.
inline std::vector<double> conv2d(const ConvDims& d, std::span<const double> x, std::span<const double> wt) {
  const std::size_t oh = d.out_h(), ow = d.out_w();
  std::vector<double> y(d.n * d.cout * oh * ow, 0.0);
  for (std::size_t b = 0; b < d.n; ++b)
    for (std::size_t co = 0; co < d.cout; ++co)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double s = 0;
          for (std::size_t ci = 0; ci < d.cin; ++ci)
            for (std::size_t ky = 0; ky < d.k; ++ky)
              for (std::size_t kx = 0; kx < d.k; ++kx) {
                const long iy = static_cast<long>(oy * d.stride + ky) - static_cast<long>(d.pad);
                const long ix = static_cast<long>(ox * d.stride + kx) - static_cast<long>(d.pad);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(d.h) || ix >= static_cast<long>(d.w)) continue;
                s += x[((b * d.cin + ci) * d.h + iy) * d.w + ix] * wt[((co * d.cin + ci) * d.k + ky) * d.k + kx];
              }
          y[((b * d.cout + co) * oh + oy) * ow + ox] = s;
        }
  return y;
}

// Transposed convolution written as a scatter: every input pixel stamps the
// kernel into the (cropped) output. x: n×cin×h×w, wt: cin×cout×k×k.
inline std::vector<double> conv_transpose2d(const ConvDims& d, std::span<const double> x,
                                            std::span<const double> wt) {
  const std::size_t oh = (d.h - 1) * d.stride + d.k - 2 * d.pad;
  const std::size_t ow = (d.w - 1) * d.stride + d.k - 2 * d.pad;
  std::vector<double> y(d.n * d.cout * oh * ow, 0.0);
  for (std::size_t b = 0; b < d.n; ++b)
    for (std::size_t ci = 0; ci < d.cin; ++ci)
      for (std::size_t iy = 0; iy < d.h; ++iy)
        for (std::size_t ix = 0; ix < d.w; ++ix) {
          const double v = x[((b * d.cin + ci) * d.h + iy) * d.w + ix];
          for (std::size_t co = 0; co < d.cout; ++co)
            for (std::size_t ky = 0; ky < d.k; ++ky)
              for (std::size_t kx = 0; kx < d.k; ++kx) {
                const long oy = static_cast<long>(iy * d.stride + ky) - static_cast<long>(d.pad);
                const long ox = static_cast<long>(ix * d.stride + kx) - static_cast<long>(d.pad);
                if (oy < 0 || ox < 0 || oy >= static_cast<long>(oh) || ox >= static_cast<long>(ow)) continue;
                y[((b * d.cout + co) * oh + oy) * ow + ox] += v * wt[((ci * d.cout + co) * d.k + ky) * d.k + kx];
              }
        }
  return y;
}

inline double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// RaLS discriminator / generator losses spelled out term by term.
inline double rals(std::span<const double> r, std::span<const double> f, double target) {
  const double mr = mean(r), mf = mean(f);
  double a = 0, b = 0;
  for (double x : r) a += (x - mf - target) * (x - mf - target);
  for (double x : f) b += (x - mr + target) * (x - mr + target);
  return a / r.size() + b / f.size();
}

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Mean binary cross-entropy on logits: softplus(z) - y*z.
inline double bce_logits(std::span<const double> z, double y) {
  double s = 0;
  for (double v : z) s += softplus(v) - y * v;
  return s / z.size();
}

}  // namespace oracle
