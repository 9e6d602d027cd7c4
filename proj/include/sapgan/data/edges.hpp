#pragma once

#include "sapgan/data/image.hpp"

namespace sapgan::data {

/// Classical stand-in for a learned edge detector.
struct EdgeParams {
  double blur_sigma = 1.0;  // 0 disables the Gaussian pre-blur
  double low = 0.1;         // hysteresis thresholds on the [0,1]-normalized magnitude
  double high = 0.2;
  bool invert = false;      // false: white edges on black
  bool thin = true;         // non-maximum suppression across the gradient

  void validate() const;
};

/// grayscale -> Gaussian blur -> Sobel magnitude normalized to [0,1] ->
/// (thin) non-maximum suppression -> hysteresis. Kept pixels carry their
/// normalized magnitude scaled to 0..255. Output is 1-channel, same size.
RawImage edge_map(const RawImage& img, const EdgeParams& params = {});

}  // namespace sapgan::data
