#pragma once

#include <span>
#include <vector>

#include "sapgan/data/image.hpp"
#include "sapgan/tensor/tensor.hpp"

namespace sapgan::data {

/// 8-bit pixels -> 1×C×H×W tensor with v/127.5 - 1, so 0 -> -1 and 255 -> +1.
Tensor normalize(const RawImage& img);
/// Stacks same-sized images into N×C×H×W.
Tensor normalize_batch(std::span<const RawImage> images);
/// Sample `index` of an N×C×H×W tensor back to 8-bit, clamping to [-1, 1].
RawImage denormalize(const Tensor& t, std::size_t index = 0);

}  // namespace sapgan::data
