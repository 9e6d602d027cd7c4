#pragma once

#include "sapgan/data/image.hpp"
#include "sapgan/tensor/rng.hpp"

namespace sapgan::data {

/// Procedural stand-in painting: 2-4 smooth random ridgelines over a paper-toned
/// background, nearer ridges lower in the frame and darker. RGB, size×size.
/// Deterministic in the stream state; size must be >= 16.
RawImage synth_landscape(Rng& rng, std::size_t size);

}  // namespace sapgan::data
