#pragma once

#include <filesystem>
#include <vector>

#include "sapgan/paint/paintgan.hpp"
#include "sapgan/sketch/sketchgan.hpp"

namespace sapgan::eval {

struct PipelineOutput {
  Tensor sketches;   // N×1×S×S
  Tensor paintings;  // N×3×S×S
};

/// Sketch generator chained into the edge-to-painting U-Net.
class Pipeline {
 public:
  /// Throws ShapeError when the sketch output size differs from the U-Net input size.
  Pipeline(sketch::SketchGenerator<float> sketch, paint::UNetGenerator<float> paint);

  /// Throws IoError naming the path when either checkpoint is missing or malformed.
  static Pipeline load(const std::filesystem::path& sketch_ckpt, const std::filesystem::path& paint_ckpt);

  PipelineOutput run(const Tensor& z);
  Tensor end_to_end(const Tensor& z) { return run(z).paintings; }

  std::size_t latent_dim() const { return sketch_.config().latent_dim; }
  std::size_t size() const { return sketch_.config().size; }
  sketch::SketchGenerator<float>& sketch_generator() { return sketch_; }
  paint::UNetGenerator<float>& paint_generator() { return paint_; }

 private:
  sketch::SketchGenerator<float> sketch_;
  paint::UNetGenerator<float> paint_;
};

struct Frame {
  double t = 0;
  Tensor z;  // 1×dim
  Tensor sketch;
  Tensor painting;
};

/// t_i = i/(n-1) for i in [0, n).
std::vector<double> interpolation_times(std::size_t n);

/// (1-t)·z0 + t·z1 elementwise; exact at both endpoints.
Tensor lerp_latent(const Tensor& z0, const Tensor& z1, double t);

/// Latent walk of n frames. z0 and z1 are 1×dim (or dim) vectors.
std::vector<Frame> interpolate(Pipeline& pipeline, const Tensor& z0, const Tensor& z1, std::size_t n);

/// Root-mean-square pixel difference of two equally shaped tensors.
double mean_pixel_l2(const Tensor& a, const Tensor& b);

}  // namespace sapgan::eval
