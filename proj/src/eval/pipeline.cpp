#include "sapgan/eval/pipeline.hpp"

#include <cmath>

#include "sapgan/errors.hpp"

namespace sapgan::eval {

Pipeline::Pipeline(sketch::SketchGenerator<float> sketch, paint::UNetGenerator<float> paint)
    : sketch_(std::move(sketch)), paint_(std::move(paint)) {
  const auto& s = sketch_.config();
  const auto& p = paint_.config();
  if (s.size != p.size || p.in_channels != 1)
    throw ShapeError("incompatible stages: sketch generator emits 1×" + std::to_string(s.size) + "×" +
                     std::to_string(s.size) + " but painter expects " + std::to_string(p.in_channels) + "×" +
                     std::to_string(p.size) + "×" + std::to_string(p.size));
}

Pipeline Pipeline::load(const std::filesystem::path& sketch_ckpt, const std::filesystem::path& paint_ckpt) {
  auto sketch = sketch::load_sketch_generator(Checkpoint::load(sketch_ckpt));
  auto paint = paint::load_paint_generator(Checkpoint::load(paint_ckpt));
  return Pipeline(std::move(sketch), std::move(paint));
}

PipelineOutput Pipeline::run(const Tensor& z) {
  PipelineOutput out;
  out.sketches = sketch::sketch_generate(sketch_, z);
  out.paintings = paint::translate(paint_, out.sketches);
  return out;
}

std::vector<double> interpolation_times(std::size_t n) {
  if (n < 2) throw std::invalid_argument("interpolation needs n >= 2 frames, got " + std::to_string(n));
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return ts;
}

Tensor lerp_latent(const Tensor& z0, const Tensor& z1, double t) {
  if (z0.numel() != z1.numel())
    throw ShapeError("latent endpoints differ: " + to_string(z0.shape()) + " vs " + to_string(z1.shape()));
  const auto a = z0.data();
  const auto b = z1.data();
  std::vector<float> out(a.size());
  const double s = 1.0 - t;
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = static_cast<float>(s * static_cast<double>(a[i]) + t * static_cast<double>(b[i]));
  return Tensor({1, a.size()}, std::move(out), false);
}

std::vector<Frame> interpolate(Pipeline& pipeline, const Tensor& z0, const Tensor& z1, std::size_t n) {
  const std::size_t dim = pipeline.latent_dim();
  for (const Tensor* z : {&z0, &z1})
    if (z->numel() != dim || (z->rank() == 2 && z->dim(0) != 1) || z->rank() > 2)
      throw ShapeError("interpolation endpoint must be a single " + std::to_string(dim) + "-dim latent, got " +
                       to_string(z->shape()));
  std::vector<Frame> frames;
  for (double t : interpolation_times(n)) {
    Frame f;
    f.t = t;
    f.z = lerp_latent(z0, z1, t);
    auto out = pipeline.run(f.z);
    f.sketch = out.sketches;
    f.painting = out.paintings;
    frames.push_back(std::move(f));
  }
  return frames;
}

double mean_pixel_l2(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("mean_pixel_l2: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  if (a.numel() == 0) return 0.0;
  double acc = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i]);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.numel()));
}

}  // namespace sapgan::eval
