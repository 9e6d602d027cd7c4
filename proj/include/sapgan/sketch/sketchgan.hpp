#pragma once

// Stage I: unconditional edge-map ("sketch") generator trained with the
// relativistic average least-squares objective against a packed discriminator.

#include <vector>

#include "sapgan/tensor/adam.hpp"
#include "sapgan/tensor/checkpoint.hpp"
#include "sapgan/tensor/nn.hpp"

namespace sapgan::sketch {

struct LatentSpec {
  std::size_t dim = 128;

  /// N×dim standard-normal draws.
  Tensor sample(std::size_t n, Rng& rng) const;
};

struct SketchConfig {
  std::size_t latent_dim = 128;
  std::size_t size = 32;        // output is 1×size×size; power of two >= 8
  std::size_t gen_width = 16;   // channels of the last hidden generator block
  std::size_t disc_width = 16;  // channels of the first discriminator block
  std::size_t pack = 2;         // PacGAN packing degree
  AdamConfig gen_opt{0.002, 0.9, 0.999, 1e-8, 0.0};
  AdamConfig disc_opt{0.002, 0.9, 0.999, 1e-8, 0.0};

  void validate() const;
};

/// Dense projection of z to a 4×4 map, then {conv_transpose ×2 -> BN -> ReLU}
/// blocks, then a final conv_transpose and tanh to 1×S×S.
template <class T>
class SketchGenerator {
 public:
  SketchGenerator(const SketchConfig& cfg, Rng& rng);

  /// z: N×latent_dim -> N×1×S×S in (-1, 1).
  BasicTensor<T> forward(const BasicTensor<T>& z, bool training);

  ParamList<T> parameters();
  nn::StateList<T> state();
  const SketchConfig& config() const { return cfg_; }

 private:
  void collect(ParamList<T>& params, nn::StateList<T>& state);

  SketchConfig cfg_;
  std::size_t base_channels_;
  nn::Linear<T> project_;
  nn::BatchNorm2d<T> project_bn_;
  std::vector<nn::ConvTranspose2d<T>> ups_;
  std::vector<nn::BatchNorm2d<T>> up_bns_;
  nn::ConvTranspose2d<T> to_image_;
};

/// Stride-2 conv stack with LeakyReLU(0.2) down to 4×4, then a 4×4 valid conv
/// to one score per packed sample. Input channels = pack × 1.
template <class T>
class SketchDiscriminator {
 public:
  SketchDiscriminator(const SketchConfig& cfg, Rng& rng);

  /// packed: M×(pack)×S×S -> scores of shape [M].
  BasicTensor<T> forward(const BasicTensor<T>& packed, bool training);

  ParamList<T> parameters();
  nn::StateList<T> state();
  std::size_t input_channels() const { return cfg_.pack; }

 private:
  void collect(ParamList<T>& params, nn::StateList<T>& state);

  SketchConfig cfg_;
  nn::Conv2d<T> first_;
  std::vector<nn::Conv2d<T>> downs_;
  std::vector<nn::BatchNorm2d<T>> down_bns_;
  nn::Conv2d<T> head_;
};

/// Concatenates consecutive groups of k samples along channels:
/// N×C×H×W -> (N/k)×(k·C)×H×W. Throws ShapeError when k does not divide N.
template <class T>
BasicTensor<T> pac_pack(const BasicTensor<T>& batch, std::size_t k);
/// Inverse of pac_pack for a known per-sample channel count.
template <class T>
BasicTensor<T> pac_unpack(const BasicTensor<T>& packed, std::size_t k);

/// mean((Dr - mean(Df) - 1)^2) + mean((Df - mean(Dr) + 1)^2)
template <class T>
BasicTensor<T> rals_d_loss(const BasicTensor<T>& d_real, const BasicTensor<T>& d_fake);
/// mean((Dr - mean(Df) + 1)^2) + mean((Df - mean(Dr) - 1)^2)
template <class T>
BasicTensor<T> rals_g_loss(const BasicTensor<T>& d_real, const BasicTensor<T>& d_fake);

struct SketchStepResult {
  double loss_d = 0;
  double loss_g = 0;
  double d_real_mean = 0;  // discriminator scores before its update
  double d_fake_mean = 0;
};

class SketchTrainer {
 public:
  SketchTrainer(const SketchConfig& cfg, std::uint64_t seed);

  /// One discriminator update, then one generator update with fresh fake
  /// scores. real_edges: N×1×S×S in [-1,1]; z: N×latent_dim; N divisible by pack.
  /// Throws NumericError (parameters untouched by the failing half) on NaN/Inf.
  SketchStepResult step(const Tensor& real_edges, const Tensor& z);

  SketchGenerator<float>& generator() { return gen_; }
  SketchDiscriminator<float>& discriminator() { return disc_; }
  const SketchConfig& config() const { return cfg_; }

  void save(Checkpoint& ckpt);
  void load(const Checkpoint& ckpt);

 private:
  SketchConfig cfg_;
  Rng rng_;
  SketchGenerator<float> gen_;
  SketchDiscriminator<float> disc_;
  Adam<float> gen_opt_;
  Adam<float> disc_opt_;
};

/// Eval-mode, gradient-free generation: N×latent_dim -> N×1×S×S.
Tensor sketch_generate(SketchGenerator<float>& gen, const Tensor& z);

/// Architecture record stored alongside weights ("sketch.gen.arch", "sketch.disc.arch").
void write_sketch_arch(Checkpoint& ckpt, const SketchConfig& cfg);
SketchConfig read_sketch_arch(const Checkpoint& ckpt);

/// Rebuilds an eval-ready generator from a checkpoint.
SketchGenerator<float> load_sketch_generator(const Checkpoint& ckpt);

}  // namespace sapgan::sketch
