#pragma once

// Stage II: conditional edge -> painting translation. U-Net generator, packed
// patch discriminator over (edge, painting) pairs, adversarial + L1 objective.

#include <vector>

#include "sapgan/tensor/adam.hpp"
#include "sapgan/tensor/checkpoint.hpp"
#include "sapgan/tensor/nn.hpp"

namespace sapgan::paint {

struct UNetConfig {
  std::size_t size = 32;          // input/output spatial size, power of two
  std::size_t depth = 0;          // encoder levels; 0 = log2(size) (1×1 bottleneck)
  std::size_t width = 16;         // channels at the outermost encoder level
  std::size_t in_channels = 1;
  std::size_t out_channels = 3;
  double dropout = 0.5;           // on the innermost three decoder levels

  std::size_t resolved_depth() const;
  void validate() const;
};

/// Channel bookkeeping for one decoder level (level 1 is outermost).
struct DecoderLevel {
  std::size_t level;
  std::size_t stream_channels;  // arriving from the level below
  std::size_t skip_channels;    // from the matching encoder level (0 at the bottleneck)
  std::size_t in_channels;      // stream + skip
  std::size_t out_channels;
  bool batch_norm;
  bool dropout;
};

template <class T>
class UNetGenerator {
 public:
  UNetGenerator(const UNetConfig& cfg, Rng& rng);

  /// edges: N×in×S×S -> N×out×S×S in (-1,1). Dropout is active only when training.
  BasicTensor<T> forward(const BasicTensor<T>& edges, bool training);

  std::vector<DecoderLevel> decoder_levels() const;
  ParamList<T> parameters();
  nn::StateList<T> state();
  const UNetConfig& config() const { return cfg_; }
  /// Stream used for dropout masks.
  Rng& dropout_rng() { return dropout_rng_; }

 private:
  void collect(ParamList<T>& params, nn::StateList<T>& state);
  std::size_t enc_channels(std::size_t level) const;  // 1-based

  UNetConfig cfg_;
  std::size_t depth_;
  std::vector<nn::Conv2d<T>> down_;              // index i -> encoder level i+1
  std::vector<std::optional<nn::BatchNorm2d<T>>> down_bn_;
  std::vector<nn::ConvTranspose2d<T>> up_;       // index i -> decoder level i+1
  std::vector<std::optional<nn::BatchNorm2d<T>>> up_bn_;
  Rng dropout_rng_;
};

struct PatchConfig {
  std::size_t size = 32;
  std::size_t pack = 1;
  std::size_t width = 16;
  std::size_t layers = 3;           // stride-2 layers; clamped to log2(size) - 2
  std::size_t pair_channels = 4;    // edge (1) + painting (3)

  std::size_t resolved_layers() const;
};

/// Conv stack over packed (edge, painting) pairs emitting a score per patch.
template <class T>
class PatchDiscriminator {
 public:
  PatchDiscriminator(const PatchConfig& cfg, Rng& rng);

  /// packed: M×(pack·pair_channels)×S×S -> M×1×P×P logits.
  BasicTensor<T> forward(const BasicTensor<T>& packed, bool training);

  std::size_t input_channels() const { return cfg_.pack * cfg_.pair_channels; }
  ParamList<T> parameters();
  nn::StateList<T> state();

 private:
  void collect(ParamList<T>& params, nn::StateList<T>& state);

  PatchConfig cfg_;
  std::vector<nn::Conv2d<T>> convs_;
  std::vector<std::optional<nn::BatchNorm2d<T>>> bns_;
};

struct PaintConfig {
  std::size_t size = 32;
  std::size_t gen_width = 16;
  std::size_t disc_width = 16;
  std::size_t disc_layers = 3;
  std::size_t depth = 0;
  std::size_t pack = 1;
  double lambda_l1 = 100.0;
  double adv_weight = 1.0;  // 0 = L1-only training of the generator
  double dropout = 0.5;
  AdamConfig gen_opt{0.0002, 0.5, 0.999, 1e-8, 0.0};
  AdamConfig disc_opt{0.0002, 0.5, 0.999, 1e-8, 0.0};

  UNetConfig unet() const;
  PatchConfig patch() const;
  void validate() const;
};

template <class T>
struct PaintLosses {
  BasicTensor<T> loss_d;  // ½[bce(d_real, 1) + bce(d_fake, 0)]
  BasicTensor<T> loss_g;  // adv_weight·bce(d_fake, 1) + lambda_l1·l1(fake, target)
  BasicTensor<T> adversarial;
  BasicTensor<T> l1;
};

template <class T>
PaintLosses<T> paint_losses(const BasicTensor<T>& d_real, const BasicTensor<T>& d_fake, const BasicTensor<T>& fake,
                            const BasicTensor<T>& target, const PaintConfig& cfg);

/// Channel-concatenates edges with paintings and packs `pack` consecutive pairs.
template <class T>
BasicTensor<T> pack_pairs(const BasicTensor<T>& edges, const BasicTensor<T>& paintings, std::size_t pack);

struct PaintStepResult {
  double loss_d = 0;
  double loss_g = 0;
  double l1 = 0;
};

class PaintTrainer {
 public:
  PaintTrainer(const PaintConfig& cfg, std::uint64_t seed);

  /// Discriminator update on (edge, real) vs (edge, detached fake), then a
  /// generator update. Batches must be aligned and divisible by pack.
  PaintStepResult step(const Tensor& edges, const Tensor& paintings);

  UNetGenerator<float>& generator() { return gen_; }
  PatchDiscriminator<float>& discriminator() { return disc_; }
  const PaintConfig& config() const { return cfg_; }

  void save(Checkpoint& ckpt);
  void load(const Checkpoint& ckpt);

 private:
  PaintConfig cfg_;
  Rng rng_;
  UNetGenerator<float> gen_;
  PatchDiscriminator<float> disc_;
  Adam<float> gen_opt_;
  Adam<float> disc_opt_;
};

/// Eval-mode, gradient-free generator pass. Rejects inputs whose size or
/// channel count differs from the generator's, naming expected and found dims.
Tensor translate(UNetGenerator<float>& gen, const Tensor& edges);

void write_paint_arch(Checkpoint& ckpt, const PaintConfig& cfg);
PaintConfig read_paint_arch(const Checkpoint& ckpt);
UNetGenerator<float> load_paint_generator(const Checkpoint& ckpt);

}  // namespace sapgan::paint
