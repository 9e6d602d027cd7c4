#include "sapgan/paint/paintgan.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "sapgan/errors.hpp"
#include "sapgan/sketch/sketchgan.hpp"

namespace sapgan::paint {

namespace {

bool is_pow2(std::size_t v) { return v && (v & (v - 1)) == 0; }

std::size_t log2_exact(std::size_t v) { return static_cast<std::size_t>(std::countr_zero(v)); }

template <class T>
void require_finite(const ParamList<T>& params, const char* what) {
  for (const auto& p : params)
    if (!all_finite(p.tensor.data())) throw NumericError(std::string(what) + ": parameter '" + p.name + "' is not finite");
}

std::string dims(std::size_t c, std::size_t s) {
  return std::to_string(c) + "×" + std::to_string(s) + "×" + std::to_string(s);
}

}  // namespace

std::size_t UNetConfig::resolved_depth() const { return depth == 0 ? log2_exact(size) : depth; }

void UNetConfig::validate() const {
  if (!is_pow2(size) || size < 4) throw std::invalid_argument("U-Net size must be a power of two >= 4");
  const std::size_t d = resolved_depth();
  if (d < 2 || d > log2_exact(size))
    throw std::invalid_argument("U-Net depth " + std::to_string(d) + " outside [2, " +
                                std::to_string(log2_exact(size)) + "] for size " + std::to_string(size));
  if (width < 1 || in_channels < 1 || out_channels < 1) throw std::invalid_argument("U-Net channel counts must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
}

// ---- U-Net -----------------------------------------------------------------

template <class T>
std::size_t UNetGenerator<T>::enc_channels(std::size_t level) const {
  return cfg_.width << std::min<std::size_t>(level - 1, 3);
}

template <class T>
std::vector<DecoderLevel> UNetGenerator<T>::decoder_levels() const {
  std::vector<DecoderLevel> levels;
  for (std::size_t j = 1; j <= depth_; ++j) {
    DecoderLevel L{};
    L.level = j;
    L.stream_channels = j == depth_ ? enc_channels(depth_) : enc_channels(j);
    L.skip_channels = j == depth_ ? 0 : enc_channels(j);
    L.in_channels = L.stream_channels + L.skip_channels;
    L.out_channels = j == 1 ? cfg_.out_channels : enc_channels(j - 1);
    L.batch_norm = j > 1;
    L.dropout = j > 1 && j + 2 >= depth_ && cfg_.dropout > 0.0;
    levels.push_back(L);
  }
  return levels;
}

template <class T>
UNetGenerator<T>::UNetGenerator(const UNetConfig& cfg, Rng& rng)
    : cfg_(cfg), depth_(cfg.resolved_depth()), dropout_rng_(rng.split("dropout")) {
  cfg_.validate();
  const ops::ConvGeometry half{2, 1};
  for (std::size_t i = 1; i <= depth_; ++i) {
    const std::size_t in = i == 1 ? cfg_.in_channels : enc_channels(i - 1);
    // Outermost and innermost encoder convs are not normalized: the first sees
    // raw edges, the last collapses to a 1×1 map where batch statistics degenerate.
    const bool bn = i != 1 && i != depth_;
    down_.emplace_back(in, enc_channels(i), 4, half, !bn, rng);
    down_bn_.push_back(bn ? std::optional<nn::BatchNorm2d<T>>(enc_channels(i)) : std::nullopt);
  }
  for (const auto& L : decoder_levels()) {
    up_.emplace_back(L.in_channels, L.out_channels, 4, half, !L.batch_norm, rng);
    up_bn_.push_back(L.batch_norm ? std::optional<nn::BatchNorm2d<T>>(L.out_channels) : std::nullopt);
  }
}

template <class T>
BasicTensor<T> UNetGenerator<T>::forward(const BasicTensor<T>& edges, bool training) {
  if (edges.rank() != 4 || edges.dim(1) != cfg_.in_channels || edges.dim(2) != cfg_.size ||
      edges.dim(3) != cfg_.size)
    throw ShapeError("U-Net expects N×" + dims(cfg_.in_channels, cfg_.size) + " input, got " +
                     to_string(edges.shape()));

  std::vector<BasicTensor<T>> skips;
  skips.reserve(depth_);
  auto h = edges;
  for (std::size_t i = 0; i < depth_; ++i) {
    if (i > 0) h = ops::leaky_relu(h, T(0.2));
    h = down_[i](h);
    if (down_bn_[i]) h = (*down_bn_[i])(h, training);
    skips.push_back(h);
  }

  const auto levels = decoder_levels();
  for (std::size_t j = depth_; j >= 1; --j) {
    const auto& L = levels[j - 1];
    auto in = j == depth_ ? skips[j - 1] : ops::concat_channels(h, skips[j - 1]);
    h = up_[j - 1](ops::relu(in));
    if (up_bn_[j - 1]) h = (*up_bn_[j - 1])(h, training);
    if (L.dropout) h = ops::dropout(h, cfg_.dropout, training, dropout_rng_);
  }
  return ops::tanh(h);
}

template <class T>
void UNetGenerator<T>::collect(ParamList<T>& params, nn::StateList<T>& state) {
  for (std::size_t i = 0; i < depth_; ++i) {
    const std::string p = "paint.gen.down" + std::to_string(i + 1);
    down_[i].collect(p, params, state);
    if (down_bn_[i]) down_bn_[i]->collect(p + "_bn", params, state);
  }
  for (std::size_t j = 0; j < depth_; ++j) {
    const std::string p = "paint.gen.up" + std::to_string(j + 1);
    up_[j].collect(p, params, state);
    if (up_bn_[j]) up_bn_[j]->collect(p + "_bn", params, state);
  }
}

template <class T>
ParamList<T> UNetGenerator<T>::parameters() {
  ParamList<T> params;
  nn::StateList<T> state;
  collect(params, state);
  return params;
}

template <class T>
nn::StateList<T> UNetGenerator<T>::state() {
  ParamList<T> params;
  nn::StateList<T> state;
  collect(params, state);
  return state;
}

// ---- patch discriminator ---------------------------------------------------

std::size_t PatchConfig::resolved_layers() const {
  return std::max<std::size_t>(1, std::min(layers, log2_exact(size) - 2));
}

template <class T>
PatchDiscriminator<T>::PatchDiscriminator(const PatchConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (!is_pow2(cfg_.size) || cfg_.size < 8) throw std::invalid_argument("patch discriminator size must be a power of two >= 8");
  if (cfg_.pack < 1 || cfg_.width < 1 || cfg_.layers < 1) throw std::invalid_argument("patch discriminator: pack, width, layers must be >= 1");
  const std::size_t n = cfg_.resolved_layers();
  std::size_t ch = cfg_.width;
  convs_.emplace_back(input_channels(), ch, 4, ops::ConvGeometry{2, 1}, true, rng);
  bns_.push_back(std::nullopt);
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t next = std::min(ch * 2, cfg_.width * 8);
    convs_.emplace_back(ch, next, 4, ops::ConvGeometry{2, 1}, false, rng);
    bns_.emplace_back(next);
    ch = next;
  }
  const std::size_t next = std::min(ch * 2, cfg_.width * 8);
  convs_.emplace_back(ch, next, 4, ops::ConvGeometry{1, 1}, false, rng);
  bns_.emplace_back(next);
  convs_.emplace_back(next, 1, 4, ops::ConvGeometry{1, 1}, true, rng);
  bns_.push_back(std::nullopt);
}

template <class T>
BasicTensor<T> PatchDiscriminator<T>::forward(const BasicTensor<T>& packed, bool training) {
  if (packed.rank() != 4 || packed.dim(1) != input_channels() || packed.dim(2) != cfg_.size ||
      packed.dim(3) != cfg_.size)
    throw ShapeError("patch discriminator expects M×" + dims(input_channels(), cfg_.size) + ", got " +
                     to_string(packed.shape()));
  auto h = packed;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = convs_[i](h);
    if (bns_[i]) h = (*bns_[i])(h, training);
    if (i + 1 < convs_.size()) h = ops::leaky_relu(h, T(0.2));
  }
  return h;
}

template <class T>
void PatchDiscriminator<T>::collect(ParamList<T>& params, nn::StateList<T>& state) {
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const std::string p = "paint.disc.conv" + std::to_string(i);
    convs_[i].collect(p, params, state);
    if (bns_[i]) bns_[i]->collect(p + "_bn", params, state);
  }
}

template <class T>
ParamList<T> PatchDiscriminator<T>::parameters() {
  ParamList<T> params;
  nn::StateList<T> state;
  collect(params, state);
  return params;
}

template <class T>
nn::StateList<T> PatchDiscriminator<T>::state() {
  ParamList<T> params;
  nn::StateList<T> state;
  collect(params, state);
  return state;
}

// ---- config / losses -------------------------------------------------------

UNetConfig PaintConfig::unet() const {
  UNetConfig u;
  u.size = size;
  u.depth = depth;
  u.width = gen_width;
  u.dropout = dropout;
  return u;
}

PatchConfig PaintConfig::patch() const {
  PatchConfig p;
  p.size = size;
  p.pack = pack;
  p.width = disc_width;
  p.layers = disc_layers;
  return p;
}

void PaintConfig::validate() const {
  unet().validate();
  if (size < 8) throw std::invalid_argument("paint size must be >= 8");
  if (pack < 1) throw std::invalid_argument("pack must be >= 1");
  if (disc_width < 1 || disc_layers < 1) throw std::invalid_argument("discriminator width and layers must be >= 1");
  if (!(lambda_l1 >= 0.0) || !(adv_weight >= 0.0)) throw std::invalid_argument("loss weights must be >= 0");
}

template <class T>
PaintLosses<T> paint_losses(const BasicTensor<T>& d_real, const BasicTensor<T>& d_fake, const BasicTensor<T>& fake,
                            const BasicTensor<T>& target, const PaintConfig& cfg) {
  if (fake.shape() != target.shape())
    throw ShapeError("L1 term: generated " + to_string(fake.shape()) + " vs target " + to_string(target.shape()));
  PaintLosses<T> out;
  out.loss_d = ops::scale(ops::add(ops::bce_with_logits(d_real, T{1}), ops::bce_with_logits(d_fake, T{0})), T(0.5));
  out.adversarial = ops::bce_with_logits(d_fake, T{1});
  out.l1 = ops::l1_loss(fake, target);
  out.loss_g = ops::add(ops::scale(out.adversarial, static_cast<T>(cfg.adv_weight)),
                        ops::scale(out.l1, static_cast<T>(cfg.lambda_l1)));
  return out;
}

template <class T>
BasicTensor<T> pack_pairs(const BasicTensor<T>& edges, const BasicTensor<T>& paintings, std::size_t pack) {
  if (edges.rank() != 4 || paintings.rank() != 4 || edges.dim(0) != paintings.dim(0))
    throw ShapeError("pair batch mismatch: edges " + to_string(edges.shape()) + ", paintings " +
                     to_string(paintings.shape()));
  return sketch::pac_pack(ops::concat_channels(edges, paintings), pack);
}

// ---- trainer ---------------------------------------------------------------

PaintTrainer::PaintTrainer(const PaintConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      rng_(seed),
      gen_([&] {
        cfg.validate();
        Rng r = rng_.split("paint.gen.init");
        return UNetGenerator<float>(cfg.unet(), r);
      }()),
      disc_([&] {
        Rng r = rng_.split("paint.disc.init");
        return PatchDiscriminator<float>(cfg.patch(), r);
      }()),
      gen_opt_(gen_.parameters(), cfg.gen_opt),
      disc_opt_(disc_.parameters(), cfg.disc_opt) {}

PaintStepResult PaintTrainer::step(const Tensor& edges, const Tensor& paintings) {
  if (edges.rank() != 4 || edges.dim(1) != 1 || edges.dim(2) != cfg_.size || edges.dim(3) != cfg_.size)
    throw ShapeError("paint step expects N×" + dims(1, cfg_.size) + " edges, got " + to_string(edges.shape()));
  if (paintings.rank() != 4 || paintings.dim(0) != edges.dim(0) || paintings.dim(1) != 3 ||
      paintings.dim(2) != cfg_.size || paintings.dim(3) != cfg_.size)
    throw ShapeError("paint step expects " + std::to_string(edges.dim(0)) + "×" + dims(3, cfg_.size) +
                     " paintings, got " + to_string(paintings.shape()));
  if (edges.dim(0) % cfg_.pack != 0)
    throw ShapeError("batch " + std::to_string(edges.dim(0)) + " not divisible by pack " + std::to_string(cfg_.pack));

  PaintStepResult result;
  const bool adversarial = cfg_.adv_weight > 0.0;

  if (adversarial) {
    Tensor fake_detached;
    {
      NoGradGuard no_grad;
      fake_detached = gen_.forward(edges, true);
    }
    disc_opt_.zero_grad();
    auto d_real = disc_.forward(pack_pairs(edges, paintings, cfg_.pack), true);
    auto d_fake = disc_.forward(pack_pairs(edges, fake_detached, cfg_.pack), true);
    auto loss_d = paint_losses(d_real, d_fake, fake_detached, paintings, cfg_).loss_d;
    result.loss_d = loss_d.item();
    if (!std::isfinite(result.loss_d))
      throw NumericError("paint discriminator loss is not finite (" + std::to_string(result.loss_d) + ")");
    backward(loss_d);
    disc_opt_.step();
  }

  gen_opt_.zero_grad();
  auto fake = gen_.forward(edges, true);
  Tensor loss_g;
  if (adversarial) {
    Tensor d_real;
    {
      NoGradGuard no_grad;
      d_real = disc_.forward(pack_pairs(edges, paintings, cfg_.pack), true);
    }
    auto d_fake = disc_.forward(pack_pairs(edges, fake, cfg_.pack), true);
    auto losses = paint_losses(d_real, d_fake, fake, paintings, cfg_);
    loss_g = losses.loss_g;
    result.l1 = losses.l1.item();
  } else {
    auto l1 = ops::l1_loss(fake, paintings);
    result.l1 = l1.item();
    loss_g = ops::scale(l1, static_cast<float>(cfg_.lambda_l1));
  }
  result.loss_g = loss_g.item();
  if (!std::isfinite(result.loss_g))
    throw NumericError("paint generator loss is not finite (" + std::to_string(result.loss_g) + ")");
  backward(loss_g);
  gen_opt_.step();

  require_finite(gen_opt_.params(), "paint generator");
  require_finite(disc_opt_.params(), "paint discriminator");
  return result;
}

Tensor translate(UNetGenerator<float>& gen, const Tensor& edges) {
  const auto& c = gen.config();
  if (edges.rank() != 4 || edges.dim(1) != c.in_channels || edges.dim(2) != c.size || edges.dim(3) != c.size)
    throw ShapeError("translate: generator expects N×" + dims(c.in_channels, c.size) + " edge maps, found " +
                     to_string(edges.shape()));
  NoGradGuard no_grad;
  return gen.forward(edges, false);
}

void write_paint_arch(Checkpoint& ckpt, const PaintConfig& cfg) {
  ckpt.put("paint.gen.arch", {4},
           {static_cast<float>(cfg.size), static_cast<float>(cfg.gen_width),
            static_cast<float>(cfg.unet().resolved_depth()), static_cast<float>(cfg.dropout)});
  ckpt.put("paint.disc.arch", {3},
           {static_cast<float>(cfg.pack), static_cast<float>(cfg.disc_width), static_cast<float>(cfg.disc_layers)});
}

PaintConfig read_paint_arch(const Checkpoint& ckpt) {
  PaintConfig cfg;
  const auto& g = ckpt.get("paint.gen.arch").values;
  if (g.size() != 4) throw IoError("paint.gen.arch must hold 4 values");
  cfg.size = static_cast<std::size_t>(g[0]);
  cfg.gen_width = static_cast<std::size_t>(g[1]);
  cfg.depth = static_cast<std::size_t>(g[2]);
  cfg.dropout = g[3];
  if (ckpt.contains("paint.disc.arch")) {
    const auto& d = ckpt.get("paint.disc.arch").values;
    if (d.size() != 3) throw IoError("paint.disc.arch must hold 3 values");
    cfg.pack = static_cast<std::size_t>(d[0]);
    cfg.disc_width = static_cast<std::size_t>(d[1]);
    cfg.disc_layers = static_cast<std::size_t>(d[2]);
  }
  cfg.validate();
  return cfg;
}

void PaintTrainer::save(Checkpoint& ckpt) {
  write_paint_arch(ckpt, cfg_);
  ckpt.put_state(gen_.state());
  ckpt.put_state(disc_.state());
  ckpt.put_optimizer(gen_opt_);
  ckpt.put_optimizer(disc_opt_);
}

void PaintTrainer::load(const Checkpoint& ckpt) {
  const PaintConfig stored = read_paint_arch(ckpt);
  if (stored.size != cfg_.size || stored.gen_width != cfg_.gen_width ||
      stored.depth != cfg_.unet().resolved_depth() || stored.pack != cfg_.pack ||
      stored.disc_width != cfg_.disc_width || stored.disc_layers != cfg_.disc_layers)
    throw ShapeError("checkpoint architecture (size " + std::to_string(stored.size) + ", width " +
                     std::to_string(stored.gen_width) + ") does not match trainer (size " + std::to_string(cfg_.size) +
                     ", width " + std::to_string(cfg_.gen_width) + ")");
  ckpt.load_state(gen_.state());
  ckpt.load_state(disc_.state());
  ckpt.load_optimizer(gen_opt_);
  ckpt.load_optimizer(disc_opt_);
}

UNetGenerator<float> load_paint_generator(const Checkpoint& ckpt) {
  const PaintConfig cfg = read_paint_arch(ckpt);
  Rng unused(0);
  UNetGenerator<float> gen(cfg.unet(), unused);
  ckpt.load_state(gen.state());
  return gen;
}

template class UNetGenerator<float>;
template class UNetGenerator<double>;
template class PatchDiscriminator<float>;
template class PatchDiscriminator<double>;
template PaintLosses<float> paint_losses(const Tensor&, const Tensor&, const Tensor&, const Tensor&,
                                         const PaintConfig&);
template PaintLosses<double> paint_losses(const Tensor64&, const Tensor64&, const Tensor64&, const Tensor64&,
                                          const PaintConfig&);
template Tensor pack_pairs(const Tensor&, const Tensor&, std::size_t);
template Tensor64 pack_pairs(const Tensor64&, const Tensor64&, std::size_t);

}  // namespace sapgan::paint
