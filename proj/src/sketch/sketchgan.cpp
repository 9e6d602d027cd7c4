#include "sapgan/sketch/sketchgan.hpp"

#include <bit>
#include <cmath>

#include "sapgan/errors.hpp"

namespace sapgan::sketch {

namespace {

bool is_pow2(std::size_t v) { return v && (v & (v - 1)) == 0; }

std::size_t log2_exact(std::size_t v) { return static_cast<std::size_t>(std::countr_zero(v)); }

template <class T>
void require_finite(const ParamList<T>& params, const char* what) {
  for (const auto& p : params)
    if (!all_finite(p.tensor.data())) throw NumericError(std::string(what) + ": parameter '" + p.name + "' is not finite");
}

}  // namespace

Tensor LatentSpec::sample(std::size_t n, Rng& rng) const {
  if (dim < 2) throw ShapeError("latent dim must be >= 2");
  return Tensor::randn({n, dim}, rng);
}

void SketchConfig::validate() const {
  if (latent_dim < 2) throw std::invalid_argument("latent_dim must be >= 2");
  if (!is_pow2(size) || size < 8) throw std::invalid_argument("sketch size must be a power of two >= 8");
  if (pack < 1) throw std::invalid_argument("pack must be >= 1");
  if (gen_width < 1 || disc_width < 1) throw std::invalid_argument("network widths must be >= 1");
}

// ---- generator -----------------------------------------------------------

template <class T>
SketchGenerator<T>::SketchGenerator(const SketchConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const std::size_t hidden_blocks = log2_exact(cfg_.size) - 3;  // 4 -> S/2
  base_channels_ = cfg_.gen_width << hidden_blocks;
  project_ = nn::Linear<T>(cfg_.latent_dim, base_channels_ * 16, false, rng);
  project_bn_ = nn::BatchNorm2d<T>(base_channels_);
  std::size_t ch = base_channels_;
  for (std::size_t b = 0; b < hidden_blocks; ++b) {
    ups_.emplace_back(ch, ch / 2, 4, ops::ConvGeometry{2, 1}, false, rng);
    up_bns_.emplace_back(ch / 2);
    ch /= 2;
  }
  to_image_ = nn::ConvTranspose2d<T>(ch, 1, 4, ops::ConvGeometry{2, 1}, true, rng);
}

template <class T>
BasicTensor<T> SketchGenerator<T>::forward(const BasicTensor<T>& z, bool training) {
  if (z.rank() != 2 || z.dim(1) != cfg_.latent_dim)
    throw ShapeError("sketch generator expects N×" + std::to_string(cfg_.latent_dim) + " latents, got " +
                     to_string(z.shape()));
  const std::size_t n = z.dim(0);
  auto h = ops::reshape(project_(z), {n, base_channels_, 4, 4});
  h = ops::relu(project_bn_(h, training));
  for (std::size_t b = 0; b < ups_.size(); ++b) h = ops::relu(up_bns_[b](ups_[b](h), training));
  return ops::tanh(to_image_(h));
}

template <class T>
void SketchGenerator<T>::collect(ParamList<T>& params, nn::StateList<T>& state) {
  project_.collect("sketch.gen.project", params, state);
  project_bn_.collect("sketch.gen.project_bn", params, state);
  for (std::size_t b = 0; b < ups_.size(); ++b) {
    ups_[b].collect("sketch.gen.up" + std::to_string(b), params, state);
    up_bns_[b].collect("sketch.gen.up" + std::to_string(b) + "_bn", params, state);
  }
  to_image_.collect("sketch.gen.to_image", params, state);
}

template <class T>
ParamList<T> SketchGenerator<T>::parameters() {
  ParamList<T> params;
  nn::StateList<T> state;
  collect(params, state);
  return params;
}

template <class T>
nn::StateList<T> SketchGenerator<T>::state() {
  ParamList<T> params;
  nn::StateList<T> state;
  collect(params, state);
  return state;
}

// ---- discriminator -------------------------------------------------------

template <class T>
SketchDiscriminator<T>::SketchDiscriminator(const SketchConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  first_ = nn::Conv2d<T>(cfg_.pack, cfg_.disc_width, 4, ops::ConvGeometry{2, 1}, true, rng);
  std::size_t ch = cfg_.disc_width;
  for (std::size_t spatial = cfg_.size / 2; spatial > 4; spatial /= 2) {
    downs_.emplace_back(ch, ch * 2, 4, ops::ConvGeometry{2, 1}, false, rng);
    down_bns_.emplace_back(ch * 2);
    ch *= 2;
  }
  head_ = nn::Conv2d<T>(ch, 1, 4, ops::ConvGeometry{1, 0}, true, rng);
}

template <class T>
BasicTensor<T> SketchDiscriminator<T>::forward(const BasicTensor<T>& packed, bool training) {
  if (packed.rank() != 4 || packed.dim(1) != cfg_.pack || packed.dim(2) != cfg_.size || packed.dim(3) != cfg_.size)
    throw ShapeError("sketch discriminator expects M×" + std::to_string(cfg_.pack) + "×" + std::to_string(cfg_.size) +
                     "×" + std::to_string(cfg_.size) + ", got " + to_string(packed.shape()));
  auto h = ops::leaky_relu(first_(packed), T(0.2));
  for (std::size_t b = 0; b < downs_.size(); ++b) h = ops::leaky_relu(down_bns_[b](downs_[b](h), training), T(0.2));
  auto scores = head_(h);
  return ops::reshape(scores, {packed.dim(0)});
}

template <class T>
void SketchDiscriminator<T>::collect(ParamList<T>& params, nn::StateList<T>& state) {
  first_.collect("sketch.disc.first", params, state);
  for (std::size_t b = 0; b < downs_.size(); ++b) {
    downs_[b].collect("sketch.disc.down" + std::to_string(b), params, state);
    down_bns_[b].collect("sketch.disc.down" + std::to_string(b) + "_bn", params, state);
  }
  head_.collect("sketch.disc.head", params, state);
}

template <class T>
ParamList<T> SketchDiscriminator<T>::parameters() {
  ParamList<T> params;
  nn::StateList<T> state;
  collect(params, state);
  return params;
}

template <class T>
nn::StateList<T> SketchDiscriminator<T>::state() {
  ParamList<T> params;
  nn::StateList<T> state;
  collect(params, state);
  return state;
}

// ---- packing & losses ----------------------------------------------------

template <class T>
BasicTensor<T> pac_pack(const BasicTensor<T>& batch, std::size_t k) {
  if (batch.rank() != 4) throw ShapeError("pac_pack expects N×C×H×W, got " + to_string(batch.shape()));
  if (k == 0 || batch.dim(0) % k != 0)
    throw ShapeError("pac_pack: pack size " + std::to_string(k) + " does not divide batch " +
                     std::to_string(batch.dim(0)));
  // Samples are contiguous, so grouping k of them along channels is a pure relabeling of the layout.
  return ops::reshape(batch, {batch.dim(0) / k, k * batch.dim(1), batch.dim(2), batch.dim(3)});
}

template <class T>
BasicTensor<T> pac_unpack(const BasicTensor<T>& packed, std::size_t k) {
  if (packed.rank() != 4 || k == 0 || packed.dim(1) % k != 0)
    throw ShapeError("pac_unpack: channels of " + to_string(packed.shape()) + " not divisible by " + std::to_string(k));
  return ops::reshape(packed, {packed.dim(0) * k, packed.dim(1) / k, packed.dim(2), packed.dim(3)});
}

namespace {

template <class T>
BasicTensor<T> rals_terms(const BasicTensor<T>& d_real, const BasicTensor<T>& d_fake, T real_target) {
  if (d_real.numel() == 0 || d_fake.numel() == 0) throw ShapeError("RaLS loss on empty score vectors");
  if (d_real.numel() != d_fake.numel())
    throw ShapeError("RaLS loss: " + std::to_string(d_real.numel()) + " real scores vs " +
                     std::to_string(d_fake.numel()) + " fake scores");
  auto real_rel = ops::add_scalar(ops::sub(d_real, ops::mean(d_fake)), -real_target);
  auto fake_rel = ops::add_scalar(ops::sub(d_fake, ops::mean(d_real)), real_target);
  return ops::add(ops::mean(ops::square(real_rel)), ops::mean(ops::square(fake_rel)));
}

}  // namespace

template <class T>
BasicTensor<T> rals_d_loss(const BasicTensor<T>& d_real, const BasicTensor<T>& d_fake) {
  return rals_terms(d_real, d_fake, T{1});
}

template <class T>
BasicTensor<T> rals_g_loss(const BasicTensor<T>& d_real, const BasicTensor<T>& d_fake) {
  return rals_terms(d_real, d_fake, T{-1});
}

// ---- trainer -------------------------------------------------------------

SketchTrainer::SketchTrainer(const SketchConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      rng_(seed),
      gen_([&] {
        Rng r = rng_.split("sketch.gen.init");
        return SketchGenerator<float>(cfg, r);
      }()),
      disc_([&] {
        Rng r = rng_.split("sketch.disc.init");
        return SketchDiscriminator<float>(cfg, r);
      }()),
      gen_opt_(gen_.parameters(), cfg.gen_opt),
      disc_opt_(disc_.parameters(), cfg.disc_opt) {}

SketchStepResult SketchTrainer::step(const Tensor& real_edges, const Tensor& z) {
  const std::size_t n = real_edges.rank() == 4 ? real_edges.dim(0) : 0;
  if (real_edges.rank() != 4 || real_edges.dim(1) != 1 || real_edges.dim(2) != cfg_.size ||
      real_edges.dim(3) != cfg_.size)
    throw ShapeError("train step expects N×1×" + std::to_string(cfg_.size) + "×" + std::to_string(cfg_.size) +
                     " edges, got " + to_string(real_edges.shape()));
  if (z.rank() != 2 || z.dim(0) != n)
    throw ShapeError("latent batch " + to_string(z.shape()) + " does not match " + std::to_string(n) + " edges");
  if (n % cfg_.pack != 0)
    throw ShapeError("batch " + std::to_string(n) + " not divisible by pack " + std::to_string(cfg_.pack));

  SketchStepResult result;
  const Tensor real_packed = pac_pack(real_edges, cfg_.pack);

  // Discriminator half: fakes are generated without history.
  Tensor fake_detached;
  {
    NoGradGuard no_grad;
    fake_detached = gen_.forward(z, true);
  }
  disc_opt_.zero_grad();
  auto d_real = disc_.forward(real_packed, true);
  auto d_fake = disc_.forward(pac_pack(fake_detached, cfg_.pack), true);
  auto loss_d = rals_d_loss(d_real, d_fake);
  result.loss_d = loss_d.item();
  if (!std::isfinite(result.loss_d))
    throw NumericError("sketch discriminator loss is not finite (" + std::to_string(result.loss_d) + ")");
  for (float v : d_real.data()) result.d_real_mean += v;
  for (float v : d_fake.data()) result.d_fake_mean += v;
  result.d_real_mean /= static_cast<double>(d_real.numel());
  result.d_fake_mean /= static_cast<double>(d_fake.numel());
  backward(loss_d);
  disc_opt_.step();

  // Generator half: fresh scores from the updated discriminator.
  gen_opt_.zero_grad();
  auto fake = gen_.forward(z, true);
  Tensor d_real_g;
  {
    NoGradGuard no_grad;
    d_real_g = disc_.forward(real_packed, true);
  }
  auto d_fake_g = disc_.forward(pac_pack(fake, cfg_.pack), true);
  auto loss_g = rals_g_loss(d_real_g, d_fake_g);
  result.loss_g = loss_g.item();
  if (!std::isfinite(result.loss_g))
    throw NumericError("sketch generator loss is not finite (" + std::to_string(result.loss_g) + ")");
  backward(loss_g);
  gen_opt_.step();

  require_finite(gen_opt_.params(), "sketch generator");
  require_finite(disc_opt_.params(), "sketch discriminator");
  return result;
}

Tensor sketch_generate(SketchGenerator<float>& gen, const Tensor& z) {
  NoGradGuard no_grad;
  return gen.forward(z, false);
}

void write_sketch_arch(Checkpoint& ckpt, const SketchConfig& cfg) {
  ckpt.put("sketch.gen.arch", {3},
           {static_cast<float>(cfg.latent_dim), static_cast<float>(cfg.size), static_cast<float>(cfg.gen_width)});
  ckpt.put("sketch.disc.arch", {2}, {static_cast<float>(cfg.pack), static_cast<float>(cfg.disc_width)});
}

SketchConfig read_sketch_arch(const Checkpoint& ckpt) {
  SketchConfig cfg;
  const auto& g = ckpt.get("sketch.gen.arch").values;
  if (g.size() != 3) throw IoError("sketch.gen.arch must hold 3 values");
  cfg.latent_dim = static_cast<std::size_t>(g[0]);
  cfg.size = static_cast<std::size_t>(g[1]);
  cfg.gen_width = static_cast<std::size_t>(g[2]);
  if (ckpt.contains("sketch.disc.arch")) {
    const auto& d = ckpt.get("sketch.disc.arch").values;
    if (d.size() != 2) throw IoError("sketch.disc.arch must hold 2 values");
    cfg.pack = static_cast<std::size_t>(d[0]);
    cfg.disc_width = static_cast<std::size_t>(d[1]);
  }
  cfg.validate();
  return cfg;
}

void SketchTrainer::save(Checkpoint& ckpt) {
  write_sketch_arch(ckpt, cfg_);
  ckpt.put_state(gen_.state());
  ckpt.put_state(disc_.state());
  ckpt.put_optimizer(gen_opt_);
  ckpt.put_optimizer(disc_opt_);
}

namespace {

std::string describe(const SketchConfig& c) {
  return "(latent " + std::to_string(c.latent_dim) + ", size " + std::to_string(c.size) + ", gen width " +
         std::to_string(c.gen_width) + ", disc width " + std::to_string(c.disc_width) + ", pack " +
         std::to_string(c.pack) + ")";
}

}  // namespace

void SketchTrainer::load(const Checkpoint& ckpt) {
  const SketchConfig stored = read_sketch_arch(ckpt);
  if (stored.latent_dim != cfg_.latent_dim || stored.size != cfg_.size || stored.gen_width != cfg_.gen_width ||
      stored.pack != cfg_.pack || stored.disc_width != cfg_.disc_width)
    throw ShapeError("checkpoint architecture " + describe(stored) + " does not match trainer " + describe(cfg_));
  ckpt.load_state(gen_.state());
  ckpt.load_state(disc_.state());
  ckpt.load_optimizer(gen_opt_);
  ckpt.load_optimizer(disc_opt_);
}

SketchGenerator<float> load_sketch_generator(const Checkpoint& ckpt) {
  const SketchConfig cfg = read_sketch_arch(ckpt);
  Rng unused(0);
  SketchGenerator<float> gen(cfg, unused);
  ckpt.load_state(gen.state());
  return gen;
}

template class SketchGenerator<float>;
template class SketchGenerator<double>;
template class SketchDiscriminator<float>;
template class SketchDiscriminator<double>;
template BasicTensor<float> pac_pack(const BasicTensor<float>&, std::size_t);
template BasicTensor<double> pac_pack(const BasicTensor<double>&, std::size_t);
template BasicTensor<float> pac_unpack(const BasicTensor<float>&, std::size_t);
template BasicTensor<double> pac_unpack(const BasicTensor<double>&, std::size_t);
template BasicTensor<float> rals_d_loss(const BasicTensor<float>&, const BasicTensor<float>&);
template BasicTensor<double> rals_d_loss(const BasicTensor<double>&, const BasicTensor<double>&);
template BasicTensor<float> rals_g_loss(const BasicTensor<float>&, const BasicTensor<float>&);
template BasicTensor<double> rals_g_loss(const BasicTensor<double>&, const BasicTensor<double>&);

}  // namespace sapgan::sketch
