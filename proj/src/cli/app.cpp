#include "sapgan/cli/app.hpp"

#include <algorithm>
#include <array>
#include <csignal>
#include <fstream>
#include <ostream>
#include <string_view>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sapgan/data/image_io.hpp"
#include "sapgan/data/manifest.hpp"
#include "sapgan/data/normalize.hpp"
#include "sapgan/data/preprocess.hpp"
#include "sapgan/data/synth.hpp"
#include "sapgan/errors.hpp"
#include "sapgan/eval/nearest.hpp"
#include "sapgan/eval/pipeline.hpp"
#include "sapgan/eval/survey.hpp"
#include "sapgan/kernels/kernels.hpp"
#include "sapgan/paint/paintgan.hpp"
#include "sapgan/service/http_server.hpp"
#include "sapgan/service/run_config.hpp"
#include "sapgan/sketch/sketchgan.hpp"

namespace sapgan::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 10> kSubcommands{"preprocess",  "synth",     "train-sketch", "train-paint",
                                                       "generate",    "interpolate", "translate",  "nn-test",
                                                       "turing-stats", "serve-survey"};

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

data::RawImage fit(const data::RawImage& img, std::size_t size, std::size_t channels) {
  return eval::conform(img, size, size, channels);
}

// Cycles through shuffled epochs of [0, n); batches never straddle a reshuffle unevenly.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, Rng rng) : rng_(rng), order_(n) {
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
    rng_.shuffle(order_.begin(), order_.end());
  }
  std::vector<std::size_t> next(std::size_t batch) {
    std::vector<std::size_t> out;
    while (out.size() < batch) {
      if (cursor_ == order_.size()) {
        rng_.shuffle(order_.begin(), order_.end());
        cursor_ = 0;
      }
      out.push_back(order_[cursor_++]);
    }
    return out;
  }

 private:
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

Tensor gather(const std::vector<data::RawImage>& images, const std::vector<std::size_t>& idx) {
  std::vector<data::RawImage> picked;
  picked.reserve(idx.size());
  for (auto i : idx) picked.push_back(images[i]);
  return data::normalize_batch(picked);
}

void save_tensor_image(const Tensor& t, std::size_t index, const fs::path& path) {
  ensure_parent(path);
  data::save_image(data::denormalize(t, index), path);
}

// ---- option bundles ------------------------------------------------------------

struct PreprocessArgs {
  fs::path in, out;
  std::size_t tile = 64;
  double ratio = data::kDefaultRatioThreshold;
  double blur = 1.0, low = 0.1, high = 0.2;
  bool invert = false;
  bool thin = true;
  std::string sources;  // comma separated
};

struct SynthArgs {
  fs::path out;
  std::size_t n = 64;
  std::size_t size = 64;
  std::uint64_t seed = 0;
};

struct SketchArgs {
  fs::path manifest, out;
  std::size_t steps = 400, batch = 16, pack = 2, latent = 128, size = 32, gen_width = 16, disc_width = 16;
  std::size_t log_every = 50;
  double lr = 0.002, beta1 = 0.9, beta2 = 0.999;
  std::uint64_t seed = 0;
};

struct PaintArgs {
  fs::path manifest, out;
  std::size_t steps = 400, batch = 1, pack = 1, size = 32, gen_width = 16, disc_width = 16, disc_layers = 3;
  std::size_t log_every = 50;
  double lambda_l1 = 100.0, adv_weight = 1.0, lr = 0.0002, beta1 = 0.5, beta2 = 0.999, dropout = 0.5;
  std::uint64_t seed = 0;
};

struct GenerateArgs {
  fs::path sketch_ckpt, paint_ckpt, out;
  std::size_t n = 4;
  std::uint64_t seed = 0;
  bool save_sketches = false;
};

struct TranslateArgs {
  fs::path checkpoint, in, out;
};

struct NnArgs {
  fs::path query, manifest;
  std::size_t k = 3;
};

struct StatsArgs {
  fs::path responses, json_out;
  bool per_painting = false;
};

struct ServeArgs {
  fs::path human, baseline, sapgan, responses, static_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
  std::size_t items_per_source = 6;
};

// ---- subcommand bodies -------------------------------------------------------------

int do_preprocess(const PreprocessArgs& a, std::ostream& out) {
  require_dir(a.in, "painting directory");
  data::PreprocessOptions opts;
  opts.tile = a.tile;
  opts.ratio_threshold = a.ratio;
  opts.edges = {a.blur, a.low, a.high, a.invert, a.thin};
  opts.edges.validate();
  for (std::size_t b = 0; b < a.sources.size();) {
    const auto e = std::min(a.sources.find(',', b), a.sources.size());
    if (e > b) opts.sources.push_back(a.sources.substr(b, e - b));
    b = e + 1;
  }
  const auto m = data::build_manifest(a.in, a.out, opts);
  out << "wrote " << m.records.size() << " tiles to " << (a.out / "manifest.json").string() << "\n";
  for (const auto& [src, n] : m.counts_by_source) out << "  " << src << ": " << n << "\n";
  return 0;
}

int do_synth(const SynthArgs& a, std::ostream& out) {
  Rng root(a.seed);
  const fs::path dir = a.out / "synthetic";
  fs::create_directories(dir);
  for (std::size_t i = 0; i < a.n; ++i) {
    Rng r = root.split(i);
    data::save_image(data::synth_landscape(r, a.size), dir / fmt::format("landscape_{:04d}.png", i));
  }
  out << "wrote " << a.n << " synthetic landscapes to " << dir.string() << "\n";
  return 0;
}

std::vector<data::RawImage> load_tiles(const data::DatasetManifest& m, std::size_t size, bool edges) {
  std::vector<data::RawImage> out;
  out.reserve(m.records.size());
  for (const auto& r : m.records)
    out.push_back(fit(data::load_image(edges ? m.edge_path(r) : m.painting_path(r)), size, edges ? 1 : 3));
  return out;
}

int do_train_sketch(const SketchArgs& a, std::ostream& out) {
  require_file(a.manifest, "manifest");
  sketch::SketchConfig cfg;
  cfg.latent_dim = a.latent;
  cfg.size = a.size;
  cfg.gen_width = a.gen_width;
  cfg.disc_width = a.disc_width;
  cfg.pack = a.pack;
  cfg.gen_opt = cfg.disc_opt = AdamConfig{a.lr, a.beta1, a.beta2, 1e-8, 0.0};
  cfg.validate();
  if (a.batch % a.pack != 0)
    throw std::invalid_argument(fmt::format("--batch {} must be a multiple of --pack {}", a.batch, a.pack));

  const auto manifest = data::load_manifest(a.manifest);
  const auto edges = load_tiles(manifest, a.size, true);
  sketch::SketchTrainer trainer(cfg, a.seed);
  Rng rng(a.seed);
  BatchSampler sampler(edges.size(), rng.split("batches"));
  Rng zrng = rng.split("latents");
  const sketch::LatentSpec latent{cfg.latent_dim};
  sketch::SketchStepResult last;
  for (std::size_t step = 1; step <= a.steps; ++step) {
    last = trainer.step(gather(edges, sampler.next(a.batch)), latent.sample(a.batch, zrng));
    if (a.log_every && (step % a.log_every == 0 || step == a.steps))
      spdlog::info("sketch step {}/{}: loss_d {:.5f} loss_g {:.5f}", step, a.steps, last.loss_d, last.loss_g);
  }
  Checkpoint ckpt;
  trainer.save(ckpt);
  ensure_parent(a.out);
  ckpt.save(a.out);
  out << fmt::format("trained sketch generator for {} steps on {} edge maps; loss_d {:.5f} loss_g {:.5f}\n", a.steps,
                     edges.size(), last.loss_d, last.loss_g);
  out << "checkpoint: " << a.out.string() << "\n";
  return 0;
}

int do_train_paint(const PaintArgs& a, std::ostream& out) {
  require_file(a.manifest, "manifest");
  paint::PaintConfig cfg;
  cfg.size = a.size;
  cfg.gen_width = a.gen_width;
  cfg.disc_width = a.disc_width;
  cfg.disc_layers = a.disc_layers;
  cfg.pack = a.pack;
  cfg.lambda_l1 = a.lambda_l1;
  cfg.adv_weight = a.adv_weight;
  cfg.dropout = a.dropout;
  cfg.gen_opt = cfg.disc_opt = AdamConfig{a.lr, a.beta1, a.beta2, 1e-8, 0.0};
  cfg.validate();
  if (a.batch % a.pack != 0)
    throw std::invalid_argument(fmt::format("--batch {} must be a multiple of --pack {}", a.batch, a.pack));

  const auto manifest = data::load_manifest(a.manifest);
  const auto edges = load_tiles(manifest, a.size, true);
  const auto paintings = load_tiles(manifest, a.size, false);
  paint::PaintTrainer trainer(cfg, a.seed);
  BatchSampler sampler(edges.size(), Rng(a.seed).split("batches"));
  paint::PaintStepResult last;
  for (std::size_t step = 1; step <= a.steps; ++step) {
    const auto idx = sampler.next(a.batch);
    last = trainer.step(gather(edges, idx), gather(paintings, idx));
    if (a.log_every && (step % a.log_every == 0 || step == a.steps))
      spdlog::info("paint step {}/{}: loss_d {:.5f} loss_g {:.5f} l1 {:.5f}", step, a.steps, last.loss_d,
                   last.loss_g, last.l1);
  }
  Checkpoint ckpt;
  trainer.save(ckpt);
  ensure_parent(a.out);
  ckpt.save(a.out);
  out << fmt::format("trained painter for {} steps on {} pairs; loss_d {:.5f} loss_g {:.5f} l1 {:.5f}\n", a.steps,
                     edges.size(), last.loss_d, last.loss_g, last.l1);
  out << "checkpoint: " << a.out.string() << "\n";
  return 0;
}

int do_generate(const GenerateArgs& a, std::ostream& out) {
  require_file(a.sketch_ckpt, "sketch checkpoint");
  require_file(a.paint_ckpt, "paint checkpoint");
  if (a.n == 0) throw std::invalid_argument("--n must be >= 1");
  auto pipeline = eval::Pipeline::load(a.sketch_ckpt, a.paint_ckpt);
  Rng rng = Rng(a.seed).split("latent");
  const auto z = sketch::LatentSpec{pipeline.latent_dim()}.sample(a.n, rng);
  const auto result = pipeline.run(z);
  fs::create_directories(a.out);
  for (std::size_t i = 0; i < a.n; ++i) {
    const auto path = a.out / fmt::format("painting_{:03d}.png", i);
    save_tensor_image(result.paintings, i, path);
    if (a.save_sketches) save_tensor_image(result.sketches, i, a.out / fmt::format("sketch_{:03d}.png", i));
    out << path.string() << "\n";
  }
  return 0;
}

int do_interpolate(const GenerateArgs& a, std::ostream& out) {
  require_file(a.sketch_ckpt, "sketch checkpoint");
  require_file(a.paint_ckpt, "paint checkpoint");
  auto pipeline = eval::Pipeline::load(a.sketch_ckpt, a.paint_ckpt);
  Rng rng = Rng(a.seed).split("latent");
  const sketch::LatentSpec latent{pipeline.latent_dim()};
  const auto z0 = latent.sample(1, rng);
  const auto z1 = latent.sample(1, rng);
  const auto frames = eval::interpolate(pipeline, z0, z1, a.n);
  fs::create_directories(a.out);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    save_tensor_image(frames[i].painting, 0, a.out / fmt::format("frame_{:02d}.png", i));
    save_tensor_image(frames[i].sketch, 0, a.out / fmt::format("sketch_{:02d}.png", i));
    out << fmt::format("frame {} t={:.3f}", i, frames[i].t);
    if (i > 0) out << fmt::format(" step_l2={:.6f}", eval::mean_pixel_l2(frames[i - 1].painting, frames[i].painting));
    out << "\n";
  }
  out << fmt::format("endpoint_l2={:.6f}\n", eval::mean_pixel_l2(frames.front().painting, frames.back().painting));
  return 0;
}

int do_translate(const TranslateArgs& a, std::ostream& out) {
  require_file(a.checkpoint, "paint checkpoint");
  auto gen = paint::load_paint_generator(Checkpoint::load(a.checkpoint));
  const std::size_t size = gen.config().size;
  std::vector<std::pair<fs::path, fs::path>> jobs;
  if (fs::is_directory(a.in)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.in))
      if (e.is_regular_file() && data::is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) jobs.emplace_back(f, a.out / (f.stem().string() + ".png"));
  } else {
    require_file(a.in, "edge image");
    jobs.emplace_back(a.in, a.out);
  }
  for (const auto& [src, dst] : jobs) {
    const auto edge = data::load_image(src);
    if (edge.width != edge.height)
      throw ShapeError(fmt::format("translate: {} is {}x{}, expected a square {}x{} edge map", src.string(),
                                   edge.width, edge.height, size, size));
    const auto painting = paint::translate(gen, data::normalize(fit(edge, size, 1)));
    save_tensor_image(painting, 0, dst);
    out << dst.string() << "\n";
  }
  return 0;
}

int do_nn_test(const NnArgs& a, std::ostream& out) {
  require_file(a.query, "query image");
  require_file(a.manifest, "manifest");
  const auto manifest = data::load_manifest(a.manifest);
  const auto hits = eval::nearest_neighbors(data::load_image(a.query), manifest, a.k);
  for (std::size_t i = 0; i < hits.size(); ++i)
    out << fmt::format("{} {} {:.6f}\n", i + 1, hits[i].id, hits[i].distance);
  return 0;
}

int do_turing_stats(const StatsArgs& a, std::ostream& out) {
  require_file(a.responses, "response CSV");
  const auto rows = eval::read_csv(a.responses);
  const auto report = eval::build_report(rows, a.per_painting ? eval::Unit::painting : eval::Unit::participant);
  out << eval::to_text(report);
  if (!a.json_out.empty()) {
    ensure_parent(a.json_out);
    std::ofstream f(a.json_out);
    if (!f) throw IoError("cannot write " + a.json_out.string());
    f << eval::to_json(report).dump(2) << "\n";
  }
  return 0;
}

service::SurveyHttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int do_serve(const ServeArgs& a, std::ostream& out) {
  require_dir(a.human, "human pool");
  require_dir(a.baseline, "baseline pool");
  require_dir(a.sapgan, "sapgan pool");
  if (!a.static_dir.empty()) require_dir(a.static_dir, "static asset directory");
  service::SurveyOptions opts;
  opts.pools = {a.human, a.baseline, a.sapgan};
  opts.csv_path = a.responses;
  opts.seed = a.seed;
  opts.items_per_source = a.items_per_source;
  service::SurveyService svc(opts);
  service::ServerOptions sopts;
  sopts.host = a.host;
  sopts.port = a.port;
  if (!a.static_dir.empty()) sopts.static_dir = a.static_dir;
  service::SurveyHttpServer server(svc, sopts);
  const int port = server.bind();
  out << "serving on http://" << a.host << ":" << port << "\n" << std::flush;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.serve();
  g_server = nullptr;
  return 0;
}

template <class T>
void seed_opt(CLI::App* sub, T& seed) {
  sub->add_option("--seed", seed, "RNG seed")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = service::expand_run_config(raw_args, kSubcommands);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"Sketch-and-paint GAN toolkit"};
  app.set_help_all_flag("--help-all", "Expand all help");
  app.footer("Any flag may also be given as key=value in a file passed with --config PATH; command-line flags win.");
  app.require_subcommand(1);
  app.fallthrough();  // lets --log-level appear after the subcommand (config injection puts it there)
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")->capture_default_str();

  PreprocessArgs pre;
  auto* s_pre = app.add_subcommand("preprocess", "Tile paintings, extract edge maps, write manifest.json");
  s_pre->add_option("--in", pre.in, "Painting directory (optionally one subdirectory per collection)")->required();
  s_pre->add_option("--out", pre.out, "Output dataset directory")->required();
  s_pre->add_option("--tile", pre.tile, "Tile size in pixels")->capture_default_str();
  s_pre->add_option("--ratio-threshold", pre.ratio, "Height/width ratio at or below which a single center crop is taken")
      ->capture_default_str();
  s_pre->add_option("--blur-sigma", pre.blur, "Gaussian pre-blur sigma (0 disables)")->capture_default_str();
  s_pre->add_option("--low", pre.low, "Hysteresis low threshold")->capture_default_str();
  s_pre->add_option("--high", pre.high, "Hysteresis high threshold")->capture_default_str();
  s_pre->add_flag("--invert,!--no-invert", pre.invert, "Dark edges on white");
  s_pre->add_flag("--thin,!--no-thin", pre.thin, "Non-maximum suppression (default on)");
  s_pre->add_option("--sources", pre.sources, "Collection subdirectories to include (comma separated)");

  SynthArgs syn;
  auto* s_syn = app.add_subcommand("synth", "Render procedural ink-wash landscapes into OUT/synthetic");
  s_syn->add_option("--out", syn.out, "Output directory")->required();
  s_syn->add_option("--n", syn.n, "Number of images")->capture_default_str();
  s_syn->add_option("--size", syn.size, "Square image size")->capture_default_str();
  seed_opt(s_syn, syn.seed);

  SketchArgs sk;
  auto* s_sk = app.add_subcommand("train-sketch", "Train the unconditional edge-map generator");
  s_sk->add_option("--manifest", sk.manifest, "Dataset manifest.json")->required();
  s_sk->add_option("--out", sk.out, "Checkpoint path")->required();
  s_sk->add_option("--steps", sk.steps, "Training steps")->capture_default_str();
  s_sk->add_option("--batch", sk.batch, "Batch size")->capture_default_str();
  s_sk->add_option("--pack", sk.pack, "Discriminator packing degree")->capture_default_str();
  s_sk->add_option("--latent-dim", sk.latent, "Latent vector size")->capture_default_str();
  s_sk->add_option("--size", sk.size, "Edge-map size (power of two)")->capture_default_str();
  s_sk->add_option("--gen-width", sk.gen_width, "Generator width")->capture_default_str();
  s_sk->add_option("--disc-width", sk.disc_width, "Discriminator width")->capture_default_str();
  s_sk->add_option("--lr", sk.lr, "Adam learning rate")->capture_default_str();
  s_sk->add_option("--beta1", sk.beta1, "Adam beta1")->capture_default_str();
  s_sk->add_option("--beta2", sk.beta2, "Adam beta2")->capture_default_str();
  s_sk->add_option("--log-every", sk.log_every, "Log losses every N steps (0 = quiet)")->capture_default_str();
  seed_opt(s_sk, sk.seed);

  PaintArgs pa;
  auto* s_pa = app.add_subcommand("train-paint", "Train the edge-to-painting translator");
  s_pa->add_option("--manifest", pa.manifest, "Dataset manifest.json")->required();
  s_pa->add_option("--out", pa.out, "Checkpoint path")->required();
  s_pa->add_option("--steps", pa.steps, "Training steps")->capture_default_str();
  s_pa->add_option("--batch", pa.batch, "Batch size")->capture_default_str();
  s_pa->add_option("--pack", pa.pack, "Discriminator packing degree")->capture_default_str();
  s_pa->add_option("--lambda-l1", pa.lambda_l1, "Weight of the L1 term")->capture_default_str();
  s_pa->add_option("--adv-weight", pa.adv_weight, "Weight of the adversarial term (0 = L1 only)")->capture_default_str();
  s_pa->add_option("--size", pa.size, "Tile size (power of two)")->capture_default_str();
  s_pa->add_option("--gen-width", pa.gen_width, "U-Net width")->capture_default_str();
  s_pa->add_option("--disc-width", pa.disc_width, "Discriminator width")->capture_default_str();
  s_pa->add_option("--disc-layers", pa.disc_layers, "Stride-2 discriminator layers")->capture_default_str();
  s_pa->add_option("--dropout", pa.dropout, "Decoder dropout probability")->capture_default_str();
  s_pa->add_option("--lr", pa.lr, "Adam learning rate")->capture_default_str();
  s_pa->add_option("--beta1", pa.beta1, "Adam beta1")->capture_default_str();
  s_pa->add_option("--beta2", pa.beta2, "Adam beta2")->capture_default_str();
  s_pa->add_option("--log-every", pa.log_every, "Log losses every N steps (0 = quiet)")->capture_default_str();
  seed_opt(s_pa, pa.seed);

  GenerateArgs gen;
  auto* s_gen = app.add_subcommand("generate", "Latent -> sketch -> painting, written as PNGs");
  s_gen->add_option("--sketch-ckpt", gen.sketch_ckpt, "Sketch generator checkpoint")->required();
  s_gen->add_option("--paint-ckpt", gen.paint_ckpt, "Painter checkpoint")->required();
  s_gen->add_option("--out", gen.out, "Output directory")->required();
  s_gen->add_option("--n", gen.n, "Number of paintings")->capture_default_str();
  s_gen->add_flag("--save-sketches", gen.save_sketches, "Also write the intermediate edge maps");
  seed_opt(s_gen, gen.seed);

  GenerateArgs interp;
  interp.n = 6;
  auto* s_int = app.add_subcommand("interpolate", "Latent walk between two seeded latents");
  s_int->add_option("--sketch-ckpt", interp.sketch_ckpt, "Sketch generator checkpoint")->required();
  s_int->add_option("--paint-ckpt", interp.paint_ckpt, "Painter checkpoint")->required();
  s_int->add_option("--out", interp.out, "Output directory")->required();
  s_int->add_option("--n", interp.n, "Number of frames (>= 2)")->capture_default_str();
  seed_opt(s_int, interp.seed);

  TranslateArgs tr;
  auto* s_tr = app.add_subcommand("translate", "Edge map(s) -> painting(s) with a trained painter");
  s_tr->add_option("--checkpoint", tr.checkpoint, "Painter checkpoint")->required();
  s_tr->add_option("--in", tr.in, "Edge image or directory of edge images")->required();
  s_tr->add_option("--out", tr.out, "Output image (or directory when --in is a directory)")->required();

  NnArgs nn;
  auto* s_nn = app.add_subcommand("nn-test", "Pixel-L2 nearest neighbors of a query in the training tiles");
  s_nn->add_option("--query", nn.query, "Query image")->required();
  s_nn->add_option("--manifest", nn.manifest, "Dataset manifest.json")->required();
  s_nn->add_option("--k", nn.k, "Number of neighbors")->capture_default_str()->check(CLI::PositiveNumber);

  StatsArgs st;
  auto* s_st = app.add_subcommand("turing-stats", "Summarize Visual Turing Test responses");
  s_st->add_option("--responses", st.responses, "Response CSV")->required();
  s_st->add_option("--json", st.json_out, "Also write the report as JSON");
  s_st->add_flag("--per-painting", st.per_painting, "Spread over paintings instead of participants");

  ServeArgs sv;
  auto* s_sv = app.add_subcommand("serve-survey", "Serve the Visual Turing Test API on localhost");
  s_sv->add_option("--human", sv.human, "Pool of human paintings")->required();
  s_sv->add_option("--baseline", sv.baseline, "Pool of baseline-model paintings")->required();
  s_sv->add_option("--sapgan", sv.sapgan, "Pool of sketch-and-paint paintings")->required();
  s_sv->add_option("--responses", sv.responses, "Append-only response CSV")->required();
  s_sv->add_option("--static", sv.static_dir, "Built frontend assets to serve at /");
  s_sv->add_option("--host", sv.host, "Bind address")->capture_default_str();
  s_sv->add_option("--port", sv.port, "Port (0 = any free port)")->capture_default_str();
  s_sv->add_option("--items-per-source", sv.items_per_source, "Items drawn from each pool")->capture_default_str();
  seed_opt(s_sv, sv.seed);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto level = spdlog::level::from_str(log_level);
  spdlog::set_level(level);

  CLI::App* sub = app.get_subcommands().front();
  const std::string effective = sub->config_to_str(true, false);
  std::uint64_t seed = 0;
  if (auto* opt = sub->get_option_no_throw("--seed")) seed = opt->as<std::uint64_t>();
  spdlog::info("{}: seed {} config digest {} isa {}", sub->get_name(), seed,
               service::hex64(service::fnv1a64(effective)), kernels::isa_name(kernels::active_isa()));

  try {
    const std::string name = sub->get_name();
    if (name == "preprocess") return do_preprocess(pre, out);
    if (name == "synth") return do_synth(syn, out);
    if (name == "train-sketch") return do_train_sketch(sk, out);
    if (name == "train-paint") return do_train_paint(pa, out);
    if (name == "generate") return do_generate(gen, out);
    if (name == "interpolate") return do_interpolate(interp, out);
    if (name == "translate") return do_translate(tr, out);
    if (name == "nn-test") return do_nn_test(nn, out);
    if (name == "turing-stats") return do_turing_stats(st, out);
    if (name == "serve-survey") return do_serve(sv, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: unhandled subcommand\n";
  return 2;
}

}  // namespace sapgan::cli
