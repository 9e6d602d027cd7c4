#include <gtest/gtest.h>

#include <cmath>

#include "sapgan/errors.hpp"
#include "sapgan/eval/pipeline.hpp"
#include "temp_dir.hpp"

using namespace sapgan;

namespace {

sketch::SketchConfig sketch_cfg(std::size_t size = 16) {
  sketch::SketchConfig c;
  c.latent_dim = 8;
  c.size = size;
  c.gen_width = 4;
  c.disc_width = 4;
  return c;
}

paint::UNetConfig unet_cfg(std::size_t size = 16) {
  paint::UNetConfig c;
  c.size = size;
  c.width = 4;
  return c;
}

eval::Pipeline make_pipeline(std::uint64_t seed) {
  Rng rng(seed);
  Rng a = rng.split("s"), b = rng.split("p");
  return eval::Pipeline(sketch::SketchGenerator<float>(sketch_cfg(), a), paint::UNetGenerator<float>(unet_cfg(), b));
}

bool same(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

}  // namespace

TEST(Pipeline, ShapesAndDeterminism) {
  auto p = make_pipeline(1);
  Rng rng(2);
  const auto z = sketch::LatentSpec{8}.sample(2, rng);
  const auto out = p.run(z);
  EXPECT_EQ(out.sketches.shape(), (Shape{2, 1, 16, 16}));
  EXPECT_EQ(out.paintings.shape(), (Shape{2, 3, 16, 16}));
  EXPECT_TRUE(same(p.end_to_end(z), p.end_to_end(z)));
  auto q = make_pipeline(1);
  EXPECT_TRUE(same(q.end_to_end(z), out.paintings));
}

TEST(Pipeline, EqualsManualChaining) {
  auto p = make_pipeline(3);
  Rng rng(4);
  const auto z = sketch::LatentSpec{8}.sample(3, rng);
  const auto manual = paint::translate(p.paint_generator(), sketch::sketch_generate(p.sketch_generator(), z));
  EXPECT_TRUE(same(p.end_to_end(z), manual));
}

TEST(Pipeline, RejectsStageSizeMismatch) {
  Rng rng(5);
  Rng a = rng.split("s"), b = rng.split("p");
  try {
    eval::Pipeline(sketch::SketchGenerator<float>(sketch_cfg(16), a), paint::UNetGenerator<float>(unet_cfg(32), b));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("16"), std::string::npos) << msg;
    EXPECT_NE(msg.find("32"), std::string::npos) << msg;
  }
}

TEST(Pipeline, LoadsFromCheckpoints) {
  TempDir dir("pipe");
  sketch::SketchTrainer st(sketch_cfg(), 1);
  paint::PaintConfig pc;
  pc.size = 16;
  pc.gen_width = 4;
  pc.disc_width = 4;
  paint::PaintTrainer pt(pc, 2);
  Checkpoint a, b;
  st.save(a);
  pt.save(b);
  a.save(dir / "s.sapg");
  b.save(dir / "p.sapg");
  auto p = eval::Pipeline::load(dir / "s.sapg", dir / "p.sapg");
  Rng rng(3);
  const auto z = sketch::LatentSpec{8}.sample(1, rng);
  const auto manual = paint::translate(pt.generator(), sketch::sketch_generate(st.generator(), z));
  EXPECT_TRUE(same(p.end_to_end(z), manual));
  EXPECT_THROW(eval::Pipeline::load(dir / "s.sapg", dir / "missing.sapg"), IoError);
  EXPECT_THROW(eval::Pipeline::load(dir / "p.sapg", dir / "p.sapg"), IoError);
}

TEST(Interpolation, TimesAndEndpoints) {
  const auto t = eval::interpolation_times(6);
  EXPECT_EQ(t, (std::vector<double>{0.0, 0.2, 0.4, 0.6, 0.8, 1.0}));
  EXPECT_THROW(eval::interpolation_times(1), std::invalid_argument);

  auto p = make_pipeline(6);
  Rng rng(7);
  const auto z0 = sketch::LatentSpec{8}.sample(1, rng), z1 = sketch::LatentSpec{8}.sample(1, rng);
  const auto frames = eval::interpolate(p, z0, z1, 6);
  ASSERT_EQ(frames.size(), 6u);
  EXPECT_TRUE(same(frames.front().z, z0));
  EXPECT_TRUE(same(frames.back().z, z1));
  EXPECT_TRUE(same(frames.front().painting, p.end_to_end(z0)));
  EXPECT_TRUE(same(frames.back().painting, p.end_to_end(z1)));
  EXPECT_TRUE(same(frames[2].painting, p.end_to_end(eval::lerp_latent(z0, z1, 0.4))));
  EXPECT_THROW(eval::interpolate(p, z0, sketch::LatentSpec{7}.sample(1, rng), 6), ShapeError);
}

TEST(Interpolation, LerpIsAffine) {
  const Tensor a({1, 3}, {0, 1, -2}), b({1, 3}, {2, 1, 2});
  const auto m = eval::lerp_latent(a, b, 0.25);
  EXPECT_FLOAT_EQ(m.data()[0], 0.5f);
  EXPECT_FLOAT_EQ(m.data()[1], 1.0f);
  EXPECT_FLOAT_EQ(m.data()[2], -1.0f);
  EXPECT_EQ(eval::mean_pixel_l2(a, a), 0.0);
  EXPECT_NEAR(eval::mean_pixel_l2(a, b), std::sqrt((4.0 + 0 + 16) / 3), 1e-6);
}
