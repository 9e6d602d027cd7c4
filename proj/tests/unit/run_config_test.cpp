#include <gtest/gtest.h>

#include <array>
#include <fstream>

#include "sapgan/service/run_config.hpp"
#include "temp_dir.hpp"

using namespace sapgan::service;

namespace {

void expect_error_mentions(std::string_view text, const std::string& needle) {
  try {
    parse_run_config(text);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(RunConfig, ParsesKeysCommentsAndDashes) {
  const auto e = parse_run_config("# training run\n\nsteps = 40\n--batch=8\n  lr=0.0002  \r\n");
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], (std::pair<std::string, std::string>{"steps", "40"}));
  EXPECT_EQ(e[1], (std::pair<std::string, std::string>{"batch", "8"}));
  EXPECT_EQ(e[2], (std::pair<std::string, std::string>{"lr", "0.0002"}));
  EXPECT_TRUE(parse_run_config("").empty());
}

TEST(RunConfig, ErrorsCarryLineNumbers) {
  expect_error_mentions("steps=1\nsteps=2\n", "line 2");
  expect_error_mentions("a=1\n\nnot a pair\n", "line 3");
  expect_error_mentions("=3\n", "line 1");
  expect_error_mentions("config=other.cfg\n", "nested");
}

TEST(RunConfig, ExpandSplicesAfterSubcommand) {
  TempDir dir("cfg");
  std::ofstream(dir / "run.cfg") << "steps=40\nseed=3\n";
  const auto cfg = (dir / "run.cfg").string();

  const auto a = expand_run_config({"train-sketch", "--config", cfg, "--seed", "9"});
  EXPECT_EQ(a, (std::vector<std::string>{"train-sketch", "--steps=40", "--seed=3", "--seed", "9"}));
  const auto b = expand_run_config({"--verbose", "generate", "--config=" + cfg});
  EXPECT_EQ(b, (std::vector<std::string>{"--verbose", "generate", "--steps=40", "--seed=3"}));

  // A global option's value is not mistaken for the subcommand when names are known.
  const std::array<std::string_view, 2> names{"generate", "train-sketch"};
  const auto c = expand_run_config({"--log-level", "warn", "generate", "--config", cfg}, names);
  EXPECT_EQ(c, (std::vector<std::string>{"--log-level", "warn", "generate", "--steps=40", "--seed=3"}));
  EXPECT_THROW(expand_run_config({"--log-level", "warn", "--config", cfg}, names), std::invalid_argument);

  const std::vector<std::string> plain{"generate", "--n", "2"};
  EXPECT_EQ(expand_run_config(plain), plain);
  EXPECT_THROW(expand_run_config({"generate", "--config"}), std::invalid_argument);
  EXPECT_THROW(expand_run_config({"--config", cfg}), std::invalid_argument);
  EXPECT_THROW(expand_run_config({"generate", "--config", (dir / "missing.cfg").string()}), std::exception);
}

TEST(RunConfig, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cull), "af63dc4c8601ec8c");
  EXPECT_EQ(hex64(1), "0000000000000001");
}
