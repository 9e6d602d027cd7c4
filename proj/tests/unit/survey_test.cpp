#include <gtest/gtest.h>

#include <algorithm>
#include <nlohmann/json.hpp>

#include "sapgan/errors.hpp"
#include "sapgan/eval/survey.hpp"
#include "sapgan/tensor/rng.hpp"
#include "survey_fixture.hpp"

using namespace sapgan::eval;
using sapgan::SchemaError;

namespace {

const SourceFrequency& freq(const std::vector<SourceFrequency>& fs, PaintingSource s) {
  auto it = std::find_if(fs.begin(), fs.end(), [&](const auto& f) { return f.source == s; });
  if (it == fs.end()) throw std::runtime_error("source missing");
  return *it;
}

}  // namespace

TEST(SurveyCsv, RoundTripAndExactHeader) {
  auto rows = fixture::frequency_corpus().rows;
  rows[0].participant_id = "needs,\"quoting\"";
  const auto text = write_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  EXPECT_EQ(parse_csv(text), rows);
}

TEST(SurveyCsv, RejectsSchemaViolationsWithLineNumbers) {
  const std::string header(kCsvHeader);
  const std::string ok = "p1,en,img1,sapgan,human,5,1,2,3,4,t\n";
  EXPECT_EQ(parse_csv(header + "\n" + ok).size(), 1u);

  auto expect_schema = [](const std::string& doc, const std::string& needle) {
    try {
      parse_csv(doc);
      ADD_FAILURE() << "accepted: " << doc;
    } catch (const SchemaError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_schema(header + "\n" + "p1,en,img1,sapgan,human,11,1,2,3,4,t\n", "q2_certainty");
  expect_schema(header + "\n" + "p1,en,img1,sapgan,human,5,0,2,3,4,t\n", "q3_aesthetic");
  expect_schema(header + "\n" + "p1,en,img1,robot,human,5,1,2,3,4,t\n", "source");
  expect_schema(header + "\n" + "p1,fr,img1,sapgan,human,5,1,2,3,4,t\n", "native_lang");
  expect_schema(header + "\n" + ok + ok, "line 3");
  expect_schema(header + "\n" + "p1,en,img1,sapgan,human,5,1,2,3\n", "line 2");
  expect_schema("participant_id,lang\n" + ok, "header");
}

TEST(TuringFrequency, ReproducesConstructedProportions) {
  const auto c = fixture::frequency_corpus();
  const auto fs = turing_frequency(c.rows);
  EXPECT_EQ(freq(fs, PaintingSource::sapgan).mean, c.sapgan_expected);
  EXPECT_EQ(freq(fs, PaintingSource::sapgan).mean, 0.55);
  EXPECT_EQ(freq(fs, PaintingSource::sapgan).stddev, 0.0);
  EXPECT_EQ(freq(fs, PaintingSource::baseline).mean, c.baseline_expected);
  EXPECT_EQ(freq(fs, PaintingSource::baseline).mean, 0.11);
  EXPECT_EQ(freq(fs, PaintingSource::baseline).units, 10u);
  // per-participant fractions {0.1 ×8, 0.15 ×2}: sample sd = sqrt((8·0.01² + 2·0.04²)/9)
  EXPECT_NEAR(freq(fs, PaintingSource::baseline).stddev, std::sqrt((8 * 1e-4 + 2 * 16e-4) / 9), 1e-15);
}

TEST(TuringFrequency, DegenerateCases) {
  auto rows = fixture::frequency_corpus().rows;
  for (auto& r : rows) r.q1 = Answer::computer;
  for (const auto& f : turing_frequency(rows)) {
    EXPECT_EQ(f.mean, 0.0);
    EXPECT_EQ(f.stddev, 0.0);
  }
  std::vector<SurveyResponse> one;
  for (const auto& r : fixture::frequency_corpus().rows)
    if (r.participant_id == "p00") one.push_back(r);
  const auto single = turing_frequency(one);
  EXPECT_TRUE(freq(single, PaintingSource::sapgan).single_unit);
  EXPECT_EQ(freq(single, PaintingSource::sapgan).stddev, 0.0);

  // A participant who never saw a sapgan item breaks the precondition.
  auto partial = fixture::frequency_corpus().rows;
  std::erase_if(partial, [](const auto& r) { return r.participant_id == "p03" && r.source == PaintingSource::sapgan; });
  EXPECT_THROW(turing_frequency(partial), SchemaError);
}

TEST(TuringFrequency, PerPaintingUnit) {
  const auto c = fixture::frequency_corpus();
  const auto fs = turing_frequency(c.rows, Unit::painting);
  // sapgan item i is called human by everybody iff i < 11.
  EXPECT_EQ(freq(fs, PaintingSource::sapgan).units, 20u);
  EXPECT_EQ(freq(fs, PaintingSource::sapgan).mean, 0.55);
}

TEST(PointDistance, ReproducesConstructedAestheticGap) {
  const auto b = fixture::aesthetic_corpus();
  const auto ds = point_distance(b.rows);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].source, PaintingSource::sapgan);
  EXPECT_EQ(ds[0].distance[0], b.expected);
  EXPECT_EQ(ds[0].distance[0], 0.35);
  EXPECT_EQ(ds[0].mean[0], 2.65);
  for (int c = 1; c < 4; ++c) EXPECT_EQ(ds[0].distance[c], 0.0);
  EXPECT_EQ(human_category_means(b.rows)[0], 3.0);

  std::vector<SurveyResponse> no_human;
  for (const auto& r : b.rows)
    if (r.source != PaintingSource::human) no_human.push_back(r);
  EXPECT_THROW(point_distance(no_human), SchemaError);
}

TEST(ScoreDistribution, ReproducesConstructedAverage) {
  const auto b = fixture::average_score_corpus();
  const auto s = score_distribution(b.rows);
  EXPECT_EQ(s.participants.size(), 20u);
  EXPECT_EQ(s.mean, b.expected);
  EXPECT_EQ(s.mean, 0.705);
}

TEST(ScoreDistribution, LanguageSplit) {
  const auto c = fixture::language_corpus();
  const auto s = score_distribution(c.rows);
  EXPECT_NEAR(s.mean_by_lang.at(Lang::zh), 0.492, 1e-15);
  EXPECT_NEAR(s.mean_by_lang.at(Lang::en), 0.735, 1e-15);
  EXPECT_EQ(s.mean_by_lang.at(Lang::zh), c.zh_expected);
  EXPECT_EQ(s.mean_by_lang.at(Lang::en), c.en_expected);
}

TEST(ScoreDistribution, PerfectParticipant) {
  std::vector<SurveyResponse> rows;
  fixture::add_accuracy_cohort(rows, "x", Lang::other, 18, {18});
  const auto s = score_distribution(rows);
  ASSERT_EQ(s.participants.size(), 1u);
  EXPECT_EQ(s.participants[0].accuracy, 1.0);
  EXPECT_EQ(s.participants[0].correct, 18u);
}

TEST(SurveyStats, PermutationInvariant) {
  auto rows = fixture::frequency_corpus().rows;
  // Every participant here saw all three sources.
  auto extra = fixture::language_corpus().rows;
  rows.insert(rows.end(), extra.begin(), extra.end());
  const auto f0 = turing_frequency(rows);
  const auto d0 = point_distance(rows);
  const auto s0 = score_distribution(rows);
  sapgan::Rng rng(4);
  for (int k = 0; k < 5; ++k) {
    rng.shuffle(rows.begin(), rows.end());
    const auto f = turing_frequency(rows);
    ASSERT_EQ(f.size(), f0.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      EXPECT_EQ(f[i].mean, f0[i].mean);
      EXPECT_EQ(f[i].stddev, f0[i].stddev);
    }
    EXPECT_EQ(point_distance(rows)[0].distance, d0[0].distance);
    EXPECT_EQ(score_distribution(rows).mean, s0.mean);
  }
}

TEST(TuringReport, JsonAndTextCarryTheNumbers) {
  auto rows = fixture::frequency_corpus().rows;
  const auto lang = fixture::language_corpus().rows;
  rows.insert(rows.end(), lang.begin(), lang.end());
  const auto rep = build_report(rows);
  EXPECT_EQ(rep.rows, rows.size());
  EXPECT_EQ(rep.participants, 25u);
  ASSERT_EQ(rep.comparisons.size(), 2u);
  for (const auto& c : rep.comparisons)
    if (c.test) {
      EXPECT_GT(c.test->p, 0.0);
      EXPECT_LE(c.test->p, 1.0);
    }
  const auto j = to_json(rep);
  EXPECT_EQ(j["mistaken_for_human"].size(), 3u);
  EXPECT_EQ(j["participants"], 25);
  EXPECT_TRUE(j["accuracy"]["mean_by_lang"].contains("zh"));
  EXPECT_EQ(j["comparisons"].size(), 2u);
  const auto text = to_text(rep);
  EXPECT_NE(text.find("sapgan"), std::string::npos);
  EXPECT_NE(text.find("baseline"), std::string::npos);
}
