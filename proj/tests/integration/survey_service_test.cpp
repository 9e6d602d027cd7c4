#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sapgan/errors.hpp"
#include "sapgan/eval/survey.hpp"
#include "survey_pools.hpp"

using namespace sapgan;
using service::SurveyService;
using nlohmann::json;

namespace {

json answer(const json& session, std::size_t index, const std::string& q1 = "human", int q2 = 5) {
  return {{"session_id", session["session_id"]},
          {"image_id", session["items"][index]["id"]},
          {"q1", q1},
          {"q2_certainty", q2},
          {"q3_aesthetic", 3},
          {"q3_composition", 2},
          {"q3_clarity", 4},
          {"q3_creative", 1}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Any client-visible text mentioning a source label would leak ground truth.
void expect_no_source_leak(const std::string& body) {
  for (const char* word : {"baseline", "sapgan", "\"source\""})
    EXPECT_EQ(body.find(word), std::string::npos) << word << " in " << body;
}

}  // namespace

TEST(SurveyService, SessionHasSixItemsPerSource) {
  SurveyPools pools;
  SurveyService svc(pools.options());
  const auto r = svc.get_test("alice", "en");
  ASSERT_EQ(r.status, 200) << r.body;
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["count"], 18);
  ASSERT_EQ(j["items"].size(), 18u);
  std::set<std::string> ids;
  for (const auto& it : j["items"]) {
    ids.insert(it["id"].get<std::string>());
    EXPECT_EQ(it["url"], "/api/images/" + it["id"].get<std::string>());
    EXPECT_FALSE(it.contains("source"));
  }
  EXPECT_EQ(ids.size(), 18u);
  const auto audit = svc.session_sources(j["session_id"]);
  ASSERT_TRUE(audit);
  for (auto s : eval::kAllSources) EXPECT_EQ(std::count(audit->begin(), audit->end(), s), 6);
  expect_no_source_leak(r.body);
}

TEST(SurveyService, SameSeedSameItems) {
  SurveyPools pools;
  SurveyService a(pools.options(42)), b(pools.options(42)), c(pools.options(43));
  const auto ja = json::parse(a.get_test("p", "zh").body), jb = json::parse(b.get_test("p", "zh").body);
  EXPECT_EQ(ja["items"], jb["items"]);
  EXPECT_NE(ja["items"], json::parse(c.get_test("p", "zh").body)["items"]);
}

TEST(SurveyService, UndersizedPoolIs409WithCounts) {
  SurveyPools pools({10, 10, 5});
  SurveyService svc(pools.options());
  const auto r = svc.get_test("bob", "en");
  EXPECT_EQ(r.status, 409);
  const auto j = json::parse(r.body);
  EXPECT_EQ(j["pool_counts"]["sapgan"], 5);
  EXPECT_EQ(j["pool_counts"]["human"], 10);
}

TEST(SurveyService, BadRequests) {
  SurveyPools pools;
  SurveyService svc(pools.options());
  EXPECT_EQ(svc.get_test("", "en").status, 400);
  EXPECT_EQ(svc.get_test("x", "klingon").status, 422);
  const auto session = json::parse(svc.get_test("carol", "other").body);

  auto bad = answer(session, 0, "human", 11);
  EXPECT_EQ(svc.post_response(bad.dump()).status, 422);
  bad = answer(session, 0);
  bad["q3_clarity"] = 5;
  EXPECT_EQ(svc.post_response(bad.dump()).status, 422);
  bad = answer(session, 0, "maybe");
  EXPECT_EQ(svc.post_response(bad.dump()).status, 422);
  bad = answer(session, 0);
  bad.erase("q3_creative");
  EXPECT_EQ(svc.post_response(bad.dump()).status, 422);
  EXPECT_EQ(svc.post_response("{not json").status, 400);

  bad = answer(session, 0);
  bad["session_id"] = "nope";
  EXPECT_EQ(svc.post_response(bad.dump()).status, 404);
  bad = answer(session, 0);
  bad["image_id"] = "ffffffffffffffff";
  EXPECT_EQ(svc.post_response(bad.dump()).status, 404);
  EXPECT_EQ(svc.get_image("ffffffffffffffff").status, 404);
  // Nothing was recorded.
  EXPECT_EQ(eval::read_csv(pools.dir / "responses.csv").size(), 0u);
}

TEST(SurveyService, DuplicatesAreIdempotentEditsAreRefused) {
  SurveyPools pools;
  SurveyService svc(pools.options());
  const auto session = json::parse(svc.get_test("dan", "en").body);
  const auto first = svc.post_response(answer(session, 0).dump());
  ASSERT_EQ(first.status, 200);
  const auto again = svc.post_response(answer(session, 0).dump());
  EXPECT_EQ(again.status, 200);
  EXPECT_EQ(again.body, first.body);
  EXPECT_EQ(svc.post_response(answer(session, 0, "computer").dump()).status, 409);
  EXPECT_EQ(eval::read_csv(pools.dir / "responses.csv").size(), 1u);
}

TEST(SurveyService, FullSessionYieldsValidCsv) {
  SurveyPools pools;
  SurveyService svc(pools.options());
  const auto r = svc.get_test("erin", "zh");
  const auto session = json::parse(r.body);
  std::vector<std::string> payloads{r.body};
  for (std::size_t i = 0; i < 18; ++i) {
    const auto img = svc.get_image(session["items"][i]["id"]);
    EXPECT_EQ(img.status, 200);
    EXPECT_EQ(img.content_type, "image/png");
    const auto ack = svc.post_response(answer(session, i, i % 2 ? "human" : "computer", 1 + int(i % 10)).dump());
    ASSERT_EQ(ack.status, 200) << ack.body;
    EXPECT_EQ(json::parse(ack.body)["remaining"], 17 - i);
    payloads.push_back(ack.body);
  }
  for (const auto& p : payloads) expect_no_source_leak(p);

  const auto rows = eval::parse_csv(slurp(pools.dir / "responses.csv"));
  ASSERT_EQ(rows.size(), 18u);
  for (auto s : eval::kAllSources)
    EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [&](const auto& x) { return x.source == s; }), 6);
  for (const auto& row : rows) {
    EXPECT_EQ(row.participant_id, "erin");
    EXPECT_EQ(row.native_lang, eval::Lang::zh);
    EXPECT_EQ(row.timestamp, "2024-05-01T12:00:00Z");
  }
  EXPECT_EQ(svc.export_csv().body, slurp(pools.dir / "responses.csv"));
  // The completed session feeds straight into the statistics.
  EXPECT_EQ(eval::build_report(rows).participants, 1u);
}

TEST(SurveyService, ReopensExistingCsvAndRejectsForeignHeader) {
  SurveyPools pools;
  {
    SurveyService svc(pools.options());
    const auto session = json::parse(svc.get_test("f", "en").body);
    svc.post_response(answer(session, 0).dump());
  }
  SurveyService again(pools.options());
  EXPECT_EQ(eval::read_csv(pools.dir / "responses.csv").size(), 1u);

  std::ofstream(pools.dir / "responses.csv") << "who,what\n";
  EXPECT_THROW(SurveyService(pools.options()), std::exception);
}
