#include "sapgan/service/survey_service.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sapgan/data/image_io.hpp"
#include "sapgan/errors.hpp"
#include "sapgan/service/run_config.hpp"

namespace sapgan::service {

using nlohmann::json;
using eval::PaintingSource;

namespace {

HttpResult json_result(int status, const json& j) { return {status, "application/json", j.dump()}; }

HttpResult error(int status, const std::string& message) { return json_result(status, {{"error", message}}); }

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SurveyService::SurveyService(SurveyOptions opts) : opts_(std::move(opts)), rng_(opts_.seed) {
  if (!opts_.clock) opts_.clock = utc_now;
  if (opts_.items_per_source == 0) throw std::invalid_argument("items_per_source must be >= 1");
  for (auto src : eval::kAllSources) {
    const auto& dir = opts_.pools[static_cast<std::size_t>(src)];
    if (!std::filesystem::is_directory(dir))
      throw IoError("image pool for " + std::string(eval::source_name(src)) + " is not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && data::is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      // Hash of pool slot + file name: stable across restarts, opaque to clients.
      const std::string key = std::to_string(static_cast<int>(src)) + "/" + f.filename().string();
      std::string id = hex64(fnv1a64(key));
      if (by_id_.count(id)) throw std::runtime_error("image id collision for " + f.string());
      by_id_[id] = images_.size();
      pool_index_[static_cast<std::size_t>(src)].push_back(images_.size());
      images_.push_back({id, src, f});
    }
  }

  const auto& csv = opts_.csv_path;
  if (csv.empty()) throw std::invalid_argument("response CSV path is required");
  if (!std::filesystem::exists(csv) || std::filesystem::file_size(csv) == 0) {
    if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
    std::ofstream out(csv, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create response CSV " + csv.string());
    out << eval::kCsvHeader << '\n';
  } else {
    std::ifstream in(csv, std::ios::binary);
    std::string first;
    std::getline(in, first);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != eval::kCsvHeader) throw SchemaError("existing response CSV " + csv.string() + " has a foreign header");
  }
  spdlog::info("survey pools: human {}, baseline {}, sapgan {}; responses -> {}", pool_index_[0].size(),
               pool_index_[1].size(), pool_index_[2].size(), csv.string());
}

std::size_t SurveyService::pool_size(PaintingSource s) const { return pool_index_[static_cast<std::size_t>(s)].size(); }

HttpResult SurveyService::get_test(const std::string& participant, const std::string& lang) {
  if (participant.empty()) return error(400, "query parameter 'participant' is required");
  const auto parsed_lang = lang.empty() ? std::optional<eval::Lang>(eval::Lang::other) : eval::parse_lang(lang);
  if (!parsed_lang) return error(422, "lang must be one of zh, en, other");

  const std::size_t k = opts_.items_per_source;
  if (std::any_of(pool_index_.begin(), pool_index_.end(), [&](const auto& p) { return p.size() < k; })) {
    json counts;
    for (auto src : eval::kAllSources) counts[std::string(eval::source_name(src))] = pool_size(src);
    return json_result(409, {{"error", "image pool too small"}, {"required_per_pool", k}, {"pool_counts", counts}});
  }

  std::lock_guard lock(mu_);
  Rng r = rng_.split(sessions_created_++);
  Session s;
  s.participant_id = participant;
  s.lang = *parsed_lang;
  for (auto src : eval::kAllSources) {
    auto idx = pool_index_[static_cast<std::size_t>(src)];
    r.shuffle(idx.begin(), idx.end());
    for (std::size_t i = 0; i < k; ++i) s.items.push_back({images_[idx[i]].id, src});
  }
  r.shuffle(s.items.begin(), s.items.end());
  std::string session_id;
  do session_id = hex64(r.next_u64());
  while (sessions_.count(session_id));

  json items = json::array();
  for (std::size_t i = 0; i < s.items.size(); ++i)
    items.push_back({{"index", i}, {"id", s.items[i].image_id}, {"url", "/api/images/" + s.items[i].image_id}});
  json body{{"session_id", session_id},
            {"participant_id", participant},
            {"native_lang", eval::lang_name(*parsed_lang)},
            {"count", s.items.size()},
            {"items", items}};
  sessions_.emplace(session_id, std::move(s));
  return json_result(200, body);
}

HttpResult SurveyService::get_image(const std::string& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return error(404, "unknown image id");
  const auto& img = images_[it->second];
  try {
    auto bytes = read_bytes(img.path);
    if (bytes.size() >= 8 && bytes.compare(0, 8, "\x89PNG\r\n\x1a\n") == 0) return {200, "image/png", std::move(bytes)};
    const auto png = data::encode_png(data::load_image(img.path));
    return {200, "image/png", std::string(png.begin(), png.end())};
  } catch (const std::exception& e) {
    spdlog::error("serving image {}: {}", id, e.what());
    return error(500, "image could not be read");
  }
}

HttpResult SurveyService::post_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    return error(400, "request body is not valid JSON");
  }
  if (!j.is_object()) return error(400, "request body must be a JSON object");

  auto str_field = [&](const char* name) -> std::optional<std::string> {
    if (!j.contains(name) || !j[name].is_string()) return std::nullopt;
    return j[name].get<std::string>();
  };
  const auto session_id = str_field("session_id");
  const auto image_id = str_field("image_id");
  if (!session_id || !image_id) return error(422, "session_id and image_id must be strings");

  std::lock_guard lock(mu_);
  auto sit = sessions_.find(*session_id);
  if (sit == sessions_.end()) return error(404, "unknown session");
  Session& s = sit->second;
  auto item = std::find_if(s.items.begin(), s.items.end(), [&](const Item& i) { return i.image_id == *image_id; });
  if (item == s.items.end()) return error(404, "image is not part of this session");

  eval::SurveyResponse row;
  row.participant_id = s.participant_id;
  row.native_lang = s.lang;
  row.image_id = *image_id;
  row.source = item->source;
  const auto q1 = str_field("q1");
  if (!q1 || !eval::parse_answer(*q1)) return error(422, "q1 must be \"human\" or \"computer\"");
  row.q1 = *eval::parse_answer(*q1);
  auto int_field = [&](const std::string& name, int& out) {
    if (!j.contains(name) || !j[name].is_number_integer()) return false;
    const auto v = j[name].get<long long>();
    if (v < -1000 || v > 1000) return false;
    out = static_cast<int>(v);
    return true;
  };
  if (!int_field("q2_certainty", row.q2_certainty)) return error(422, "q2_certainty must be an integer");
  for (std::size_t c = 0; c < 4; ++c)
    if (!int_field("q3_" + std::string(eval::kCategories[c]), row.q3[c]))
      return error(422, "q3_" + std::string(eval::kCategories[c]) + " must be an integer");
  try {
    row.validate();
  } catch (const SchemaError& e) {
    return error(422, e.what());
  }

  if (auto prev = s.answered.find(*image_id); prev != s.answered.end()) {
    const auto& old = prev->second.first;
    if (old.q1 == row.q1 && old.q2_certainty == row.q2_certainty && old.q3 == row.q3)
      return {200, "application/json", prev->second.second};
    return error(409, "item already answered; answers cannot be edited");
  }

  row.timestamp = opts_.clock();
  append_row(row);
  const std::size_t answered = s.answered.size() + 1;
  const std::string ack = json{{"ok", true},
                               {"session_id", *session_id},
                               {"image_id", *image_id},
                               {"answered", answered},
                               {"remaining", s.items.size() - answered}}
                              .dump();
  s.answered.emplace(*image_id, std::make_pair(row, ack));
  return {200, "application/json", ack};
}

void SurveyService::append_row(const eval::SurveyResponse& row) {
  // Called with mu_ held: the single writer keeps rows whole.
  std::ofstream out(opts_.csv_path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + opts_.csv_path.string());
  out << eval::to_csv_row(row) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for " + opts_.csv_path.string());
}

HttpResult SurveyService::export_csv() const {
  std::lock_guard lock(mu_);
  return {200, "text/csv; charset=utf-8", read_bytes(opts_.csv_path)};
}

std::optional<std::vector<PaintingSource>> SurveyService::session_sources(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  std::vector<PaintingSource> out;
  for (const auto& i : it->second.items) out.push_back(i.source);
  return out;
}

}  // namespace sapgan::service
