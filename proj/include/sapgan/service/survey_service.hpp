#pragma once

// Transport-independent core of the Visual Turing Test server. Each handler
// returns a complete HTTP result so it can be exercised without sockets.

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sapgan/eval/survey.hpp"
#include "sapgan/tensor/rng.hpp"

namespace sapgan::service {

struct HttpResult {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct SurveyOptions {
  /// Image directories indexed by eval::PaintingSource (human, baseline, sapgan).
  std::array<std::filesystem::path, 3> pools;
  std::filesystem::path csv_path;
  std::uint64_t seed = 0;
  std::size_t items_per_source = 6;
  /// Timestamp source; defaults to UTC wall clock in ISO-8601.
  std::function<std::string()> clock;
};

struct PoolImage {
  std::string id;  // opaque; never derived in a way the client can invert to a source
  eval::PaintingSource source;
  std::filesystem::path path;
};

class SurveyService {
 public:
  /// Scans the pools and creates (or validates the header of) the CSV.
  explicit SurveyService(SurveyOptions opts);

  /// GET /api/test?participant=..&lang=..
  HttpResult get_test(const std::string& participant, const std::string& lang);
  /// GET /api/images/{id}
  HttpResult get_image(const std::string& id) const;
  /// POST /api/response with a JSON body.
  HttpResult post_response(const std::string& body);
  /// GET /api/export.csv
  HttpResult export_csv() const;

  std::size_t pool_size(eval::PaintingSource s) const;
  /// Server-side audit of a session's hidden sources, in presentation order.
  std::optional<std::vector<eval::PaintingSource>> session_sources(const std::string& session_id) const;

 private:
  struct Item {
    std::string image_id;
    eval::PaintingSource source;
  };
  struct Session {
    std::string participant_id;
    eval::Lang lang;
    std::vector<Item> items;
    std::map<std::string, std::pair<eval::SurveyResponse, std::string>> answered;  // image id -> (row, ack)
  };

  void append_row(const eval::SurveyResponse& row);

  SurveyOptions opts_;
  std::vector<PoolImage> images_;
  std::map<std::string, std::size_t> by_id_;
  std::array<std::vector<std::size_t>, 3> pool_index_;
  Rng rng_;
  std::uint64_t sessions_created_ = 0;
  std::map<std::string, Session> sessions_;
  mutable std::mutex mu_;
};

}  // namespace sapgan::service
