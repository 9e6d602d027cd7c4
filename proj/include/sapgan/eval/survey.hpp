#pragma once

// Visual Turing Test responses: CSV schema plus the summary statistics
// (mistaken-for-human frequency, qualitative point distance, accuracy).

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sapgan/eval/ttest.hpp"

namespace sapgan::eval {

enum class Lang { zh, en, other };
enum class PaintingSource { human, baseline, sapgan };
enum class Answer { human, computer };

inline constexpr std::array<PaintingSource, 3> kAllSources{PaintingSource::human, PaintingSource::baseline,
                                                           PaintingSource::sapgan};
inline constexpr std::array<std::string_view, 4> kCategories{"aesthetic", "composition", "clarity", "creative"};

std::string_view lang_name(Lang l);
std::string_view source_name(PaintingSource s);
std::string_view answer_name(Answer a);
std::optional<Lang> parse_lang(std::string_view s);
std::optional<PaintingSource> parse_painting_source(std::string_view s);
std::optional<Answer> parse_answer(std::string_view s);

struct SurveyResponse {
  std::string participant_id;
  Lang native_lang = Lang::other;
  std::string image_id;
  PaintingSource source = PaintingSource::human;
  Answer q1 = Answer::human;
  int q2_certainty = 1;          // 1..10
  std::array<int, 4> q3{1, 1, 1, 1};  // aesthetic, composition, clarity, creative; 1 = Disagree .. 4 = Agree
  std::string timestamp;

  /// Throws SchemaError naming the offending field.
  void validate() const;
  friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

inline constexpr std::string_view kCsvHeader =
    "participant_id,native_lang,image_id,source,q1,q2_certainty,q3_aesthetic,q3_composition,q3_clarity,q3_creative,"
    "timestamp";

std::string to_csv_row(const SurveyResponse& r);
/// Parses a full CSV document (header required, exact). Validates ranges and
/// (participant_id, image_id) uniqueness; errors carry the line number.
std::vector<SurveyResponse> parse_csv(std::string_view text);
std::vector<SurveyResponse> read_csv(const std::filesystem::path& path);
std::string write_csv(std::span<const SurveyResponse> rows);

/// Unit over which Table-2-style spread is computed.
enum class Unit { participant, painting };

struct SourceFrequency {
  PaintingSource source;
  double mean = 0;
  double stddev = 0;
  std::size_t units = 0;         // participants (or paintings) contributing
  bool single_unit = false;      // stddev undefined, reported as 0
  std::vector<double> values;    // per-unit fractions, sorted by unit key
};

/// Fraction answered "human", averaged over units. Sources with no rows are omitted.
std::vector<SourceFrequency> turing_frequency(std::span<const SurveyResponse> rows, Unit unit = Unit::participant);

struct PointDistance {
  PaintingSource source;
  std::array<double, 4> mean{};      // per-category mean rating of this source
  std::array<double, 4> distance{};  // |mean - human mean|
};

/// One entry per non-human source present. Throws SchemaError without human rows.
std::vector<PointDistance> point_distance(std::span<const SurveyResponse> rows);
/// Human per-category means.
std::array<double, 4> human_category_means(std::span<const SurveyResponse> rows);

struct ParticipantScore {
  std::string participant_id;
  Lang lang = Lang::other;
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0;
};

struct ScoreDistribution {
  std::vector<ParticipantScore> participants;  // sorted by id
  double mean = 0;
  std::map<Lang, double> mean_by_lang;
};

ScoreDistribution score_distribution(std::span<const SurveyResponse> rows);

struct Comparison {
  std::string label;
  std::optional<TTestResult> test;  // empty when a group is too small or degenerate
  std::string note;
};

struct TuringReport {
  Unit unit = Unit::participant;
  std::size_t rows = 0;
  std::size_t participants = 0;
  std::vector<SourceFrequency> frequencies;
  std::array<double, 4> human_means{};
  std::vector<PointDistance> distances;
  ScoreDistribution scores;
  std::vector<Comparison> comparisons;
};

TuringReport build_report(std::span<const SurveyResponse> rows, Unit unit = Unit::participant);
nlohmann::json to_json(const TuringReport& r);
std::string to_text(const TuringReport& r);

}  // namespace sapgan::eval
