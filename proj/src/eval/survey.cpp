#include "sapgan/eval/survey.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sapgan/errors.hpp"

namespace sapgan::eval {

// ---- enums -------------------------------------------------------------------

std::string_view lang_name(Lang l) {
  switch (l) {
    case Lang::zh: return "zh";
    case Lang::en: return "en";
    case Lang::other: return "other";
  }
  return "other";
}

std::string_view source_name(PaintingSource s) {
  switch (s) {
    case PaintingSource::human: return "human";
    case PaintingSource::baseline: return "baseline";
    case PaintingSource::sapgan: return "sapgan";
  }
  return "human";
}

std::string_view answer_name(Answer a) { return a == Answer::human ? "human" : "computer"; }

std::optional<Lang> parse_lang(std::string_view s) {
  if (s == "zh") return Lang::zh;
  if (s == "en") return Lang::en;
  if (s == "other") return Lang::other;
  return std::nullopt;
}

std::optional<PaintingSource> parse_painting_source(std::string_view s) {
  for (auto src : kAllSources)
    if (s == source_name(src)) return src;
  return std::nullopt;
}

std::optional<Answer> parse_answer(std::string_view s) {
  if (s == "human") return Answer::human;
  if (s == "computer") return Answer::computer;
  return std::nullopt;
}

void SurveyResponse::validate() const {
  if (participant_id.empty()) throw SchemaError("participant_id is empty");
  if (image_id.empty()) throw SchemaError("image_id is empty");
  if (q2_certainty < 1 || q2_certainty > 10)
    throw SchemaError("q2_certainty " + std::to_string(q2_certainty) + " outside 1..10");
  for (std::size_t c = 0; c < 4; ++c)
    if (q3[c] < 1 || q3[c] > 4)
      throw SchemaError("q3_" + std::string(kCategories[c]) + " " + std::to_string(q3[c]) + " outside 1..4");
}

// ---- CSV -------------------------------------------------------------------------

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits one logical record starting at `pos`; quoted fields may span lines.
std::vector<std::string> next_record(std::string_view text, std::size_t& pos, std::size_t& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          cur += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cur += c;
      }
      continue;
    }
    if (c == '"' && cur.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
      ++line;
      fields.push_back(std::move(cur));
      return fields;
    } else {
      cur += c;
    }
  }
  if (quoted) throw SchemaError("line " + std::to_string(line) + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

int parse_int(const std::string& s, std::string_view field, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw SchemaError("line " + std::to_string(line) + ": " + std::string(field) + " '" + s + "' is not an integer");
  return v;
}

}  // namespace

std::string to_csv_row(const SurveyResponse& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}", csv_field(r.participant_id), lang_name(r.native_lang),
                     csv_field(r.image_id), source_name(r.source), answer_name(r.q1), r.q2_certainty, r.q3[0],
                     r.q3[1], r.q3[2], r.q3[3], csv_field(r.timestamp));
}

std::string write_csv(std::span<const SurveyResponse> rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) out += to_csv_row(r) + '\n';
  return out;
}

std::vector<SurveyResponse> parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::size_t pos = 0;
  std::size_t line = 1;
  const auto header = next_record(text, pos, line);
  std::string joined;
  for (std::size_t i = 0; i < header.size(); ++i) joined += (i ? "," : "") + header[i];
  if (joined != kCsvHeader) throw SchemaError("CSV header mismatch: expected '" + std::string(kCsvHeader) + "', got '" + joined + "'");

  std::vector<SurveyResponse> rows;
  std::set<std::pair<std::string, std::string>> seen;
  while (pos < text.size()) {
    const std::size_t at = line;
    const auto f = next_record(text, pos, line);
    if (f.size() == 1 && f[0].empty()) continue;  // blank line
    if (f.size() != 11)
      throw SchemaError("line " + std::to_string(at) + ": expected 11 fields, got " + std::to_string(f.size()));
    SurveyResponse r;
    r.participant_id = f[0];
    auto lang = parse_lang(f[1]);
    if (!lang) throw SchemaError("line " + std::to_string(at) + ": native_lang '" + f[1] + "' not in {zh, en, other}");
    r.native_lang = *lang;
    r.image_id = f[2];
    auto src = parse_painting_source(f[3]);
    if (!src)
      throw SchemaError("line " + std::to_string(at) + ": unknown source tag '" + f[3] + "' (human, baseline, sapgan)");
    r.source = *src;
    auto q1 = parse_answer(f[4]);
    if (!q1) throw SchemaError("line " + std::to_string(at) + ": q1 '" + f[4] + "' not in {human, computer}");
    r.q1 = *q1;
    r.q2_certainty = parse_int(f[5], "q2_certainty", at);
    for (std::size_t c = 0; c < 4; ++c) r.q3[c] = parse_int(f[6 + c], "q3_" + std::string(kCategories[c]), at);
    r.timestamp = f[10];
    try {
      r.validate();
    } catch (const SchemaError& e) {
      throw SchemaError("line " + std::to_string(at) + ": " + e.what());
    }
    if (!seen.emplace(r.participant_id, r.image_id).second)
      throw SchemaError("line " + std::to_string(at) + ": duplicate response for participant '" + r.participant_id +
                        "' and image '" + r.image_id + "'");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SurveyResponse> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open response CSV " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_csv(ss.str());
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

// ---- exact averaging -----------------------------------------------------------

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Reduced fraction with overflow detection. Inputs here are counts, so the
// denominators stay small in practice; on overflow callers fall back to long double.
struct Rational {
  i128 num = 0;
  i128 den = 1;
  bool overflow = false;

  static Rational of(long long p, long long q) {
    Rational r{p, q, false};
    r.reduce();
    return r;
  }
  void reduce() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const i128 g = gcd128(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  Rational operator+(const Rational& o) const {
    Rational r;
    r.overflow = overflow || o.overflow;
    i128 a, b, d;
    if (r.overflow || __builtin_mul_overflow(num, o.den, &a) || __builtin_mul_overflow(o.num, den, &b) ||
        __builtin_add_overflow(a, b, &r.num) || __builtin_mul_overflow(den, o.den, &d)) {
      r.overflow = true;
      return r;
    }
    r.den = d;
    r.reduce();
    return r;
  }
  Rational operator-(const Rational& o) const { return *this + Rational{-o.num, o.den, o.overflow}; }
  Rational operator*(const Rational& o) const {
    Rational r;
    r.overflow = overflow || o.overflow;
    if (r.overflow || __builtin_mul_overflow(num, o.num, &r.num) || __builtin_mul_overflow(den, o.den, &r.den)) {
      r.overflow = true;
      return r;
    }
    r.reduce();
    return r;
  }
  Rational divided_by(long long n) const { return *this * Rational::of(1, n); }

  double to_double() const {
    constexpr i128 exact = i128{1} << 53;
    const i128 an = num < 0 ? -num : num;
    if (an < exact && den < exact) return static_cast<double>(num) / static_cast<double>(den);
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
  }
};

struct Fraction {
  long long hits;
  long long total;
};

// Mean and sample stddev of hits/total ratios, rounded once at the end.
void mean_and_stddev(const std::vector<Fraction>& xs, double& mean, double& stddev) {
  const long long n = static_cast<long long>(xs.size());
  mean = stddev = 0;
  if (n == 0) return;
  Rational sum, sum_sq;
  for (const auto& x : xs) {
    const Rational r = Rational::of(x.hits, x.total);
    sum = sum + r;
    sum_sq = sum_sq + r * r;
  }
  const Rational m = sum.divided_by(n);
  Rational var;
  if (n > 1) var = (sum_sq - sum * m).divided_by(n - 1);
  if (!m.overflow && !var.overflow) {
    mean = m.to_double();
    stddev = n > 1 ? std::sqrt(var.to_double()) : 0.0;
    return;
  }
  long double s = 0;
  for (const auto& x : xs) s += static_cast<long double>(x.hits) / static_cast<long double>(x.total);
  const long double lm = s / n;
  long double ss = 0;
  for (const auto& x : xs) {
    const long double d = static_cast<long double>(x.hits) / static_cast<long double>(x.total) - lm;
    ss += d * d;
  }
  mean = static_cast<double>(lm);
  stddev = n > 1 ? static_cast<double>(std::sqrt(ss / (n - 1))) : 0.0;
}

double exact_mean(const std::vector<Fraction>& xs) {
  double m, s;
  mean_and_stddev(xs, m, s);
  return m;
}

bool is_correct(const SurveyResponse& r) {
  return (r.source == PaintingSource::human) == (r.q1 == Answer::human);
}

}  // namespace

// ---- statistics ---------------------------------------------------------------------

std::vector<SourceFrequency> turing_frequency(std::span<const SurveyResponse> rows, Unit unit) {
  // source -> unit key -> (human answers, total)
  std::map<PaintingSource, std::map<std::string, Fraction>> tally;
  std::set<std::string> participants;
  for (const auto& r : rows) {
    r.validate();
    participants.insert(r.participant_id);
    auto& f = tally[r.source].try_emplace(unit == Unit::participant ? r.participant_id : r.image_id, Fraction{0, 0})
                  .first->second;
    f.hits += r.q1 == Answer::human ? 1 : 0;
    f.total += 1;
  }
  std::vector<SourceFrequency> out;
  for (auto src : kAllSources) {
    auto it = tally.find(src);
    if (it == tally.end()) continue;
    if (unit == Unit::participant)
      for (const auto& p : participants)
        if (!it->second.count(p))
          throw SchemaError("participant '" + p + "' has no responses for source " + std::string(source_name(src)));
    SourceFrequency sf;
    sf.source = src;
    std::vector<Fraction> xs;
    for (const auto& [key, f] : it->second) {
      xs.push_back(f);
      sf.values.push_back(static_cast<double>(f.hits) / static_cast<double>(f.total));
    }
    mean_and_stddev(xs, sf.mean, sf.stddev);
    sf.units = xs.size();
    sf.single_unit = xs.size() == 1;
    out.push_back(std::move(sf));
  }
  return out;
}

namespace {

struct CategorySums {
  std::array<long long, 4> sum{};
  long long count = 0;
};

std::map<PaintingSource, CategorySums> category_sums(std::span<const SurveyResponse> rows) {
  std::map<PaintingSource, CategorySums> sums;
  for (const auto& r : rows) {
    r.validate();
    auto& s = sums[r.source];
    for (std::size_t c = 0; c < 4; ++c) s.sum[c] += r.q3[c];
    ++s.count;
  }
  return sums;
}

}  // namespace

std::array<double, 4> human_category_means(std::span<const SurveyResponse> rows) {
  const auto sums = category_sums(rows);
  auto h = sums.find(PaintingSource::human);
  if (h == sums.end()) throw SchemaError("point distance needs human baseline rows; none found");
  std::array<double, 4> m{};
  for (std::size_t c = 0; c < 4; ++c) m[c] = Rational::of(h->second.sum[c], h->second.count).to_double();
  return m;
}

std::vector<PointDistance> point_distance(std::span<const SurveyResponse> rows) {
  const auto sums = category_sums(rows);
  auto h = sums.find(PaintingSource::human);
  if (h == sums.end()) throw SchemaError("point distance needs human baseline rows; none found");
  std::vector<PointDistance> out;
  for (const auto& [src, s] : sums) {
    if (src == PaintingSource::human) continue;
    PointDistance d;
    d.source = src;
    for (std::size_t c = 0; c < 4; ++c) {
      d.mean[c] = Rational::of(s.sum[c], s.count).to_double();
      // |S_s/n_s - S_h/n_h| = |S_s·n_h - S_h·n_s| / (n_s·n_h), integers throughout.
      const long long num = s.sum[c] * h->second.count - h->second.sum[c] * s.count;
      d.distance[c] = Rational::of(num < 0 ? -num : num, s.count * h->second.count).to_double();
    }
    out.push_back(d);
  }
  return out;
}

ScoreDistribution score_distribution(std::span<const SurveyResponse> rows) {
  std::map<std::string, ParticipantScore> by_id;
  for (const auto& r : rows) {
    r.validate();
    auto& p = by_id[r.participant_id];
    p.participant_id = r.participant_id;
    p.lang = r.native_lang;
    p.correct += is_correct(r) ? 1 : 0;
    p.total += 1;
  }
  ScoreDistribution out;
  std::vector<Fraction> all;
  std::map<Lang, std::vector<Fraction>> per_lang;
  for (auto& [id, p] : by_id) {
    p.accuracy = static_cast<double>(p.correct) / static_cast<double>(p.total);
    const Fraction f{static_cast<long long>(p.correct), static_cast<long long>(p.total)};
    all.push_back(f);
    per_lang[p.lang].push_back(f);
    out.participants.push_back(p);
  }
  out.mean = exact_mean(all);
  for (const auto& [lang, fs] : per_lang) out.mean_by_lang[lang] = exact_mean(fs);
  return out;
}

// ---- report ---------------------------------------------------------------------------

namespace {

Comparison compare(std::string label, const std::vector<double>& a, const std::vector<double>& b) {
  Comparison c;
  c.label = std::move(label);
  if (a.size() < 2 || b.size() < 2) {
    c.note = "insufficient data (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " units)";
    return c;
  }
  try {
    c.test = t_test_two_tailed(a, b);
  } catch (const std::domain_error& e) {
    c.note = e.what();
  }
  return c;
}

}  // namespace

TuringReport build_report(std::span<const SurveyResponse> rows, Unit unit) {
  TuringReport rep;
  rep.unit = unit;
  rep.rows = rows.size();
  rep.frequencies = turing_frequency(rows, unit);
  rep.scores = score_distribution(rows);
  rep.participants = rep.scores.participants.size();
  bool has_human = false;
  for (const auto& r : rows) has_human = has_human || r.source == PaintingSource::human;
  if (has_human) {
    rep.human_means = human_category_means(rows);
    rep.distances = point_distance(rows);
  }

  const std::vector<double>* sap = nullptr;
  const std::vector<double>* base = nullptr;
  for (const auto& f : rep.frequencies) {
    if (f.source == PaintingSource::sapgan) sap = &f.values;
    if (f.source == PaintingSource::baseline) base = &f.values;
  }
  if (sap && base) rep.comparisons.push_back(compare("mistaken-for-human: sapgan vs baseline", *sap, *base));

  std::vector<double> zh, en;
  for (const auto& p : rep.scores.participants) {
    if (p.lang == Lang::zh) zh.push_back(p.accuracy);
    if (p.lang == Lang::en) en.push_back(p.accuracy);
  }
  if (!zh.empty() || !en.empty()) rep.comparisons.push_back(compare("accuracy: zh vs en", zh, en));
  return rep;
}

nlohmann::json to_json(const TuringReport& r) {
  using nlohmann::json;
  json j;
  j["unit"] = r.unit == Unit::participant ? "participant" : "painting";
  j["rows"] = r.rows;
  j["participants"] = r.participants;
  json freq = json::array();
  for (const auto& f : r.frequencies)
    freq.push_back({{"source", source_name(f.source)},
                    {"mean", f.mean},
                    {"stddev", f.stddev},
                    {"units", f.units},
                    {"stddev_undefined", f.single_unit}});
  j["mistaken_for_human"] = freq;
  json dist = json::array();
  for (const auto& d : r.distances) {
    json e{{"source", source_name(d.source)}};
    for (std::size_t c = 0; c < 4; ++c) {
      e["distance"][std::string(kCategories[c])] = d.distance[c];
      e["mean"][std::string(kCategories[c])] = d.mean[c];
    }
    dist.push_back(e);
  }
  j["point_distance"] = dist;
  if (!r.distances.empty())
    for (std::size_t c = 0; c < 4; ++c) j["human_means"][std::string(kCategories[c])] = r.human_means[c];
  json parts = json::array();
  for (const auto& p : r.scores.participants)
    parts.push_back({{"participant_id", p.participant_id},
                     {"native_lang", lang_name(p.lang)},
                     {"correct", p.correct},
                     {"total", p.total},
                     {"accuracy", p.accuracy}});
  j["accuracy"]["participants"] = parts;
  j["accuracy"]["mean"] = r.scores.mean;
  for (const auto& [lang, m] : r.scores.mean_by_lang) j["accuracy"]["mean_by_lang"][std::string(lang_name(lang))] = m;
  json cmp = json::array();
  for (const auto& c : r.comparisons) {
    json e{{"label", c.label}};
    if (c.test) {
      e["t"] = c.test->t;
      e["df"] = c.test->df;
      e["p"] = c.test->p;
    } else {
      e["note"] = c.note;
    }
    cmp.push_back(e);
  }
  j["comparisons"] = cmp;
  return j;
}

std::string to_text(const TuringReport& r) {
  std::string out;
  out += fmt::format("Visual Turing Test: {} rows, {} participants (spread over {}s)\n\n", r.rows, r.participants,
                     r.unit == Unit::participant ? "participant" : "painting");
  out += "Frequency mistaken for human\n";
  out += fmt::format("  {:<10} {:>8} {:>8} {:>6}\n", "source", "mean", "stddev", "n");
  for (const auto& f : r.frequencies)
    out += fmt::format("  {:<10} {:>8.3f} {:>8.3f} {:>6}{}\n", source_name(f.source), f.mean, f.stddev, f.units,
                       f.single_unit ? "  (stddev undefined)" : "");
  if (!r.distances.empty()) {
    out += "\nAverage point distance from human paintings (4-point scale)\n";
    out += fmt::format("  {:<10}", "source");
    for (auto c : kCategories) out += fmt::format(" {:>12}", c);
    out += '\n';
    for (const auto& d : r.distances) {
      out += fmt::format("  {:<10}", source_name(d.source));
      for (double v : d.distance) out += fmt::format(" {:>12.3f}", v);
      out += '\n';
    }
  }
  out += fmt::format("\nAccuracy: mean {:.3f} over {} participants\n", r.scores.mean, r.scores.participants.size());
  for (const auto& [lang, m] : r.scores.mean_by_lang) out += fmt::format("  {:<6} {:.3f}\n", lang_name(lang), m);
  if (!r.comparisons.empty()) {
    out += "\nTwo-tailed Student t-tests\n";
    for (const auto& c : r.comparisons) {
      if (c.test)
        out += fmt::format("  {}: t = {:.4f}, df = {}, p = {:.4g}\n", c.label, c.test->t, c.test->df, c.test->p);
      else
        out += fmt::format("  {}: {}\n", c.label, c.note);
    }
  }
  return out;
}

}  // namespace sapgan::eval
