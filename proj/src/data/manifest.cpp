#include "sapgan/data/manifest.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "sapgan/data/image_io.hpp"
#include "sapgan/data/preprocess.hpp"
#include "sapgan/errors.hpp"

namespace sapgan::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<Source, std::string_view>, 6> kSourceNames{{
    {Source::smithsonian, "smithsonian"},
    {Source::harvard, "harvard"},
    {Source::princeton, "princeton"},
    {Source::met, "met"},
    {Source::synthetic, "synthetic"},
    {Source::other, "other"},
}};

std::string sanitize(std::string s) {
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string_view source_name(Source s) {
  for (const auto& [src, name] : kSourceNames)
    if (src == s) return name;
  return "other";
}

std::optional<Source> parse_source(std::string_view name) {
  for (const auto& [src, n] : kSourceNames)
    if (n == name) return src;
  return std::nullopt;
}

Source source_from_dir(std::string_view dir_name) {
  std::string lower(dir_name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "metropolitan") return Source::met;
  return parse_source(lower).value_or(Source::other);
}

DatasetManifest build_manifest(const fs::path& painting_dir, const fs::path& out_dir, const PreprocessOptions& opts) {
  opts.edges.validate();
  if (!fs::is_directory(painting_dir)) throw IoError("painting directory does not exist: " + painting_dir.string());

  // (collection label, file) pairs; loose files at the top level form the "other" collection.
  std::vector<std::pair<std::string, fs::path>> inputs;
  for (const auto& f : sorted_images(painting_dir)) inputs.emplace_back("other", f);
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(painting_dir))
    if (e.is_directory()) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) {
    const std::string label = d.filename().string();
    if (!opts.sources.empty() && std::find(opts.sources.begin(), opts.sources.end(), label) == opts.sources.end())
      continue;
    for (const auto& f : sorted_images(d)) inputs.emplace_back(label, f);
  }
  if (!opts.sources.empty()) {
    std::erase_if(inputs, [&](const auto& in) {
      return std::find(opts.sources.begin(), opts.sources.end(), in.first) == opts.sources.end();
    });
  }

  DatasetManifest manifest;
  manifest.tile_size = opts.tile;
  manifest.root = out_dir;
  fs::create_directories(out_dir / "paintings");
  fs::create_directories(out_dir / "edges");
  std::set<std::string> used_ids;

  for (const auto& [label, file] : inputs) {
    std::vector<RawImage> tiles;
    try {
      tiles = preprocess_painting(load_image(file), opts.tile, opts.ratio_threshold);
    } catch (const std::exception& e) {
      spdlog::warn("skipping {}: {}", file.string(), e.what());
      continue;
    }
    const Source source = source_from_dir(label);
    const std::string stem = sanitize(label) + "__" + sanitize(file.stem().string());
    for (std::size_t t = 0; t < tiles.size(); ++t) {
      std::string id = stem + "__t" + std::to_string(t);
      for (std::size_t dup = 1; used_ids.count(id); ++dup) id = stem + "_" + std::to_string(dup) + "__t" + std::to_string(t);
      used_ids.insert(id);
      ImageRecord rec{id, source, fs::path("paintings") / (id + ".png"), fs::path("edges") / (id + ".png"), t,
                      label + "/" + file.filename().string()};
      save_image(tiles[t], manifest.painting_path(rec));
      save_image(edge_map(tiles[t], opts.edges), manifest.edge_path(rec));
      manifest.counts_by_source[std::string(source_name(source))] += 1;
      manifest.records.push_back(std::move(rec));
    }
  }
  if (manifest.records.empty()) throw IoError("no usable images found under " + painting_dir.string());
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

json to_json(const DatasetManifest& m) {
  json records = json::array();
  for (const auto& r : m.records)
    records.push_back({{"id", r.id},
                       {"source", source_name(r.source)},
                       {"painting", r.painting.generic_string()},
                       {"edge", r.edge.generic_string()},
                       {"tile_index", r.tile_index},
                       {"original_id", r.original_id}});
  return {{"records", records}, {"tile_size", m.tile_size}, {"counts_by_source", m.counts_by_source}};
}

DatasetManifest manifest_from_json(const json& j, const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  m.tile_size = j.at("tile_size").get<std::size_t>();
  m.counts_by_source = j.at("counts_by_source").get<std::map<std::string, std::size_t>>();
  for (const auto& r : j.at("records")) {
    const auto src_name = r.at("source").get<std::string>();
    auto src = parse_source(src_name);
    if (!src) throw IoError("manifest record has unknown source '" + src_name + "'");
    m.records.push_back({r.at("id").get<std::string>(), *src, fs::path(r.at("painting").get<std::string>()),
                         fs::path(r.at("edge").get<std::string>()), r.at("tile_index").get<std::size_t>(),
                         r.at("original_id").get<std::string>()});
  }
  std::size_t total = 0;
  for (const auto& [_, c] : m.counts_by_source) total += c;
  if (total != m.records.size())
    throw IoError("manifest counts_by_source sums to " + std::to_string(total) + " but lists " +
                  std::to_string(m.records.size()) + " records");
  return m;
}

void save_manifest(const DatasetManifest& m, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw IoError("cannot write manifest: " + path.string());
  os << to_json(m).dump(2) << '\n';
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path.string());
  json j;
  try {
    is >> j;
    return manifest_from_json(j, path.parent_path());
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace sapgan::data
