#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sapgan/data/edges.hpp"
#include "sapgan/data/image.hpp"

namespace sapgan::data {

enum class Source { smithsonian, harvard, princeton, met, synthetic, other };

std::string_view source_name(Source s);
/// Maps a collection directory name to its source; unknown names map to `other`.
Source source_from_dir(std::string_view dir_name);
std::optional<Source> parse_source(std::string_view name);

struct ImageRecord {
  std::string id;
  Source source = Source::other;
  std::filesystem::path painting;  // relative to the manifest directory
  std::filesystem::path edge;
  std::size_t tile_index = 0;
  std::string original_id;
};

struct DatasetManifest {
  std::vector<ImageRecord> records;
  std::size_t tile_size = 0;
  std::map<std::string, std::size_t> counts_by_source;
  std::filesystem::path root;  // directory the relative paths resolve against; not serialized

  std::filesystem::path painting_path(const ImageRecord& r) const { return root / r.painting; }
  std::filesystem::path edge_path(const ImageRecord& r) const { return root / r.edge; }
};

struct PreprocessOptions {
  std::size_t tile = 64;
  double ratio_threshold = 1.5;
  EdgeParams edges;
  std::vector<std::string> sources;  // collection subdirectories to include; empty = all
};

/// Tiles and edge-maps every image under `painting_dir` (optionally grouped in
/// per-source subdirectories), writes tiles to `out_dir`/paintings and
/// `out_dir`/edges, and writes `out_dir`/manifest.json. Undecodable or
/// undersized images are logged and skipped; an empty result throws IoError.
DatasetManifest build_manifest(const std::filesystem::path& painting_dir, const std::filesystem::path& out_dir,
                               const PreprocessOptions& opts);

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& root);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace sapgan::data
