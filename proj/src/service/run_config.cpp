#include "sapgan/service/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "sapgan/errors.hpp"

namespace sapgan::service {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigEntries parse_run_config(std::string_view text) {
  ConfigEntries out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value, got '" +
                                  std::string(line) + "'");
    auto key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.remove_prefix(1);
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    if (key == "config") throw std::invalid_argument("config line " + std::to_string(line_no) + ": nested config files are not supported");
    if (!seen.insert(std::string(key)).second)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": key '" + std::string(key) +
                                  "' repeated");
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

ConfigEntries load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::vector<std::string> expand_run_config(std::vector<std::string> args,
                                           std::span<const std::string_view> subcommands) {
  std::optional<std::filesystem::path> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config requires a path");
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!config) return args;
  std::size_t sub = 0;
  const auto is_subcommand = [&](const std::string& a) {
    if (subcommands.empty()) return !a.empty() && a.front() != '-';
    return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
  };
  while (sub < args.size() && !is_subcommand(args[sub])) ++sub;
  if (sub == args.size()) throw std::invalid_argument("--config given without a subcommand");
  std::vector<std::string> injected;
  for (const auto& [k, v] : load_run_config(*config)) injected.push_back("--" + k + "=" + v);
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub) + 1, injected.begin(), injected.end());
  return args;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace sapgan::service
