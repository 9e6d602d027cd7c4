#pragma once

// Flat key=value run configuration. Each key mirrors a long CLI flag of the
// chosen subcommand; the entries are spliced into argv ahead of the real
// flags, so anything given on the command line wins.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sapgan::service {

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Blank lines and lines starting with '#' are ignored; keys may be written
/// with or without a leading "--". Throws std::invalid_argument with the line
/// number on malformed input or a repeated key.
ConfigEntries parse_run_config(std::string_view text);
ConfigEntries load_run_config(const std::filesystem::path& path);

/// Removes "--config <path>" / "--config=<path>" from args and, if present,
/// inserts the file's entries as "--key=value" right after the subcommand.
/// The subcommand is the first argument found in `subcommands`; with an empty
/// list it is the first argument not starting with '-', which misreads the
/// value of a global option such as "--log-level warn".
std::vector<std::string> expand_run_config(std::vector<std::string> args,
                                           std::span<const std::string_view> subcommands = {});

/// 64-bit FNV-1a, printed in hex for reproducibility logs.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace sapgan::service
