#pragma once

// Run configuration for the command-line front end.
//
// Text format: one `key = value` per line, `#` comments, optional `[command]`
// section (same as top level) and a `[sweep]` section whose keys are swept
// parameters with values `a, b, c` or `linspace(start, stop, count)`.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace efilt {

inline constexpr const char* kVersion = "0.1.0";

enum class OutputFormat { csv, json };

struct SweepAxis {
  std::string name;
  std::vector<std::string> values;  // normalized
};

struct RunConfig {
  std::string command;
  /// Normalized command parameters with defaults filled in. For `sweep` this
  /// holds `target` and the target's parameters.
  std::map<std::string, std::string> params;
  std::vector<SweepAxis> sweep;
  std::uint64_t seed = 1;
  std::size_t trials = 0;
  std::size_t workers = 1;
  OutputFormat format = OutputFormat::csv;
  std::string output;
};

/// Command names accepted by the front end.
const std::vector<std::string>& command_names();

/// Parses config text, then `overrides` (each `key=value`, applied after the
/// text in order), then the positional `command` if given. Throws ConfigError
/// naming the offending line for unknown keys, missing required keys and
/// out-of-domain values.
RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {},
                       const std::optional<std::string>& command = std::nullopt);

/// Canonical text form; parse_config(serialize(c)) reproduces c.
std::string serialize(const RunConfig& cfg);

/// FNV-1a 64 of the canonical form without the output path, as 0x-prefixed hex.
std::string config_hash(const RunConfig& cfg);

/// Re-validates a parameter map for `command` (used for sweep points).
std::map<std::string, std::string> normalize_params(const std::string& command,
                                                    const std::map<std::string, std::string>& raw);

/// Typed access to normalized parameters. Throw ConfigError when missing.
bool has(const std::map<std::string, std::string>& p, const std::string& key);
double get_real(const std::map<std::string, std::string>& p, const std::string& key);
std::size_t get_size(const std::map<std::string, std::string>& p, const std::string& key);
bool get_bool(const std::map<std::string, std::string>& p, const std::string& key);
std::string get_text(const std::map<std::string, std::string>& p, const std::string& key);
std::vector<double> get_real_list(const std::map<std::string, std::string>& p, const std::string& key);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

}  // namespace efilt
