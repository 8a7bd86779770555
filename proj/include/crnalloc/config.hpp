#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "crnalloc/scenario.hpp"

namespace crnalloc {

/// Flat `key = value` scenario files. Lines starting with '#' are comments,
/// list values are comma separated. Every key is optional; missing keys keep
/// the value of the base config. See docs/config.md for the schema.
ScenarioConfig parse_config(std::string_view text, const ScenarioConfig& base = reference_scenario());
ScenarioConfig load_config(const std::filesystem::path& path, const ScenarioConfig& base = reference_scenario());

/// Sets one key. Throws ConfigError for unknown keys and unparsable values.
void apply_override(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// Splits "key=value" and applies it.
void apply_override(ScenarioConfig& cfg, std::string_view assignment);

/// Every recognized key, in canonical order.
const std::vector<std::string>& config_keys();

/// Canonical text: all keys in canonical order, shortest round-trip numbers.
/// parse_config(to_config_text(c)) == c.
std::string to_config_text(const ScenarioConfig& cfg);

/// FNV-1a over the canonical text.
std::uint64_t config_fingerprint(const ScenarioConfig& cfg);

std::string_view to_string(RateMode mode);
std::string_view to_string(CsiMode mode);
std::string_view to_string(ConstraintMode mode);

}  // namespace crnalloc
