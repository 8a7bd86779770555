#include "crnalloc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "crnalloc/csv.hpp"

namespace crnalloc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " +
                    std::string(expected) + ")");
}

double parse_double(std::string_view key, std::string_view value) {
  value = trim(value);
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "a number");
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  value = trim(value);
  Int out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "an integer");
  return out;
}

std::vector<double> parse_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  value = trim(value);
  if (value.empty()) bad_value(key, value, "a comma-separated list of numbers");
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_double(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
  return out;
}

std::string_view to_string(DirectGainSource::Kind kind) {
  switch (kind) {
    case DirectGainSource::Kind::uniform: return "uniform";
    case DirectGainSource::Kind::constant: return "constant";
    case DirectGainSource::Kind::list: return "list";
  }
  return "uniform";
}

}  // namespace

std::string_view to_string(RateMode mode) { return mode == RateMode::continuous ? "continuous" : "discrete"; }
std::string_view to_string(CsiMode mode) { return mode == CsiMode::perfect ? "perfect" : "imperfect"; }
std::string_view to_string(ConstraintMode mode) {
  return mode == ConstraintMode::deterministic ? "deterministic" : "probabilistic";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "users",           "primaries",          "subcarriers",       "seed",
      "power.total_w",   "interference.limit_w", "interference.collision_prob", "interference.mode",
      "ber.target",      "rate.mode",          "noise.bandwidth_hz", "noise.psd_dbm_hz",
      "noise.primary_w", "direct.mean_source", "direct.mean_seed",  "direct.mean",
      "direct.means",    "cross.mean_re",      "cross.mean_im",     "cross.var",
      "csi.mode",        "csi.error_var",      "csi.rho",
  };
  return keys;
}

void apply_override(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "users") {
    cfg.num_users = parse_int<int>(key, value);
  } else if (key == "primaries") {
    cfg.num_primaries = parse_int<int>(key, value);
  } else if (key == "subcarriers") {
    cfg.num_subcarriers = parse_int<int>(key, value);
  } else if (key == "seed") {
    cfg.rng_seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "power.total_w") {
    cfg.total_power_w = parse_double(key, value);
  } else if (key == "interference.limit_w") {
    cfg.interference_limits_w = parse_list(key, value);
  } else if (key == "interference.collision_prob") {
    cfg.collision_limits = parse_list(key, value);
  } else if (key == "interference.mode") {
    if (value == "deterministic") cfg.constraint_mode = ConstraintMode::deterministic;
    else if (value == "probabilistic") cfg.constraint_mode = ConstraintMode::probabilistic;
    else bad_value(key, value, "deterministic|probabilistic");
  } else if (key == "ber.target") {
    cfg.ber_target = parse_double(key, value);
  } else if (key == "rate.mode") {
    if (value == "continuous") cfg.rate_mode = RateMode::continuous;
    else if (value == "discrete") cfg.rate_mode = RateMode::discrete;
    else bad_value(key, value, "continuous|discrete");
  } else if (key == "noise.bandwidth_hz") {
    cfg.bandwidth_hz = parse_double(key, value);
  } else if (key == "noise.psd_dbm_hz") {
    cfg.noise_psd_dbm_hz = parse_double(key, value);
  } else if (key == "noise.primary_w") {
    if (value == "thermal") cfg.primary_interference_w.reset();
    else cfg.primary_interference_w = parse_double(key, value);
  } else if (key == "direct.mean_source") {
    if (value == "uniform") cfg.direct_means.kind = DirectGainSource::Kind::uniform;
    else if (value == "constant") cfg.direct_means.kind = DirectGainSource::Kind::constant;
    else if (value == "list") cfg.direct_means.kind = DirectGainSource::Kind::list;
    else bad_value(key, value, "uniform|constant|list");
  } else if (key == "direct.mean_seed") {
    cfg.direct_means.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "direct.mean") {
    cfg.direct_means.value = parse_double(key, value);
  } else if (key == "direct.means") {
    cfg.direct_means.values = value == "none" ? std::vector<double>{} : parse_list(key, value);
  } else if (key == "cross.mean_re") {
    cfg.cross_mean.real(parse_double(key, value));
  } else if (key == "cross.mean_im") {
    cfg.cross_mean.imag(parse_double(key, value));
  } else if (key == "cross.var") {
    cfg.cross_var = parse_double(key, value);
  } else if (key == "csi.mode") {
    if (value == "perfect") cfg.csi_mode = CsiMode::perfect;
    else if (value == "imperfect") cfg.csi_mode = CsiMode::imperfect;
    else bad_value(key, value, "perfect|imperfect");
  } else if (key == "csi.error_var") {
    cfg.error_var = parse_double(key, value);
  } else if (key == "csi.rho") {
    cfg.correlation = parse_double(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void apply_override(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  }
  apply_override(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ScenarioConfig parse_config(std::string_view text, const ScenarioConfig& base) {
  ScenarioConfig cfg = base;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    try {
      apply_override(cfg, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path, const ScenarioConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), base);
}

std::string to_config_text(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "users = " << cfg.num_users << '\n'
      << "primaries = " << cfg.num_primaries << '\n'
      << "subcarriers = " << cfg.num_subcarriers << '\n'
      << "seed = " << cfg.rng_seed << '\n'
      << "power.total_w = " << format_number(cfg.total_power_w) << '\n'
      << "interference.limit_w = " << join(cfg.interference_limits_w) << '\n'
      << "interference.collision_prob = " << join(cfg.collision_limits) << '\n'
      << "interference.mode = " << to_string(cfg.constraint_mode) << '\n'
      << "ber.target = " << format_number(cfg.ber_target) << '\n'
      << "rate.mode = " << to_string(cfg.rate_mode) << '\n'
      << "noise.bandwidth_hz = " << format_number(cfg.bandwidth_hz) << '\n'
      << "noise.psd_dbm_hz = " << format_number(cfg.noise_psd_dbm_hz) << '\n'
      << "noise.primary_w = "
      << (cfg.primary_interference_w ? format_number(*cfg.primary_interference_w) : std::string("thermal")) << '\n'
      << "direct.mean_source = " << to_string(cfg.direct_means.kind) << '\n'
      << "direct.mean_seed = " << cfg.direct_means.seed << '\n'
      << "direct.mean = " << format_number(cfg.direct_means.value) << '\n'
      << "direct.means = " << (cfg.direct_means.values.empty() ? std::string("none") : join(cfg.direct_means.values))
      << '\n'
      << "cross.mean_re = " << format_number(cfg.cross_mean.real()) << '\n'
      << "cross.mean_im = " << format_number(cfg.cross_mean.imag()) << '\n'
      << "cross.var = " << format_number(cfg.cross_var) << '\n'
      << "csi.mode = " << to_string(cfg.csi_mode) << '\n'
      << "csi.error_var = " << format_number(cfg.error_var) << '\n'
      << "csi.rho = " << format_number(cfg.correlation) << '\n';
  return out.str();
}

std::uint64_t config_fingerprint(const ScenarioConfig& cfg) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : to_config_text(cfg)) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace crnalloc
