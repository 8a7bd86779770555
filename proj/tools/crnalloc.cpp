#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "crnalloc/config.hpp"
#include "crnalloc/csv.hpp"
#include "crnalloc/harness.hpp"
#include "crnalloc/selftest.hpp"
#include "crnalloc/sinr.hpp"

namespace fs = std::filesystem;
using namespace crnalloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitInfeasible = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> rate;
  std::vector<std::string> overrides;
  std::size_t states = 2000;
  unsigned threads = 0;
  int max_iterations = 500;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool outputs) {
  cmd->add_option("--config", args.config_path, "Scenario file (key = value); defaults to the reference scenario");
  cmd->add_option("--seed", args.seed, "Override the scenario seed");
  cmd->add_option("--mode", args.mode, "Interference constraint mode")->check(CLI::IsMember({"deterministic", "probabilistic"}));
  cmd->add_option("--rate", args.rate, "Rate adaptation")->check(CLI::IsMember({"continuous", "discrete"}));
  cmd->add_option("-s,--set", args.overrides, "Override a config key, e.g. --set power.total_w=20");
  if (outputs) {
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--threads", args.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--max-iterations", args.max_iterations, "Outer subgradient iterations");
  }
}

ScenarioConfig resolve_config(const CommonArgs& args) {
  ScenarioConfig cfg = args.config_path.empty() ? reference_scenario() : load_config(args.config_path);
  for (const auto& o : args.overrides) apply_override(cfg, o);
  if (args.seed) cfg.rng_seed = *args.seed;
  if (args.mode) apply_override(cfg, "interference.mode", *args.mode);
  if (args.rate) apply_override(cfg, "rate.mode", *args.rate);
  Scenario{cfg};
  return cfg;
}

fs::path output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("invalid sweep value '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

HarnessOptions harness_options(const CommonArgs& args) {
  HarnessOptions opt;
  opt.num_states = args.states;
  opt.solver.threads = args.threads;
  opt.solver.max_iterations = args.max_iterations;
  return opt;
}

void write_results(const fs::path& dir, const std::string& stem, const SweepResult& result, const HarnessOptions& opt) {
  auto csv = open_output(dir / (stem + ".csv"));
  write_report_csv(csv, result);
  auto json = open_output(dir / (stem + ".json"));
  write_report_json(json, result, opt);
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::convergence: return kExitConvergence;
    case ErrorKind::infeasible:
    case ErrorKind::degenerate: return kExitInfeasible;
    default: return kExitConfig;
  }
}

int fail(int code, const std::string& message) {
  std::cerr << "ERROR " << code << ": " << message << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resource allocation for multi-user OFDMA underlay cognitive radio"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string axis;
  std::string values;
  int user = 0, subcarrier = 0, prx = 0, points = 50;
  std::size_t samples = 100000;

  auto* validate = app.add_subcommand("validate", "Check a config file and print its fingerprint");
  add_common(validate, args, false);

  auto* run = app.add_subcommand("run", "Run one experiment: report.csv, report.json, trace.csv");
  add_common(run, args, true);
  run->add_option("--states", args.states, "Channel realizations");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter: sweep_<axis>.csv and .json");
  add_common(sweep_cmd, args, true);
  sweep_cmd->add_option("--states", args.states, "Channel realizations per point");
  sweep_cmd->add_option("--axis", axis, "ith | pt | eps | xi | k")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated increasing values")->required();

  auto* dist = app.add_subcommand("dist-table", "Closed-form vs Monte Carlo reference SINR distribution");
  add_common(dist, args, true);
  dist->add_option("--states", samples, "Monte Carlo realizations");
  dist->add_option("--user", user, "User index");
  dist->add_option("--subcarrier", subcarrier, "Subcarrier index");
  dist->add_option("--prx", prx, "Primary receiver index");
  dist->add_option("--points", points, "Grid points");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in oracle checks");
  selftest->add_option("--threads", args.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kExitConfig, e.what());
  }

  try {
    if (*validate) {
      const auto cfg = resolve_config(args);
      std::cout << "ok " << std::hex << config_fingerprint(cfg) << std::dec << '\n';
      return kExitOk;
    }
    if (*run) {
      const auto cfg = resolve_config(args);
      const auto opt = harness_options(args);
      const auto dir = output_dir(args.out_dir);
      const auto report = run_experiment(cfg, opt);
      auto trace = open_output(dir / "trace.csv");
      write_trace_csv(trace, report.trace);
      write_results(dir, "report", as_sweep(report), opt);
      std::cout << "ase " << format_number(report.ase) << " +- " << format_number(report.ase_stderr) << " power "
                << format_number(report.avg_power_used) << " iterations " << report.iterations << '\n';
      return kExitOk;
    }
    if (*sweep_cmd) {
      const auto cfg = resolve_config(args);
      const auto sweep_axis = parse_axis(axis);
      const auto vals = parse_values(values);
      const auto opt = harness_options(args);
      const auto dir = output_dir(args.out_dir);
      const auto result = sweep(cfg, sweep_axis, vals, opt);
      write_results(dir, "sweep_" + std::string(to_string(sweep_axis)), result, opt);
      for (const auto& p : result.points) {
        std::cout << to_string(sweep_axis) << '=' << format_number(p.value) << " ase " << format_number(p.report.ase)
                  << (p.plateau ? " plateau" : "") << '\n';
      }
      return kExitOk;
    }
    if (*dist) {
      const auto cfg = resolve_config(args);
      const Scenario sc(cfg);
      if (points < 2) throw ConfigError("--points must be >= 2");
      const auto closed = sinr_distribution(sc, user, subcarrier, prx);
      const auto mc = sample_sinr_mc(sc, prx, user, subcarrier, samples, args.threads);
      const auto& s = mc.samples();
      const double lo = std::max(s[s.size() / 1000], 1e-12);
      const double hi = s[s.size() - 1 - s.size() / 1000];
      std::vector<double> grid(static_cast<std::size_t>(points));
      for (int i = 0; i < points; ++i) grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
      const auto dir = output_dir(args.out_dir);
      auto out = open_output(dir / "dist_table.csv");
      write_distribution_table(out, closed, mc, grid);
      std::cout << "ks " << format_number(ks_distance(s, [&](double g) { return closed.cdf(g); })) << '\n';
      return kExitOk;
    }
    if (*selftest) {
      return run_selftest(std::cout, args.threads) ? kExitOk : 1;
    }
  } catch (const Error& e) {
    return fail(exit_code(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
  return kExitOk;
}
