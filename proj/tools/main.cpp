// safebo: safe Bayesian optimization with GP surrogates and probabilistic
// uniform error bounds. Subcommands: run-experiment, compare-bounds,
// verify-invariants, summarize. Exit codes: 0 success, 1 runtime failure,
// 2 usage/config error.

#include "safebo/bounds.hpp"
#include "safebo/experiment.hpp"
#include "safebo/invariants.hpp"
#include "safebo/noise.hpp"
#include "safebo/safe_bo.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string fmt17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

std::vector<safebo::BoundKind> parse_methods(const std::string& bound) {
  if (bound == "all") {
    return {safebo::BoundKind::WienerKernel, safebo::BoundKind::AbbasiYadkori,
            safebo::BoundKind::Fiedler};
  }
  return {safebo::bound_kind_from_string(bound)};
}

struct ExperimentArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  int parallelism = 0;  // 0 = hardware concurrency
  int runs = -1;
  int steps = -1;
  int grid = -1;
  double delta = -1.0;
  std::string bound = "all";
};

safebo::BenchmarkSpec resolve_spec(const std::string& config_path, const ExperimentArgs& args) {
  safebo::BenchmarkSpec spec;  // defaults mirror configs/default.json
  if (!config_path.empty()) {
    spec = safebo::load_benchmark_config(config_path);
  }
  if (args.runs > 0) spec.runs = args.runs;
  if (args.steps > 0) spec.steps = args.steps;
  if (args.grid > 0) spec.grid_points = args.grid;
  if (args.delta > 0.0) spec.delta = args.delta;
  safebo::validate_spec(spec);
  return spec;
}

int cmd_run_experiment(const ExperimentArgs& args) {
  const safebo::BenchmarkSpec spec = resolve_spec(args.config_path, args);
  const std::vector<safebo::BoundKind> methods = parse_methods(args.bound);
  const int parallelism = args.parallelism > 0
                              ? args.parallelism
                              : std::max(1u, std::thread::hardware_concurrency());

  const safebo::McResult result = safebo::run_monte_carlo(spec, methods, args.seed, parallelism);

  fs::create_directories(args.out_dir);
  const std::string results_path = (fs::path(args.out_dir) / "results.csv").string();
  const std::string summary_path = (fs::path(args.out_dir) / "summary.csv").string();
  const std::string manifest_path = (fs::path(args.out_dir) / "manifest.json").string();

  safebo::persist(result, results_path);

  std::size_t rows = 0;
  for (const auto& per_method : result.records) {
    for (const auto& record : per_method) rows += record.steps.size();
  }

  bool have_summary = false;
  if (spec.runs >= 2) {
    const safebo::Summary summary = safebo::summarize(result);
    safebo::write_summary_csv(summary, summary_path);
    have_summary = true;
    for (const auto& [kind, increase] : summary.regret_increase_vs_wk) {
      std::cout << "mean final cumulative regret increase of " << safebo::to_string(kind)
                << " vs wk: " << increase << "%\n";
    }
  }

  const std::string config_text = safebo::benchmark_config_to_json(spec);
  json manifest;
  manifest["version"] = kVersion;
  manifest["config_hash"] = "fnv1a:" + hex64(fnv1a(config_text));
  manifest["base_seed"] = args.seed;
  manifest["parallelism"] = parallelism;
  manifest["runs"] = spec.runs;
  manifest["steps"] = spec.steps;
  manifest["rows"] = rows;
  json method_names = json::array();
  for (const auto kind : methods) method_names.push_back(safebo::to_string(kind));
  manifest["methods"] = method_names;
  manifest["results_csv"] = "results.csv";
  manifest["summary_csv"] = have_summary ? json("summary.csv") : json(nullptr);
  manifest["results_schema"] = safebo::kResultsCsvHeader;
  manifest["summary_schema"] = safebo::kSummaryCsvHeader;
  safebo::write_file_atomic(manifest_path, manifest.dump(2) + "\n");

  std::cout << "wrote " << rows << " rows to " << results_path << "\n";
  return 0;
}

struct CompareArgs {
  std::string config_path;
  std::string data_path;
  int synthetic = -1;
  int grid = 101;
  std::uint64_t seed = 42;
  std::string out_path;  // empty = stdout
};

int cmd_compare_bounds(const CompareArgs& args) {
  safebo::BenchmarkSpec spec;
  if (!args.config_path.empty()) spec = safebo::load_benchmark_config(args.config_path);

  std::vector<safebo::Point> xs;
  Eigen::VectorXd labels;
  if (!args.data_path.empty() && args.synthetic >= 0) {
    throw std::invalid_argument("compare-bounds: pass either --data or --synthetic, not both");
  }
  if (!args.data_path.empty()) {
    std::ifstream in(args.data_path);
    if (!in) throw std::invalid_argument("compare-bounds: cannot open '" + args.data_path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "x,y") {
      throw std::invalid_argument("compare-bounds: data file must start with header 'x,y'");
    }
    std::vector<double> x_values;
    std::vector<double> y_values;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw std::invalid_argument("compare-bounds: malformed data row '" + line + "'");
      }
      x_values.push_back(std::stod(line.substr(0, comma)));
      y_values.push_back(std::stod(line.substr(comma + 1)));
    }
    labels.resize(static_cast<Eigen::Index>(y_values.size()));
    for (std::size_t i = 0; i < x_values.size(); ++i) {
      safebo::Point x(1);
      x(0) = x_values[i];
      xs.push_back(std::move(x));
      labels(static_cast<Eigen::Index>(i)) = y_values[i];
    }
  } else {
    const int count = args.synthetic >= 0 ? args.synthetic : 0;
    labels.resize(count);
    for (int i = 0; i < count; ++i) {
      const double u = safebo::uniform_from_bits(
          safebo::mix_key(args.seed, 0, static_cast<std::uint64_t>(i), 2));
      safebo::Point x(1);
      x(0) = spec.domain.lo + (spec.domain.hi - spec.domain.lo) * u;
      labels(i) = safebo::benchmark_f(spec, x(0)) +
                  spec.sigma_noise *
                      safebo::gaussian_noise(args.seed, 0, static_cast<std::uint64_t>(i), 0);
      xs.push_back(std::move(x));
    }
  }

  const auto kernel =
      safebo::KernelSpec::squared_exponential(spec.kernel_sigma, spec.kernel_lengthscale);
  const safebo::GpModel model =
      safebo::fit(kernel, safebo::Dataset{xs, labels}, spec.sigma_noise);
  const safebo::GammaCondition gamma = safebo::gamma_condition(model.gram(), spec.sigma_noise);
  const auto d = static_cast<long>(xs.size());

  std::vector<safebo::Point> grid;
  grid.reserve(static_cast<std::size_t>(args.grid));
  for (int i = 0; i < args.grid; ++i) {
    safebo::Point x(1);
    x(0) = spec.domain.lo +
           (spec.domain.hi - spec.domain.lo) * static_cast<double>(i) / (args.grid - 1);
    grid.push_back(std::move(x));
  }
  const safebo::PosteriorBatch posterior = safebo::posterior_batch(model, grid);
  const auto eta_wk = safebo::error_bound_batch(
      model, safebo::BoundSpec(safebo::BoundKind::WienerKernel, spec.rkhs_bound, spec.delta),
      posterior);
  const auto eta_1 = safebo::error_bound_batch(
      model, safebo::BoundSpec(safebo::BoundKind::AbbasiYadkori, spec.rkhs_bound, spec.delta),
      posterior);
  const auto eta_2 = safebo::error_bound_batch(
      model, safebo::BoundSpec(safebo::BoundKind::Fiedler, spec.rkhs_bound, spec.delta),
      posterior);

  std::string out = "x,eta_wk,eta_1,eta_2,gamma,d,gamma_gt4,d_ge2\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += fmt17(grid[i](0));
    out += ',';
    out += fmt17(eta_wk[i].eta);
    out += ',';
    out += fmt17(eta_1[i].eta);
    out += ',';
    out += fmt17(eta_2[i].eta);
    out += ',';
    out += fmt17(gamma.gamma);
    out += ',';
    out += std::to_string(d);
    out += ',';
    out += gamma.holds ? '1' : '0';
    out += ',';
    out += d >= 2 ? '1' : '0';
    out += '\n';
  }
  if (args.out_path.empty()) {
    std::cout << out;
  } else {
    safebo::write_file_atomic(args.out_path, out);
    std::cout << "wrote " << grid.size() << " rows to " << args.out_path << "\n";
  }
  return 0;
}

struct VerifyArgs {
  std::string suite;
  long trials = 0;  // 0 = suite default
  std::uint64_t seed = 2024;
};

int cmd_verify_invariants(const VerifyArgs& args) {
  std::vector<std::string> names;
  if (args.suite == "all") {
    names = safebo::suite_names();
  } else {
    names = {args.suite};
  }

  bool all_pass = true;
  for (const auto& name : names) {
    safebo::SuiteReport report;
    try {
      report = safebo::run_suite(name, args.trials, args.seed);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      std::cerr << "known suites:";
      for (const auto& known : safebo::suite_names()) std::cerr << ' ' << known;
      std::cerr << " all\n";
      return 2;
    }
    std::cout << "suite=" << report.suite << " trials=" << report.trials
              << " checks=" << report.checks << " violations=" << report.violations
              << " max_error=" << fmt17(report.max_error)
              << " result=" << (report.pass ? "pass" : "FAIL");
    if (!report.detail.empty()) std::cout << " (" << report.detail << ")";
    std::cout << "\n";
    all_pass = all_pass && report.pass;
  }
  return all_pass ? 0 : 1;
}

struct SummarizeArgs {
  std::string results_path;
  std::string out_path;  // empty = stdout
};

int cmd_summarize(const SummarizeArgs& args) {
  const safebo::McResult result = safebo::load(args.results_path);
  const safebo::Summary summary = safebo::summarize(result);
  if (args.out_path.empty()) {
    std::string out = std::string(safebo::kSummaryCsvHeader) + "\n";
    for (const auto& method : summary.methods) {
      for (std::size_t t = 0; t < method.mean_cum_regret.size(); ++t) {
        out += safebo::to_string(method.method) + "," + std::to_string(t + 1) + "," +
               fmt17(method.mean_cum_regret[t]) + "," + fmt17(method.lo_band[t]) + "," +
               fmt17(method.hi_band[t]) + "," + fmt17(method.mean_safe_measure[t]) + "\n";
      }
    }
    std::cout << out;
  } else {
    safebo::write_summary_csv(summary, args.out_path);
    std::cout << "wrote summary to " << args.out_path << "\n";
  }
  for (const auto& [kind, increase] : summary.regret_increase_vs_wk) {
    std::cout << "mean final cumulative regret increase of " << safebo::to_string(kind)
              << " vs wk: " << increase << "%\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe Bayesian optimization with GP surrogates and uniform error bounds"};
  app.require_subcommand(1);

  ExperimentArgs experiment_args;
  auto* run_cmd = app.add_subcommand("run-experiment",
                                     "Run the Monte Carlo benchmark and write CSV results");
  run_cmd->add_option("--config", experiment_args.config_path, "Benchmark config JSON")
      ->envname("SAFEBO_CONFIG");
  run_cmd->add_option("--out", experiment_args.out_dir, "Output directory")
      ->envname("SAFEBO_OUT");
  run_cmd->add_option("--seed", experiment_args.seed, "Base seed")->envname("SAFEBO_SEED");
  run_cmd->add_option("--parallelism", experiment_args.parallelism, "Worker threads (0 = auto)")
      ->envname("SAFEBO_PARALLELISM");
  run_cmd->add_option("--runs", experiment_args.runs, "Override Monte Carlo runs")
      ->envname("SAFEBO_RUNS");
  run_cmd->add_option("--steps", experiment_args.steps, "Override learning steps")
      ->envname("SAFEBO_STEPS");
  run_cmd->add_option("--grid", experiment_args.grid, "Override acquisition grid points")
      ->envname("SAFEBO_GRID");
  run_cmd->add_option("--delta", experiment_args.delta, "Override confidence parameter")
      ->envname("SAFEBO_DELTA");
  run_cmd->add_option("--bound", experiment_args.bound, "wk, ay, fiedler or all")
      ->envname("SAFEBO_BOUND");

  CompareArgs compare_args;
  auto* compare_cmd =
      app.add_subcommand("compare-bounds", "Tabulate the three error bounds on a grid");
  compare_cmd->add_option("--config", compare_args.config_path, "Benchmark config JSON");
  compare_cmd->add_option("--data", compare_args.data_path, "CSV dataset with header x,y");
  compare_cmd->add_option("--synthetic", compare_args.synthetic,
                          "Generate this many noisy benchmark observations");
  compare_cmd->add_option("--grid", compare_args.grid, "Report grid size")
      ->check(CLI::Range(2, 1000000));
  compare_cmd->add_option("--seed", compare_args.seed, "Seed for synthetic data");
  compare_cmd->add_option("--out", compare_args.out_path, "Output CSV (default stdout)");

  VerifyArgs verify_args;
  auto* verify_cmd =
      app.add_subcommand("verify-invariants", "Run randomized property suites");
  verify_cmd->add_option("--suite", verify_args.suite, "Suite name or 'all'")->required();
  verify_cmd->add_option("--trials", verify_args.trials, "Trials (0 = suite default)");
  verify_cmd->add_option("--seed", verify_args.seed, "Suite seed");

  SummarizeArgs summarize_args;
  auto* summarize_cmd =
      app.add_subcommand("summarize", "Summarize a results CSV into per-step statistics");
  summarize_cmd->add_option("--results", summarize_args.results_path, "results.csv path")
      ->required();
  summarize_cmd->add_option("--out", summarize_args.out_path, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run_experiment(experiment_args);
    if (compare_cmd->parsed()) return cmd_compare_bounds(compare_args);
    if (verify_cmd->parsed()) return cmd_verify_invariants(verify_args);
    if (summarize_cmd->parsed()) return cmd_summarize(summarize_args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
