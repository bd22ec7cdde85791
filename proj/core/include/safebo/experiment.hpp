#ifndef SAFEBO_EXPERIMENT_HPP
#define SAFEBO_EXPERIMENT_HPP

#include "safebo/bounds.hpp"
#include "safebo/safe_bo.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace safebo {

/// The shipped scalar benchmark: maximize the cubic
/// f(x) = 0.01 x^3 - 0.2 x^2 + 0.2 x on [-5, 5] subject to the safety
/// constraint g(x) = -f(x) + f_min <= 0, with x_safe = 5 known to be safe.
struct BenchmarkSpec {
  std::array<double, 4> f_coefficients{0.01, -0.2, 0.2, 0.0};  // x^3, x^2, x, 1
  double f_min = -5.168;
  Interval domain{-5.0, 5.0};
  double x_safe = 5.0;
  double f_opt = 0.0513;  // nominal interior maximum, re-derived at startup
  double sigma_noise = 1.0;
  double kernel_sigma = 4.21;
  double kernel_lengthscale = 3.59;
  double rkhs_bound = 2.5;  // B, shared by all methods
  double delta = 0.001;
  double tau = 1e-6;
  int steps = 100;       // T
  int runs = 100;        // Monte Carlo repetitions
  int grid_points = 1001;
  bool independent_g_noise = false;  // default: y_g derives from y_f
};

void validate_spec(const BenchmarkSpec& spec);

/// Loads/saves the benchmark configuration as a JSON key-value document.
/// Every field is required on load; a missing or ill-typed field raises
/// std::invalid_argument naming it.
BenchmarkSpec load_benchmark_config(const std::string& path);
std::string benchmark_config_to_json(const BenchmarkSpec& spec);
BenchmarkSpec benchmark_config_from_json(const std::string& text);

double benchmark_f(const BenchmarkSpec& spec, double x);
double benchmark_g(const BenchmarkSpec& spec, double x);

/// Maximum of f over the domain via golden-section refinement over a coarse
/// scan; guards against transcribed coefficients and provides the exact
/// reference value for regret.
double find_f_opt(const BenchmarkSpec& spec);

SafeBoConfig make_bo_config(const BenchmarkSpec& spec, BoundKind kind);

struct StepRow {
  double x = 0.0;
  double y_f = 0.0;
  double y_g = 0.0;
  bool feasible = false;
  double regret = 0.0;      // f_opt - f(x_t)
  double cum_regret = 0.0;
  double safe_measure = 0.0;
  double beta = 0.0;
};

struct RunRecord {
  BoundKind method = BoundKind::WienerKernel;
  std::uint64_t run = 0;
  std::uint64_t seed = 0;
  std::vector<StepRow> steps;
};

struct McResult {
  std::vector<BoundKind> methods;
  std::vector<std::vector<RunRecord>> records;  // records[m][r], aligned with methods
};

/// Monte Carlo harness. Run r uses seed base_seed + r and the same per-run
/// noise sequence for every method; results are independent of the
/// parallelism level.
McResult run_monte_carlo(const BenchmarkSpec& spec, const std::vector<BoundKind>& methods,
                         std::uint64_t base_seed, int parallelism);

/// Prefix sums of the per-step regret.
std::vector<double> cumulative_regret(const RunRecord& record);

struct MethodSummary {
  BoundKind method = BoundKind::WienerKernel;
  std::vector<double> mean_cum_regret;
  std::vector<double> lo_band;  // 12.5th percentile of cumulative regret
  std::vector<double> hi_band;  // 87.5th percentile
  std::vector<double> mean_safe_measure;
};

struct Summary {
  std::vector<MethodSummary> methods;
  /// 100 (R_method - R_wk) / R_wk at the final step, one entry per
  /// non-Wiener method; empty when the Wiener method is absent.
  std::vector<std::pair<BoundKind, double>> regret_increase_vs_wk;
};

Summary summarize(const McResult& result);

/// CSV persistence, one row per method/run/step, floats at 17 significant
/// digits so reloading reproduces the exact values. Writes are atomic
/// (temporary file + rename).
extern const char* const kResultsCsvHeader;
extern const char* const kSummaryCsvHeader;

void persist(const McResult& result, const std::string& path);
McResult load(const std::string& path);
void write_summary_csv(const Summary& summary, const std::string& path);

/// Atomic text-file write used for all result artifacts.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace safebo

#endif  // SAFEBO_EXPERIMENT_HPP
