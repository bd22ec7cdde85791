#include "safebo/experiment.hpp"

#include "safebo/noise.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace safebo {

namespace {

using nlohmann::json;

std::string fmt17(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

double require_number(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw std::invalid_argument(std::string("config: missing or non-numeric field '") +
                                field + "'");
  }
  return j[field].get<double>();
}

int require_int(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_number_integer()) {
    throw std::invalid_argument(std::string("config: missing or non-integer field '") +
                                field + "'");
  }
  return j[field].get<int>();
}

bool require_bool(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_boolean()) {
    throw std::invalid_argument(std::string("config: missing or non-boolean field '") +
                                field + "'");
  }
  return j[field].get<bool>();
}

}  // namespace

void validate_spec(const BenchmarkSpec& spec) {
  if (!(spec.domain.lo < spec.domain.hi)) {
    throw std::invalid_argument("config: domain must satisfy lo < hi");
  }
  if (spec.x_safe < spec.domain.lo || spec.x_safe > spec.domain.hi) {
    throw std::invalid_argument("config: x_safe must lie in the domain");
  }
  if (benchmark_f(spec, spec.x_safe) < spec.f_min) {
    throw std::invalid_argument("config: x_safe violates the safety constraint f(x_safe) >= f_min");
  }
  if (!(spec.sigma_noise > 0.0)) throw std::invalid_argument("config: sigma_noise must be positive");
  if (!(spec.kernel_sigma > 0.0)) throw std::invalid_argument("config: kernel_sigma must be positive");
  if (!(spec.kernel_lengthscale > 0.0)) {
    throw std::invalid_argument("config: kernel_lengthscale must be positive");
  }
  if (!(spec.rkhs_bound > 0.0)) throw std::invalid_argument("config: rkhs_bound must be positive");
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
    throw std::invalid_argument("config: delta must lie in (0, 1)");
  }
  if (!(spec.tau > 0.0)) throw std::invalid_argument("config: tau must be positive");
  if (spec.steps < 1) throw std::invalid_argument("config: steps must be >= 1");
  if (spec.runs < 1) throw std::invalid_argument("config: runs must be >= 1");
  if (spec.grid_points < 2) throw std::invalid_argument("config: grid_points must be >= 2");
}

std::string benchmark_config_to_json(const BenchmarkSpec& spec) {
  json j;
  j["f_coefficients"] = spec.f_coefficients;
  j["f_min"] = spec.f_min;
  j["domain"] = {spec.domain.lo, spec.domain.hi};
  j["x_safe"] = spec.x_safe;
  j["f_opt"] = spec.f_opt;
  j["sigma_noise"] = spec.sigma_noise;
  j["kernel_sigma"] = spec.kernel_sigma;
  j["kernel_lengthscale"] = spec.kernel_lengthscale;
  j["rkhs_bound"] = spec.rkhs_bound;
  j["delta"] = spec.delta;
  j["tau"] = spec.tau;
  j["steps"] = spec.steps;
  j["runs"] = spec.runs;
  j["grid_points"] = spec.grid_points;
  j["independent_g_noise"] = spec.independent_g_noise;
  return j.dump(2) + "\n";
}

BenchmarkSpec benchmark_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config: top-level document must be an object");
  }

  BenchmarkSpec spec;
  if (!j.contains("f_coefficients") || !j["f_coefficients"].is_array() ||
      j["f_coefficients"].size() != 4) {
    throw std::invalid_argument("config: missing field 'f_coefficients' (array of 4 numbers)");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    spec.f_coefficients[i] = j["f_coefficients"][i].get<double>();
  }
  if (!j.contains("domain") || !j["domain"].is_array() || j["domain"].size() != 2) {
    throw std::invalid_argument("config: missing field 'domain' (array [lo, hi])");
  }
  spec.domain = Interval{j["domain"][0].get<double>(), j["domain"][1].get<double>()};
  spec.f_min = require_number(j, "f_min");
  spec.x_safe = require_number(j, "x_safe");
  spec.f_opt = require_number(j, "f_opt");
  spec.sigma_noise = require_number(j, "sigma_noise");
  spec.kernel_sigma = require_number(j, "kernel_sigma");
  spec.kernel_lengthscale = require_number(j, "kernel_lengthscale");
  spec.rkhs_bound = require_number(j, "rkhs_bound");
  spec.delta = require_number(j, "delta");
  spec.tau = require_number(j, "tau");
  spec.steps = require_int(j, "steps");
  spec.runs = require_int(j, "runs");
  spec.grid_points = require_int(j, "grid_points");
  spec.independent_g_noise = require_bool(j, "independent_g_noise");

  static const char* known[] = {"f_coefficients", "f_min", "domain", "x_safe", "f_opt",
                                "sigma_noise", "kernel_sigma", "kernel_lengthscale",
                                "rkhs_bound", "delta", "tau", "steps", "runs",
                                "grid_points", "independent_g_noise"};
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known),
                     [&](const char* k) { return key == k; }) == std::end(known)) {
      throw std::invalid_argument("config: unknown field '" + key + "'");
    }
  }

  validate_spec(spec);
  return spec;
}

BenchmarkSpec load_benchmark_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return benchmark_config_from_json(buffer.str());
}

double benchmark_f(const BenchmarkSpec& spec, double x) {
  const auto& c = spec.f_coefficients;
  return ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
}

double benchmark_g(const BenchmarkSpec& spec, double x) {
  return -benchmark_f(spec, x) + spec.f_min;
}

double find_f_opt(const BenchmarkSpec& spec) {
  const double lo = spec.domain.lo;
  const double hi = spec.domain.hi;
  const int scan = 2001;
  double best_x = lo;
  double best_value = benchmark_f(spec, lo);
  for (int i = 1; i < scan; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (scan - 1);
    const double value = benchmark_f(spec, x);
    if (value > best_value) {
      best_value = value;
      best_x = x;
    }
  }

  const double step = (hi - lo) / (scan - 1);
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  while (b - a > 1e-12) {
    if (benchmark_f(spec, c) > benchmark_f(spec, d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - inv_phi * (b - a);
    d = a + inv_phi * (b - a);
  }
  return std::max(best_value, benchmark_f(spec, 0.5 * (a + b)));
}

SafeBoConfig make_bo_config(const BenchmarkSpec& spec, BoundKind kind) {
  const BoundSpec bound(kind, spec.rkhs_bound, spec.delta);
  Point x_safe(1);
  x_safe(0) = spec.x_safe;
  return SafeBoConfig{
      {spec.domain},
      spec.grid_points,
      spec.tau,
      std::move(x_safe),
      bound,
      bound,
      spec.sigma_noise,
      KernelSpec::squared_exponential(spec.kernel_sigma, spec.kernel_lengthscale)};
}

namespace {

RunRecord run_single(const BenchmarkSpec& spec, BoundKind kind, std::uint64_t base_seed,
                     std::uint64_t run_index, double f_opt_exact) {
  const SafeBoConfig cfg = make_bo_config(spec, kind);
  const Oracle oracle_f = [&spec](const Point& x) { return benchmark_f(spec, x(0)); };
  const Oracle oracle_g = [&spec](const Point& x) { return benchmark_g(spec, x(0)); };
  const NoiseSource noise = [&spec, base_seed, run_index](int step) {
    const double noise_f =
        spec.sigma_noise * gaussian_noise(base_seed, run_index, static_cast<std::uint64_t>(step), 0);
    const double noise_g =
        spec.independent_g_noise
            ? spec.sigma_noise *
                  gaussian_noise(base_seed, run_index, static_cast<std::uint64_t>(step), 1)
            : -noise_f;  // y_g = -y_f + f_min replays the same realization
    return std::make_pair(noise_f, noise_g);
  };

  const std::vector<BoStepRecord> trajectory = run(cfg, oracle_f, oracle_g, noise, spec.steps);

  RunRecord record;
  record.method = kind;
  record.run = run_index;
  record.seed = base_seed + run_index;
  record.steps.reserve(trajectory.size());
  double cum = 0.0;
  for (const auto& step : trajectory) {
    StepRow row;
    row.x = step.x(0);
    row.y_f = step.y_f;
    row.y_g = step.y_g;
    row.feasible = step.feasible;
    row.regret = f_opt_exact - benchmark_f(spec, row.x);
    cum += row.regret;
    row.cum_regret = cum;
    row.safe_measure = step.safe_measure;
    row.beta = step.beta;
    record.steps.push_back(row);
  }
  return record;
}

}  // namespace

McResult run_monte_carlo(const BenchmarkSpec& spec, const std::vector<BoundKind>& methods,
                         std::uint64_t base_seed, int parallelism) {
  validate_spec(spec);
  if (methods.empty()) {
    throw std::invalid_argument("run_monte_carlo: at least one method required");
  }
  const double f_opt_exact = find_f_opt(spec);
  if (std::abs(f_opt_exact - spec.f_opt) > 1e-3) {
    throw std::invalid_argument("config: f_opt " + fmt17(spec.f_opt) +
                                " does not match the recomputed maximum " +
                                fmt17(f_opt_exact));
  }

  McResult result;
  result.methods = methods;
  result.records.resize(methods.size());
  for (auto& per_method : result.records) {
    per_method.resize(static_cast<std::size_t>(spec.runs));
  }

  const std::size_t total = methods.size() * static_cast<std::size_t>(spec.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) break;
      const std::size_t m = task / static_cast<std::size_t>(spec.runs);
      const std::size_t r = task % static_cast<std::size_t>(spec.runs);
      try {
        result.records[m][r] = run_single(spec, methods[m], base_seed, r, f_opt_exact);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(total);  // drain remaining tasks
      }
    }
  };

  const int n_workers = std::max(1, parallelism);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

std::vector<double> cumulative_regret(const RunRecord& record) {
  std::vector<double> cum;
  cum.reserve(record.steps.size());
  double total = 0.0;
  for (const auto& row : record.steps) {
    total += row.regret;
    cum.push_back(total);
  }
  return cum;
}

namespace {

// Linear interpolation between order statistics, rank p (n - 1).
double percentile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = rank - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

}  // namespace

Summary summarize(const McResult& result) {
  if (result.methods.empty() || result.records.empty()) {
    throw std::invalid_argument("summarize: empty result set");
  }
  Summary summary;
  for (std::size_t m = 0; m < result.methods.size(); ++m) {
    const auto& runs = result.records[m];
    if (runs.size() < 2) {
      throw std::invalid_argument("summarize: confidence bands require at least 2 runs");
    }
    const std::size_t steps = runs.front().steps.size();
    for (const auto& record : runs) {
      if (record.steps.size() != steps) {
        throw std::invalid_argument("summarize: runs have inconsistent step counts");
      }
    }
    MethodSummary ms;
    ms.method = result.methods[m];
    ms.mean_cum_regret.resize(steps);
    ms.lo_band.resize(steps);
    ms.hi_band.resize(steps);
    ms.mean_safe_measure.resize(steps);
    std::vector<double> column(runs.size());
    for (std::size_t t = 0; t < steps; ++t) {
      double regret_sum = 0.0;
      double safe_sum = 0.0;
      for (std::size_t r = 0; r < runs.size(); ++r) {
        column[r] = runs[r].steps[t].cum_regret;
        regret_sum += column[r];
        safe_sum += runs[r].steps[t].safe_measure;
      }
      ms.mean_cum_regret[t] = regret_sum / static_cast<double>(runs.size());
      ms.mean_safe_measure[t] = safe_sum / static_cast<double>(runs.size());
      ms.lo_band[t] = percentile(column, 0.125);
      ms.hi_band[t] = percentile(column, 0.875);
    }
    summary.methods.push_back(std::move(ms));
  }

  const auto wk = std::find(result.methods.begin(), result.methods.end(),
                            BoundKind::WienerKernel);
  if (wk != result.methods.end()) {
    const std::size_t wk_index = static_cast<std::size_t>(wk - result.methods.begin());
    const double wk_final = summary.methods[wk_index].mean_cum_regret.back();
    for (std::size_t m = 0; m < result.methods.size(); ++m) {
      if (m == wk_index) continue;
      const double final_regret = summary.methods[m].mean_cum_regret.back();
      summary.regret_increase_vs_wk.emplace_back(
          result.methods[m], 100.0 * (final_regret - wk_final) / wk_final);
    }
  }
  return summary;
}

const char* const kResultsCsvHeader =
    "method,run,step,x,y_f,y_g,feasible,regret,cum_regret,safe_measure,beta";
const char* const kSummaryCsvHeader =
    "method,step,mean_regret,lo_band,hi_band,mean_safe_measure";

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open '" + tmp + "' for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
      throw std::runtime_error("write to '" + tmp + "' failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

void persist(const McResult& result, const std::string& path) {
  std::string out;
  out.reserve(1 << 20);
  out += kResultsCsvHeader;
  out += '\n';
  for (std::size_t m = 0; m < result.methods.size(); ++m) {
    const std::string method = to_string(result.methods[m]);
    for (const auto& record : result.records[m]) {
      for (std::size_t t = 0; t < record.steps.size(); ++t) {
        const StepRow& row = record.steps[t];
        out += method;
        out += ',';
        out += std::to_string(record.run);
        out += ',';
        out += std::to_string(t + 1);
        out += ',';
        out += fmt17(row.x);
        out += ',';
        out += fmt17(row.y_f);
        out += ',';
        out += fmt17(row.y_g);
        out += ',';
        out += row.feasible ? '1' : '0';
        out += ',';
        out += fmt17(row.regret);
        out += ',';
        out += fmt17(row.cum_regret);
        out += ',';
        out += fmt17(row.safe_measure);
        out += ',';
        out += fmt17(row.beta);
        out += '\n';
      }
    }
  }
  write_file_atomic(path, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text) {
  std::size_t pos = 0;
  const double value = std::stod(text, &pos);
  if (pos != text.size()) {
    throw std::invalid_argument("results: malformed numeric field '" + text + "'");
  }
  return value;
}

}  // namespace

McResult load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("results: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != kResultsCsvHeader) {
    throw std::runtime_error("results: schema mismatch in '" + path + "' (unexpected header)");
  }

  McResult result;
  auto method_index = [&result](BoundKind kind) -> std::size_t {
    for (std::size_t m = 0; m < result.methods.size(); ++m) {
      if (result.methods[m] == kind) return m;
    }
    result.methods.push_back(kind);
    result.records.emplace_back();
    return result.methods.size() - 1;
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 11) {
      throw std::runtime_error("results: expected 11 fields per row, got " +
                               std::to_string(fields.size()));
    }
    const BoundKind kind = bound_kind_from_string(fields[0]);
    const auto run_index = static_cast<std::uint64_t>(std::stoull(fields[1]));
    const std::size_t m = method_index(kind);
    auto& runs = result.records[m];
    if (runs.empty() || runs.back().run != run_index) {
      RunRecord record;
      record.method = kind;
      record.run = run_index;
      runs.push_back(std::move(record));
    }
    StepRow row;
    row.x = parse_double(fields[3]);
    row.y_f = parse_double(fields[4]);
    row.y_g = parse_double(fields[5]);
    row.feasible = fields[6] == "1";
    row.regret = parse_double(fields[7]);
    row.cum_regret = parse_double(fields[8]);
    row.safe_measure = parse_double(fields[9]);
    row.beta = parse_double(fields[10]);
    runs.back().steps.push_back(row);
  }
  return result;
}

void write_summary_csv(const Summary& summary, const std::string& path) {
  std::string out;
  out += kSummaryCsvHeader;
  out += '\n';
  for (const auto& method : summary.methods) {
    const std::string name = to_string(method.method);
    for (std::size_t t = 0; t < method.mean_cum_regret.size(); ++t) {
      out += name;
      out += ',';
      out += std::to_string(t + 1);
      out += ',';
      out += fmt17(method.mean_cum_regret[t]);
      out += ',';
      out += fmt17(method.lo_band[t]);
      out += ',';
      out += fmt17(method.hi_band[t]);
      out += ',';
      out += fmt17(method.mean_safe_measure[t]);
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

}  // namespace safebo
