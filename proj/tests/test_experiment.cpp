#include "safebo/experiment.hpp"

#include "safebo/noise.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace safebo;
using namespace safebo::testing;

namespace {

BenchmarkSpec small_spec(int runs = 3, int steps = 12) {
  BenchmarkSpec spec;
  spec.runs = runs;
  spec.steps = steps;
  spec.grid_points = 201;
  return spec;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("benchmark functions") {
  const BenchmarkSpec spec;
  CHECK(benchmark_f(spec, 0.0) == 0.0);
  CHECK(benchmark_f(spec, 5.0) == doctest::Approx(-2.75).epsilon(1e-14));
  CHECK(benchmark_f(spec, -5.0) == doctest::Approx(-7.25).epsilon(1e-14));
  CHECK(benchmark_g(spec, 5.0) == doctest::Approx(-2.418).epsilon(1e-12));
  CHECK(benchmark_g(spec, -5.0) == doctest::Approx(2.082).epsilon(1e-12));

  SUBCASE("constraint root sits near -4.224") {
    const double root =
        bisect([&](double x) { return benchmark_g(spec, x); }, -5.0, 0.0);
    CHECK(root == doctest::Approx(-4.224).epsilon(5e-4));
  }
  SUBCASE("recovered maximum matches the nominal value") {
    const double f_opt = find_f_opt(spec);
    CHECK(f_opt == doctest::Approx(0.0513).epsilon(1e-3 / 0.0513));
    CHECK(f_opt == doctest::Approx(benchmark_f(spec, 0.5204)).epsilon(1e-7));
    // The exact maximum dominates f on a fine grid, so regret stays >= 0.
    for (int i = 0; i <= 10000; ++i) {
      const double x = -5.0 + 10.0 * i / 10000.0;
      CHECK(benchmark_f(spec, x) <= f_opt);
    }
  }
}

TEST_CASE("spec validation names the failing field") {
  BenchmarkSpec spec;
  spec.tau = 0.0;
  CHECK_THROWS_WITH_AS(validate_spec(spec), "config: tau must be positive",
                       std::invalid_argument);
  spec = BenchmarkSpec{};
  spec.x_safe = -5.0;  // f(-5) < f_min, not actually safe
  CHECK_THROWS_AS(validate_spec(spec), std::invalid_argument);
}

TEST_CASE("config json round-trip and field errors") {
  const BenchmarkSpec spec = small_spec();
  const std::string text = benchmark_config_to_json(spec);
  const BenchmarkSpec parsed = benchmark_config_from_json(text);
  CHECK(parsed.f_min == spec.f_min);
  CHECK(parsed.runs == spec.runs);
  CHECK(parsed.grid_points == spec.grid_points);
  CHECK(parsed.kernel_sigma == spec.kernel_sigma);
  CHECK(parsed.independent_g_noise == spec.independent_g_noise);

  SUBCASE("missing f_min is reported by name") {
    std::string broken = text;
    const auto pos = broken.find("\"f_min\"");
    REQUIRE(pos != std::string::npos);
    broken.replace(pos, 7, "\"f_mim\"");
    try {
      benchmark_config_from_json(broken);
      FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("f_min") != std::string::npos);
    }
  }
  SUBCASE("unknown fields are rejected") {
    std::string extra = text;
    extra.insert(extra.find('{') + 1, "\"surprise\": 1,");
    CHECK_THROWS_AS(benchmark_config_from_json(extra), std::invalid_argument);
  }
  SUBCASE("malformed json is rejected") {
    CHECK_THROWS_AS(benchmark_config_from_json("{"), std::invalid_argument);
  }
}

TEST_CASE("counter-based noise is a pure function of its key") {
  CHECK(gaussian_noise(1, 2, 3) == gaussian_noise(1, 2, 3));
  CHECK(gaussian_noise(1, 2, 3) != gaussian_noise(1, 2, 4));
  CHECK(gaussian_noise(1, 2, 3) != gaussian_noise(1, 3, 3));
  CHECK(gaussian_noise(1, 2, 3) != gaussian_noise(2, 2, 3));
  CHECK(gaussian_noise(1, 2, 3, 0) != gaussian_noise(1, 2, 3, 1));

  SUBCASE("draws look standard normal") {
    double sum = 0.0, sum_sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double z = gaussian_noise(7, 0, static_cast<std::uint64_t>(i));
      sum += z;
      sum_sq += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.01));
    CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("monte carlo harness") {
  const BenchmarkSpec spec = small_spec(2, 6);
  const std::vector<BoundKind> methods{BoundKind::WienerKernel, BoundKind::AbbasiYadkori,
                                       BoundKind::Fiedler};

  SUBCASE("single run, single step: every method bootstraps at the safe action") {
    BenchmarkSpec tiny = spec;
    tiny.runs = 1;
    tiny.steps = 1;
    const McResult result = run_monte_carlo(tiny, methods, 7, 1);
    for (const auto& per_method : result.records) {
      REQUIRE(per_method.size() == 1);
      REQUIRE(per_method[0].steps.size() == 1);
      CHECK(per_method[0].steps[0].x == 5.0);
      CHECK_FALSE(per_method[0].steps[0].feasible);
      CHECK(per_method[0].steps[0].regret ==
            doctest::Approx(2.8013).epsilon(1e-3 / 2.8));
    }
  }

  SUBCASE("same base seed reproduces identical records; parallelism is immaterial") {
    const McResult a = run_monte_carlo(spec, methods, 11, 1);
    const McResult b = run_monte_carlo(spec, methods, 11, 4);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t m = 0; m < a.records.size(); ++m) {
      for (std::size_t r = 0; r < a.records[m].size(); ++r) {
        const auto& ra = a.records[m][r].steps;
        const auto& rb = b.records[m][r].steps;
        REQUIRE(ra.size() == rb.size());
        for (std::size_t t = 0; t < ra.size(); ++t) {
          CHECK(ra[t].x == rb[t].x);
          CHECK(ra[t].y_f == rb[t].y_f);
          CHECK(ra[t].cum_regret == rb[t].cum_regret);
          CHECK(ra[t].beta == rb[t].beta);
        }
      }
    }
  }

  SUBCASE("all methods replay the same per-run noise sequence") {
    const McResult result = run_monte_carlo(spec, methods, 13, 2);
    for (std::size_t r = 0; r < result.records[0].size(); ++r) {
      for (std::size_t t = 0; t < result.records[0][r].steps.size(); ++t) {
        // The consumed noise realization y_f - f(x) must match elementwise
        // across methods even where the chosen actions differ.
        const StepRow& wk = result.records[0][r].steps[t];
        const StepRow& ay = result.records[1][r].steps[t];
        const StepRow& fi = result.records[2][r].steps[t];
        const double z_wk = wk.y_f - benchmark_f(spec, wk.x);
        const double z_ay = ay.y_f - benchmark_f(spec, ay.x);
        const double z_fi = fi.y_f - benchmark_f(spec, fi.x);
        CHECK(z_wk == doctest::Approx(z_ay).epsilon(1e-12));
        CHECK(z_wk == doctest::Approx(z_fi).epsilon(1e-12));
        if (wk.x == ay.x) {
          CHECK(wk.y_f == ay.y_f);
          CHECK(wk.y_g == ay.y_g);
        }
      }
    }
  }

  SUBCASE("instantaneous regret is nonnegative at every step") {
    const McResult result = run_monte_carlo(spec, methods, 17, 2);
    for (const auto& per_method : result.records) {
      for (const auto& record : per_method) {
        for (const auto& row : record.steps) CHECK(row.regret >= 0.0);
      }
    }
  }

  SUBCASE("mismatched f_opt is rejected") {
    BenchmarkSpec bad = spec;
    bad.f_opt = 0.2;
    CHECK_THROWS_AS(run_monte_carlo(bad, methods, 3, 1), std::invalid_argument);
  }
}

TEST_CASE("cumulative regret is the prefix sum") {
  RunRecord record;
  record.steps.resize(3);
  record.steps[0].regret = 2.8013;
  record.steps[1].regret = 2.8013;
  record.steps[2].regret = 0.0;
  record.steps[0].cum_regret = 2.8013;
  record.steps[1].cum_regret = 5.6026;
  record.steps[2].cum_regret = 5.6026;
  const std::vector<double> cum = cumulative_regret(record);
  REQUIRE(cum.size() == 3);
  CHECK(cum[0] == doctest::Approx(2.8013));
  CHECK(cum[1] == doctest::Approx(5.6026));
  CHECK(cum[2] == doctest::Approx(5.6026));
  CHECK(cum[1] == doctest::Approx(record.steps[1].cum_regret));
}

TEST_CASE("summarize") {
  SUBCASE("identical runs collapse the bands onto the mean") {
    McResult result;
    result.methods = {BoundKind::WienerKernel};
    result.records.resize(1);
    RunRecord record;
    record.method = BoundKind::WienerKernel;
    record.steps.resize(4);
    double cum = 0.0;
    for (std::size_t t = 0; t < 4; ++t) {
      record.steps[t].regret = 1.0;
      cum += 1.0;
      record.steps[t].cum_regret = cum;
      record.steps[t].safe_measure = static_cast<double>(t);
    }
    result.records[0] = {record, record, record};
    result.records[0][1].run = 1;
    result.records[0][2].run = 2;
    const Summary summary = summarize(result);
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(summary.methods[0].mean_cum_regret[t] ==
            doctest::Approx(static_cast<double>(t + 1)));
      CHECK(summary.methods[0].lo_band[t] == summary.methods[0].mean_cum_regret[t]);
      CHECK(summary.methods[0].hi_band[t] == summary.methods[0].mean_cum_regret[t]);
      CHECK(summary.methods[0].lo_band[t] <= summary.methods[0].hi_band[t]);
    }
  }

  SUBCASE("two runs with final regrets 2 and 4 average to 3") {
    McResult result;
    result.methods = {BoundKind::WienerKernel};
    result.records.resize(1);
    RunRecord a, b;
    a.steps.resize(1);
    b.steps.resize(1);
    a.steps[0].cum_regret = 2.0;
    b.steps[0].cum_regret = 4.0;
    b.run = 1;
    result.records[0] = {a, b};
    const Summary summary = summarize(result);
    CHECK(summary.methods[0].mean_cum_regret[0] == doctest::Approx(3.0));
    CHECK(summary.methods[0].lo_band[0] <= summary.methods[0].hi_band[0]);
  }

  SUBCASE("empty input and single-run input are rejected") {
    CHECK_THROWS_AS(summarize(McResult{}), std::invalid_argument);
    McResult one;
    one.methods = {BoundKind::WienerKernel};
    one.records.resize(1);
    one.records[0].resize(1);
    CHECK_THROWS_AS(summarize(one), std::invalid_argument);
  }
}

TEST_CASE("results persistence round-trips all stored fields exactly") {
  const BenchmarkSpec spec = small_spec(2, 5);
  const McResult result =
      run_monte_carlo(spec, {BoundKind::WienerKernel, BoundKind::Fiedler}, 23, 2);
  const std::string path = temp_path("safebo_test_results.csv");
  persist(result, path);

  const McResult loaded = load(path);
  REQUIRE(loaded.methods == result.methods);
  REQUIRE(loaded.records.size() == result.records.size());
  for (std::size_t m = 0; m < result.records.size(); ++m) {
    REQUIRE(loaded.records[m].size() == result.records[m].size());
    for (std::size_t r = 0; r < result.records[m].size(); ++r) {
      const auto& original = result.records[m][r];
      const auto& restored = loaded.records[m][r];
      CHECK(restored.run == original.run);
      REQUIRE(restored.steps.size() == original.steps.size());
      for (std::size_t t = 0; t < original.steps.size(); ++t) {
        CHECK(restored.steps[t].x == original.steps[t].x);
        CHECK(restored.steps[t].y_f == original.steps[t].y_f);
        CHECK(restored.steps[t].y_g == original.steps[t].y_g);
        CHECK(restored.steps[t].feasible == original.steps[t].feasible);
        CHECK(restored.steps[t].regret == original.steps[t].regret);
        CHECK(restored.steps[t].cum_regret == original.steps[t].cum_regret);
        CHECK(restored.steps[t].safe_measure == original.steps[t].safe_measure);
        CHECK(restored.steps[t].beta == original.steps[t].beta);
      }
    }
  }
  std::remove(path.c_str());

  SUBCASE("row count is methods x runs x steps") {
    std::size_t rows = 0;
    for (const auto& per_method : result.records) {
      for (const auto& record : per_method) rows += record.steps.size();
    }
    CHECK(rows == 2u * 2u * 5u);
  }
}

TEST_CASE("persistence rejects foreign schemas") {
  const std::string path = temp_path("safebo_bad_schema.csv");
  {
    std::ofstream out(path);
    out << "method,run,regret\nwk,0,1.0\n";
  }
  CHECK_THROWS_AS(load(path), std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load(temp_path("safebo_does_not_exist.csv")), std::runtime_error);
}

TEST_CASE("empty result set persists as a header-only file") {
  McResult empty;
  const std::string path = temp_path("safebo_empty.csv");
  persist(empty, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == kResultsCsvHeader);
  CHECK_FALSE(std::getline(in, line));
  std::remove(path.c_str());
}

TEST_CASE("wk safe-measure trajectories never end below their start") {
  const BenchmarkSpec spec = small_spec(3, 15);
  const McResult result = run_monte_carlo(spec, {BoundKind::WienerKernel}, 29, 2);
  for (const auto& record : result.records[0]) {
    CHECK(record.steps.back().safe_measure >= record.steps.front().safe_measure);
    int non_decreasing = 0;
    for (std::size_t t = 1; t < record.steps.size(); ++t) {
      if (record.steps[t].safe_measure >= record.steps[t - 1].safe_measure) ++non_decreasing;
    }
    CHECK(static_cast<double>(non_decreasing) /
              static_cast<double>(record.steps.size() - 1) >=
          0.75);
  }
}
