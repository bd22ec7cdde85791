#include "safebo/invariants.hpp"

#include "safebo/bounds.hpp"
#include "safebo/gp.hpp"
#include "safebo/kernels.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

namespace safebo {

namespace {

struct Rng {
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine);
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine);
  }
  double normal(double sigma) {
    return std::normal_distribution<double>(0.0, sigma)(engine);
  }
  std::mt19937_64 engine;
};

Point random_point(Rng& rng, int dim, double lo = -5.0, double hi = 5.0) {
  Point x(dim);
  for (int i = 0; i < dim; ++i) x(i) = rng.uniform(lo, hi);
  return x;
}

std::vector<Point> random_points(Rng& rng, int count, int dim) {
  std::vector<Point> xs;
  xs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) xs.push_back(random_point(rng, dim));
  return xs;
}

struct SeInstance {
  KernelSpec kernel;
  std::vector<Point> xs;
  double sigma_m;
  Point query;
};

SeInstance random_se_instance(Rng& rng, int max_d, double sigma_m_lo, double sigma_m_hi,
                              double lengthscale_lo = 0.3, int force_dim = 0) {
  const int dim = force_dim > 0 ? force_dim : (rng.uniform(0.0, 1.0) < 0.8 ? 1 : 2);
  SeInstance instance{
      KernelSpec::squared_exponential(rng.uniform(0.5, 5.0),
                                      rng.uniform(lengthscale_lo, 5.0)),
      random_points(rng, rng.uniform_int(0, max_d), dim),
      rng.uniform(sigma_m_lo, sigma_m_hi),
      random_point(rng, dim)};
  return instance;
}

GpModel fit_noisy(Rng& rng, const SeInstance& instance) {
  Eigen::VectorXd labels(static_cast<Eigen::Index>(instance.xs.size()));
  for (Eigen::Index i = 0; i < labels.size(); ++i) labels(i) = rng.uniform(-3.0, 3.0);
  return fit(instance.kernel, Dataset{instance.xs, labels}, instance.sigma_m);
}

// Random feature map phi(x) = A b(x) over a fixed scalar basis; n_phi rows.
struct RandomFeature {
  Eigen::MatrixXd weights;  // n_phi x 6

  Eigen::VectorXd operator()(const Point& x) const {
    const double v = x(0);
    Eigen::VectorXd basis(6);
    basis << 1.0, v, v * v / 5.0, std::sin(v), std::cos(0.7 * v), std::exp(-v * v / 8.0);
    return weights * basis;
  }
};

FeatureMap random_feature_map(Rng& rng, int n_phi) {
  Eigen::MatrixXd weights(n_phi, 6);
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights.cols(); ++j) {
      weights(i, j) = rng.uniform(-1.0, 1.0);
    }
  }
  return RandomFeature{std::move(weights)};
}

// f = sum_i c_i k(., z_i) with exactly known RKHS norm.
struct RkhsFunction {
  KernelSpec kernel;
  std::vector<Point> centers;
  Eigen::VectorXd coeffs;
  double norm = 0.0;

  double operator()(const Point& x) const {
    double value = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      value += coeffs(static_cast<Eigen::Index>(i)) * kernel_eval(kernel, x, centers[i]);
    }
    return value;
  }
};

RkhsFunction random_rkhs_function(Rng& rng) {
  const int n_centers = rng.uniform_int(1, 8);
  RkhsFunction f{KernelSpec::squared_exponential(rng.uniform(0.5, 5.0), rng.uniform(0.8, 5.0)),
                 random_points(rng, n_centers, 1),
                 Eigen::VectorXd(n_centers),
                 0.0};
  for (Eigen::Index i = 0; i < f.coeffs.size(); ++i) f.coeffs(i) = rng.uniform(-2.0, 2.0);
  f.norm = rkhs_norm_of_expansion(f.kernel, f.centers, f.coeffs);
  return f;
}

std::vector<Point> linspace_points(double lo, double hi, int count) {
  std::vector<Point> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Point x(1);
    x(0) = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    grid.push_back(std::move(x));
  }
  return grid;
}

void record(SuiteReport& report, bool ok, double error) {
  report.checks += 1;
  if (!ok) report.violations += 1;
  report.max_error = std::max(report.max_error, error);
}

// --- suites ---------------------------------------------------------------

SuiteReport suite_variance_dominance(long trials, std::uint64_t seed) {
  SuiteReport report{"variance-dominance"};
  Rng rng(seed);
  for (long trial = 0; trial < trials; ++trial) {
    const SeInstance instance = random_se_instance(rng, 50, 0.1, 3.0);
    const GpModel model = fit_noisy(rng, instance);
    const PosteriorQuery query = posterior_query(model, instance.query);
    const double kxx = kernel_eval(instance.kernel, instance.query, instance.query);
    const double slack = query.var_wk - query.var_gp;
    record(report, slack <= 1e-9 * kxx, slack / kxx);
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

SuiteReport suite_wiener_identity(long trials, std::uint64_t seed) {
  SuiteReport report{"wiener-identity"};
  Rng rng(seed);
  for (long trial = 0; trial < trials; ++trial) {
    const SeInstance instance = random_se_instance(rng, 40, 0.1, 3.0);
    const GpModel model = fit_noisy(rng, instance);
    // Independent route: explicit K_M solved by column-pivoted QR.
    Eigen::MatrixXd shifted = model.gram();
    shifted.diagonal().array() += instance.sigma_m * instance.sigma_m;
    const Eigen::VectorXd kx = kernel_vector(instance.kernel, instance.xs, instance.query);
    const double lhs =
        kx.size() == 0 ? 0.0
                       : instance.sigma_m * shifted.colPivHouseholderQr().solve(kx).norm();
    const double sigma_wk = std::sqrt(wiener_variance(model, instance.query));
    const double diff = std::abs(lhs - sigma_wk);
    const bool ok = sigma_wk < 1e-6 ? diff <= 1e-12 : diff <= 1e-10 * sigma_wk;
    record(report, ok, sigma_wk > 0 ? diff / sigma_wk : diff);
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

SuiteReport suite_feature_gap(long trials, std::uint64_t seed) {
  SuiteReport report{"feature-gap"};
  Rng rng(seed);
  for (long trial = 0; trial < trials; ++trial) {
    const int n_phi = rng.uniform_int(1, 6);
    const KernelSpec kernel = KernelSpec::finite_feature(random_feature_map(rng, n_phi), n_phi);
    const std::vector<Point> xs = random_points(rng, rng.uniform_int(0, 20), 1);
    const double sigma_m = rng.uniform(0.1, 3.0);
    Eigen::VectorXd labels(static_cast<Eigen::Index>(xs.size()));
    for (Eigen::Index i = 0; i < labels.size(); ++i) labels(i) = rng.uniform(-3.0, 3.0);
    const GpModel model = fit(kernel, Dataset{xs, labels}, sigma_m);
    const Point query = random_point(rng, 1);
    const double kxx = kernel_eval(kernel, query, query);
    const double gap = epistemic_gap(model, query);
    const double oracle = feature_space_gap(kernel, xs, sigma_m, query);
    const double diff = std::abs(gap * gap - oracle);
    record(report, diff <= 1e-8 * std::max(kxx, 1e-300), kxx > 0 ? diff / kxx : diff);
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

SuiteReport suite_strict_gap(long trials, std::uint64_t seed) {
  SuiteReport report{"strict-gap"};
  Rng rng(seed);
  for (long trial = 0; trial < trials; ++trial) {
    const int n_phi = rng.uniform_int(1, 6);
    const FeatureMap map = random_feature_map(rng, n_phi);
    const KernelSpec kernel = KernelSpec::finite_feature(map, n_phi);
    const std::vector<Point> xs = random_points(rng, rng.uniform_int(1, 20), 1);
    const double sigma_m = rng.uniform(0.1, 3.0);
    Point query = random_point(rng, 1);
    if (map(query).norm() < 0.1) continue;  // strictness excludes phi(x) ~ 0
    Eigen::VectorXd labels(static_cast<Eigen::Index>(xs.size()));
    for (Eigen::Index i = 0; i < labels.size(); ++i) labels(i) = rng.uniform(-3.0, 3.0);
    const GpModel model = fit(kernel, Dataset{xs, labels}, sigma_m);
    const PosteriorQuery posterior = posterior_query(model, query);
    const double kxx = kernel_eval(kernel, query, query);
    const double margin = posterior.var_gp - posterior.var_wk;
    record(report, margin > -1e-12 * kxx && feature_space_gap(kernel, xs, sigma_m, query) > 0.0,
           -margin / kxx);
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

SuiteReport run_rkhs_bound_suite(SuiteReport report, long trials, std::uint64_t seed,
                                 bool noise_free_sigma) {
  Rng rng(seed);
  const std::vector<Point> grid = linspace_points(-5.0, 5.0, 1000);
  for (long trial = 0; trial < trials; ++trial) {
    const RkhsFunction f = random_rkhs_function(rng);
    // Noise-free labels on a subset of the centers.
    const int n_data = rng.uniform_int(1, static_cast<int>(f.centers.size()));
    std::vector<Point> xs(f.centers.begin(), f.centers.begin() + n_data);
    Eigen::VectorXd labels(n_data);
    for (int i = 0; i < n_data; ++i) labels(i) = f(xs[static_cast<std::size_t>(i)]);
    const double sigma_m = noise_free_sigma ? 0.0 : rng.uniform(0.1, 2.0);
    const double jitter = noise_free_sigma ? 1e-10 : 0.0;
    const GpModel model = fit(f.kernel, Dataset{xs, labels}, sigma_m, jitter);
    const PosteriorBatch posterior = posterior_batch(model, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto index = static_cast<Eigen::Index>(i);
      const double err = std::abs(f(grid[i]) - posterior.mean(index));
      const double envelope =
          noise_free_sigma
              ? f.norm * std::sqrt(std::max(posterior.var_gp(index), 0.0))
              : f.norm * std::sqrt(std::max(posterior.var_gp(index) - posterior.var_wk(index), 0.0));
      record(report, err <= envelope + 1e-8, err - envelope);
    }
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

SuiteReport suite_gap_envelope(long trials, std::uint64_t seed) {
  return run_rkhs_bound_suite(SuiteReport{"gap-envelope"}, trials, seed, false);
}

SuiteReport suite_posterior_envelope(long trials, std::uint64_t seed) {
  return run_rkhs_bound_suite(SuiteReport{"posterior-envelope"}, trials, seed, true);
}

SuiteReport suite_noise_coverage(long trials, std::uint64_t seed) {
  SuiteReport report{"noise-coverage"};
  Rng rng(seed);
  const KernelSpec kernel = KernelSpec::squared_exponential(4.21, 3.59);
  const double sigma_m = 1.0;
  const std::vector<Point> xs = linspace_points(-4.5, 4.5, 10);
  const std::vector<Point> grid = linspace_points(-5.0, 5.0, 21);

  Eigen::MatrixXd shifted = gram_matrix(kernel, xs);
  shifted.diagonal().array() += sigma_m * sigma_m;
  const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  Eigen::MatrixXd kx_grid(xs.size(), grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    kx_grid.col(static_cast<Eigen::Index>(j)) = kernel_vector(kernel, xs, grid[j]);
  }
  const Eigen::MatrixXd weights = llt.solve(kx_grid);  // K_M^{-1} k(x), per grid point
  const Eigen::VectorXd sigma_wk = sigma_m * weights.colwise().norm().transpose();

  const std::vector<double> deltas{0.05, 0.01};
  Eigen::VectorXd noise_vec(static_cast<Eigen::Index>(xs.size()));
  for (double delta : deltas) {
    const double threshold_scale = beta_wk(delta);
    Eigen::VectorXi covered = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(grid.size()));
    for (long draw = 0; draw < trials; ++draw) {
      for (Eigen::Index i = 0; i < noise_vec.size(); ++i) noise_vec(i) = rng.normal(sigma_m);
      const Eigen::VectorXd transformed = weights.transpose() * noise_vec;
      for (Eigen::Index j = 0; j < transformed.size(); ++j) {
        if (std::abs(transformed(j)) <= threshold_scale * sigma_wk(j)) covered(j) += 1;
      }
    }
    for (Eigen::Index j = 0; j < covered.size(); ++j) {
      const double frequency = static_cast<double>(covered(j)) / static_cast<double>(trials);
      record(report, frequency >= 1.0 - delta, (1.0 - delta) - frequency);
    }
  }
  report.trials = trials;
  report.pass = report.violations == 0;
  return report;
}

SuiteReport suite_bound_coverage(long trials, std::uint64_t seed) {
  SuiteReport report{"bound-coverage"};
  Rng rng(seed);
  const double delta = 0.05;
  const double sigma_m = 1.0;
  const RkhsFunction g = random_rkhs_function(rng);
  const BoundSpec spec(BoundKind::WienerKernel, std::max(g.norm, 1e-6), delta);
  const std::vector<Point> xs = random_points(rng, 12, 1);
  const std::vector<Point> grid = linspace_points(-5.0, 5.0, 201);
  Eigen::VectorXd clean(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) clean(static_cast<Eigen::Index>(i)) = g(xs[i]);

  long held = 0;
  for (long draw = 0; draw < trials; ++draw) {
    Eigen::VectorXd labels = clean;
    for (Eigen::Index i = 0; i < labels.size(); ++i) labels(i) += rng.normal(sigma_m);
    const GpModel model = fit(g.kernel, Dataset{xs, labels}, sigma_m);
    const PosteriorBatch posterior = posterior_batch(model, grid);
    const std::vector<BoundValue> eta = error_bound_batch(model, spec, posterior);
    bool uniform = true;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double err = std::abs(posterior.mean(static_cast<Eigen::Index>(j)) - g(grid[j]));
      if (err > eta[j].eta) {
        uniform = false;
        break;
      }
    }
    held += uniform ? 1 : 0;
  }
  const double frequency = static_cast<double>(held) / static_cast<double>(trials);
  record(report, frequency >= 1.0 - delta, (1.0 - delta) - frequency);
  report.trials = trials;
  report.pass = report.violations == 0;
  report.detail = "uniform-coverage frequency " + std::to_string(frequency);
  return report;
}

SuiteReport suite_bound_dominance(long trials, std::uint64_t seed) {
  SuiteReport report{"bound-dominance"};
  Rng rng(seed);
  const std::vector<Point> grid = linspace_points(-5.0, 5.0, 101);
  const std::vector<double> deltas{0.5, 0.1, 0.01, 0.001};
  const std::vector<double> deltas_d1{0.4, 0.1, 0.01, 0.001};  // D = 1 needs delta < 0.5
  for (long trial = 0; trial < trials; ++trial) {
    // Lengthscales >= 1 keep the Wiener variance bounded away from underflow
    // on the comparison grid, so strict dominance is decidable in doubles.
    const SeInstance instance = random_se_instance(rng, 30, 0.1, 3.0, 1.0, 1);
    const GpModel model = fit_noisy(rng, instance);
    const PosteriorBatch posterior = posterior_batch(model, grid);
    const auto d = static_cast<Eigen::Index>(instance.xs.size());
    const GammaCondition gamma = gamma_condition(model.gram(), instance.sigma_m);

    const double b = 2.5;
    for (double delta : (d == 1 ? deltas_d1 : deltas)) {
      const std::vector<BoundValue> eta_wk =
          error_bound_batch(model, BoundSpec(BoundKind::WienerKernel, b, delta), posterior);
      const std::vector<BoundValue> eta_1 =
          error_bound_batch(model, BoundSpec(BoundKind::AbbasiYadkori, b, delta), posterior);
      const std::vector<BoundValue> eta_2 =
          error_bound_batch(model, BoundSpec(BoundKind::Fiedler, b, delta), posterior);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        if (gamma.holds) {
          record(report, eta_wk[j].eta < eta_1[j].eta, eta_wk[j].eta - eta_1[j].eta);
        }
        if (d >= 1) {
          record(report, eta_wk[j].eta < eta_2[j].eta, eta_wk[j].eta - eta_2[j].eta);
        }
      }
    }
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

SuiteReport suite_safe_region_nesting(long trials, std::uint64_t seed) {
  SuiteReport report{"safe-region-nesting"};
  Rng rng(seed);
  const std::vector<Point> grid = linspace_points(-5.0, 5.0, 101);
  for (long trial = 0; trial < trials; ++trial) {
    const int d = rng.uniform_int(2, 25);
    const KernelSpec kernel =
        KernelSpec::squared_exponential(rng.uniform(1.0, 5.0), rng.uniform(1.0, 5.0));
    const double sigma_m = rng.uniform(0.5, 1.5);
    const std::vector<Point> xs = random_points(rng, d, 1);
    Eigen::VectorXd labels(d);
    for (Eigen::Index i = 0; i < labels.size(); ++i) labels(i) = rng.uniform(-6.0, -1.0);
    const GpModel model = fit(kernel, Dataset{xs, labels}, sigma_m);
    const PosteriorBatch posterior = posterior_batch(model, grid);
    const GammaCondition gamma = gamma_condition(model.gram(), sigma_m);
    if (!gamma.holds) continue;

    const double b = 2.5;
    const double delta = 0.001;
    const std::vector<BoundValue> eta_wk =
        error_bound_batch(model, BoundSpec(BoundKind::WienerKernel, b, delta), posterior);
    const std::vector<BoundValue> eta_1 =
        error_bound_batch(model, BoundSpec(BoundKind::AbbasiYadkori, b, delta), posterior);
    const std::vector<BoundValue> eta_2 =
        error_bound_batch(model, BoundSpec(BoundKind::Fiedler, b, delta), posterior);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double mean = posterior.mean(static_cast<Eigen::Index>(j));
      const bool safe_wk = mean + eta_wk[j].eta <= 0.0;
      const bool safe_1 = mean + eta_1[j].eta <= 0.0;
      const bool safe_2 = mean + eta_2[j].eta <= 0.0;
      record(report, (!safe_1 || safe_wk) && (!safe_2 || safe_wk), 0.0);
    }
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

SuiteReport suite_variance_monotone(long trials, std::uint64_t seed) {
  SuiteReport report{"variance-monotone"};
  Rng rng(seed);
  for (long trial = 0; trial < trials; ++trial) {
    const KernelSpec kernel =
        KernelSpec::squared_exponential(rng.uniform(0.5, 5.0), rng.uniform(0.5, 5.0));
    const double sigma_m = rng.uniform(0.1, 2.0);
    const std::vector<Point> queries = random_points(rng, 5, 1);
    const int total = rng.uniform_int(2, 20);
    std::vector<Point> xs;
    Eigen::VectorXd labels(0);
    std::vector<double> previous(queries.size(),
                                 std::numeric_limits<double>::infinity());
    for (int i = 0; i < total; ++i) {
      xs.push_back(random_point(rng, 1));
      labels.conservativeResize(labels.size() + 1);
      labels(labels.size() - 1) = rng.uniform(-3.0, 3.0);
      const GpModel model = fit(kernel, Dataset{xs, labels}, sigma_m);
      for (std::size_t q = 0; q < queries.size(); ++q) {
        const double var = posterior_variance(model, queries[q]);
        record(report, var <= previous[q] + 1e-9, var - previous[q]);
        previous[q] = var;
      }
    }
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

SuiteReport suite_gram_psd(long trials, std::uint64_t seed) {
  SuiteReport report{"gram-psd"};
  Rng rng(seed);
  for (long trial = 0; trial < trials; ++trial) {
    const SeInstance instance = random_se_instance(rng, 50, 0.1, 3.0);
    const Eigen::MatrixXd gram = gram_matrix(instance.kernel, instance.xs);
    if (gram.rows() == 0) {
      report.trials += 1;
      continue;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(gram);
    const double smallest = eigen.eigenvalues().minCoeff();
    const double trace = gram.trace();
    record(report, smallest >= -1e-10 * trace, -smallest / std::max(trace, 1e-300));
    record(report, (gram - gram.transpose()).cwiseAbs().maxCoeff() == 0.0, 0.0);
    report.trials += 1;
  }
  report.pass = report.violations == 0;
  return report;
}

using SuiteFn = std::function<SuiteReport(long, std::uint64_t)>;

const std::vector<std::pair<std::string, std::pair<SuiteFn, long>>>& suite_table() {
  static const std::vector<std::pair<std::string, std::pair<SuiteFn, long>>> table = {
      {"variance-dominance", {suite_variance_dominance, 10000}},
      {"wiener-identity", {suite_wiener_identity, 1000}},
      {"feature-gap", {suite_feature_gap, 1000}},
      {"strict-gap", {suite_strict_gap, 1000}},
      {"gap-envelope", {suite_gap_envelope, 100}},
      {"posterior-envelope", {suite_posterior_envelope, 100}},
      {"noise-coverage", {suite_noise_coverage, 10000}},
      {"bound-coverage", {suite_bound_coverage, 2000}},
      {"bound-dominance", {suite_bound_dominance, 1000}},
      {"safe-region-nesting", {suite_safe_region_nesting, 200}},
      {"variance-monotone", {suite_variance_monotone, 200}},
      {"gram-psd", {suite_gram_psd, 1000}},
  };
  return table;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  for (const auto& entry : suite_table()) names.push_back(entry.first);
  return names;
}

SuiteReport run_suite(const std::string& name, long trials, std::uint64_t seed) {
  for (const auto& entry : suite_table()) {
    if (entry.first == name) {
      const long n = trials > 0 ? trials : entry.second.second;
      return entry.second.first(n, seed);
    }
  }
  throw std::invalid_argument("unknown invariant suite '" + name + "'");
}

}  // namespace safebo
