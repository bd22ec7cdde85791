#include "safebo/safe_bo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace safebo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool in_domain(const SafeBoConfig& cfg, const Point& x) {
  if (static_cast<std::size_t>(x.size()) != cfg.domain.size()) return false;
  for (std::size_t d = 0; d < cfg.domain.size(); ++d) {
    const double v = x(static_cast<Eigen::Index>(d));
    if (v < cfg.domain[d].lo || v > cfg.domain[d].hi) return false;
  }
  return true;
}

double domain_volume(const SafeBoConfig& cfg) {
  double volume = 1.0;
  for (const auto& interval : cfg.domain) volume *= interval.length();
  return volume;
}

// Grid posteriors and UCBs for both surrogates. The surrogates share inputs,
// kernel and noise level whenever the state came from observe(), so the
// variance solve runs once.
struct GridEval {
  Eigen::VectorXd ucb_f;
  Eigen::VectorXd ucb_g;
};

GridEval evaluate_grid(const BoState& state, const SafeBoConfig& cfg,
                       const Eigen::MatrixXd& kx_rows, const Eigen::VectorXd& prior_diag) {
  GridEval eval;
  const PosteriorBatch post_f = posterior_batch_with_rows(state.model_f, kx_rows, prior_diag);
  PosteriorBatch post_g;
  if (state.model_f.shared_factor() == state.model_g.shared_factor()) {
    post_g.mean = posterior_mean_batch(state.model_g, kx_rows);
    post_g.var_gp = post_f.var_gp;
    post_g.var_wk = post_f.var_wk;
  } else {
    post_g = posterior_batch_with_rows(state.model_g, kx_rows, prior_diag);
  }

  const std::vector<BoundValue> eta_f = error_bound_batch(state.model_f, cfg.bound_f, post_f);
  const std::vector<BoundValue> eta_g = error_bound_batch(state.model_g, cfg.bound_g, post_g);
  const Eigen::Index n = prior_diag.size();
  eval.ucb_f.resize(n);
  eval.ucb_g.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eval.ucb_f(i) = post_f.mean(i) + eta_f[static_cast<std::size_t>(i)].eta;
    eval.ucb_g(i) = post_g.mean(i) + eta_g[static_cast<std::size_t>(i)].eta;
  }
  return eval;
}

void grid_rows_for(const BoState& state, const std::vector<Point>& grid,
                   Eigen::MatrixXd& kx_rows, Eigen::VectorXd& prior_diag,
                   const SafeBoConfig& cfg) {
  const Eigen::Index n = static_cast<Eigen::Index>(grid.size());
  const Eigen::Index d = state.model_f.data_size();
  kx_rows.resize(d, n);
  prior_diag.resize(n);
  const auto& inputs = state.model_f.inputs();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      kx_rows(i, j) = kernel_eval(cfg.kernel, inputs[static_cast<std::size_t>(i)],
                                  grid[static_cast<std::size_t>(j)]);
    }
    prior_diag(j) = kernel_eval(cfg.kernel, grid[static_cast<std::size_t>(j)],
                                grid[static_cast<std::size_t>(j)]);
  }
}

double barrier_score(double ucb_f, double ucb_g, double tau) {
  if (!(ucb_g < 0.0)) return kNegInf;
  return ucb_f + tau * std::log(-ucb_g);
}

Selection select_from_scores(const GridEval& eval, const std::vector<Point>& grid,
                             const SafeBoConfig& cfg) {
  Eigen::Index best = -1;
  double best_score = kNegInf;
  for (Eigen::Index i = 0; i < eval.ucb_f.size(); ++i) {
    const double score = barrier_score(eval.ucb_f(i), eval.ucb_g(i), cfg.tau);
    if (score > best_score) {  // strict: ties resolve to the smallest index
      best_score = score;
      best = i;
    }
  }
  if (best < 0) return Selection{cfg.x_safe, false};
  return Selection{grid[static_cast<std::size_t>(best)], true};
}

SafeRegion region_from_ucb(const Eigen::VectorXd& ucb_g, const SafeBoConfig& cfg) {
  SafeRegion region;
  region.mask.resize(static_cast<std::size_t>(ucb_g.size()));
  std::size_t safe_count = 0;
  for (Eigen::Index i = 0; i < ucb_g.size(); ++i) {
    const bool safe = ucb_g(i) <= 0.0;
    region.mask[static_cast<std::size_t>(i)] = safe;
    safe_count += safe ? 1u : 0u;
  }
  if (!region.mask.empty()) {
    region.measure = domain_volume(cfg) * static_cast<double>(safe_count) /
                     static_cast<double>(region.mask.size());
  }
  return region;
}

}  // namespace

void validate_config(const SafeBoConfig& cfg) {
  if (cfg.domain.empty()) {
    throw std::invalid_argument("safe BO config: domain must have at least one dimension");
  }
  for (const auto& interval : cfg.domain) {
    if (!(interval.lo < interval.hi)) {
      throw std::invalid_argument("safe BO config: domain intervals must have lo < hi");
    }
  }
  if (cfg.grid_points < 2) {
    throw std::invalid_argument("safe BO config: grid_points must be >= 2");
  }
  if (!(cfg.tau > 0.0)) {
    throw std::invalid_argument("safe BO config: tau must be positive");
  }
  if (!(cfg.sigma_m > 0.0)) {
    throw std::invalid_argument("safe BO config: sigma_m must be positive");
  }
  if (!in_domain(cfg, cfg.x_safe)) {
    throw std::invalid_argument("safe BO config: x_safe must lie in the domain");
  }
}

std::vector<Point> make_grid(const SafeBoConfig& cfg) {
  const std::size_t dims = cfg.domain.size();
  const int n = cfg.grid_points;
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) total *= static_cast<std::size_t>(n);

  std::vector<Point> grid(total, Point(dims));
  for (std::size_t index = 0; index < total; ++index) {
    std::size_t rest = index;
    for (std::size_t d = dims; d-- > 0;) {
      const auto i = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
      const auto& interval = cfg.domain[d];
      grid[index](static_cast<Eigen::Index>(d)) =
          interval.lo + (interval.hi - interval.lo) * static_cast<double>(i) /
                            static_cast<double>(n - 1);
    }
  }
  return grid;
}

BoState initial_state(const SafeBoConfig& cfg) {
  validate_config(cfg);
  auto [model_f, model_g] =
      fit_pair(cfg.kernel, {}, Eigen::VectorXd(), Eigen::VectorXd(), cfg.sigma_m);
  return BoState{std::move(model_f), std::move(model_g), 0, {}};
}

double acquisition_score(const BoState& state, const SafeBoConfig& cfg, const Point& x) {
  const double ucb_g = ucb(state.model_g, cfg.bound_g, x);
  if (!(ucb_g < 0.0)) return kNegInf;
  return ucb(state.model_f, cfg.bound_f, x) + cfg.tau * std::log(-ucb_g);
}

Selection select_action(const BoState& state, const SafeBoConfig& cfg) {
  const std::vector<Point> grid = make_grid(cfg);
  Eigen::MatrixXd kx_rows;
  Eigen::VectorXd prior_diag;
  grid_rows_for(state, grid, kx_rows, prior_diag, cfg);
  return select_from_scores(evaluate_grid(state, cfg, kx_rows, prior_diag), grid, cfg);
}

BoState observe(const BoState& state, const SafeBoConfig& cfg, const Point& x_t, double y_f,
                double y_g, bool feasible) {
  if (!in_domain(cfg, x_t)) {
    throw std::invalid_argument("observe: action lies outside the domain");
  }
  if (!std::isfinite(y_f) || !std::isfinite(y_g)) {
    throw std::invalid_argument("observe: labels must be finite");
  }
  std::vector<Observation> history = state.history;
  history.push_back(Observation{x_t, y_f, y_g, feasible});

  std::vector<Point> inputs;
  inputs.reserve(history.size());
  Eigen::VectorXd labels_f(static_cast<Eigen::Index>(history.size()));
  Eigen::VectorXd labels_g(static_cast<Eigen::Index>(history.size()));
  for (std::size_t i = 0; i < history.size(); ++i) {
    inputs.push_back(history[i].x);
    labels_f(static_cast<Eigen::Index>(i)) = history[i].y_f;
    labels_g(static_cast<Eigen::Index>(i)) = history[i].y_g;
  }
  auto [model_f, model_g] = fit_pair(cfg.kernel, inputs, labels_f, labels_g, cfg.sigma_m);
  return BoState{std::move(model_f), std::move(model_g), state.t + 1, std::move(history)};
}

SafeRegion safe_region(const BoState& state, const SafeBoConfig& cfg) {
  const std::vector<Point> grid = make_grid(cfg);
  Eigen::MatrixXd kx_rows;
  Eigen::VectorXd prior_diag;
  grid_rows_for(state, grid, kx_rows, prior_diag, cfg);
  return region_from_ucb(evaluate_grid(state, cfg, kx_rows, prior_diag).ucb_g, cfg);
}

SafeRegion safe_region_from_scores(const std::vector<double>& ucb_g_values,
                                   const SafeBoConfig& cfg) {
  return region_from_ucb(
      Eigen::Map<const Eigen::VectorXd>(ucb_g_values.data(),
                                        static_cast<Eigen::Index>(ucb_g_values.size())),
      cfg);
}

std::vector<BoStepRecord> run(const SafeBoConfig& cfg, const Oracle& oracle_f,
                              const Oracle& oracle_g, const NoiseSource& noise, int steps) {
  if (steps < 1) {
    throw std::invalid_argument("run: steps must be >= 1");
  }
  validate_config(cfg);
  const std::vector<Point> grid = make_grid(cfg);
  const Eigen::Index n_grid = static_cast<Eigen::Index>(grid.size());

  // Cross-covariance rows against the grid, grown one row per observation so
  // kernel evaluations are not repeated across steps.
  Eigen::MatrixXd kx_rows(steps, n_grid);
  Eigen::VectorXd prior_diag(n_grid);
  for (Eigen::Index j = 0; j < n_grid; ++j) {
    const auto& x = grid[static_cast<std::size_t>(j)];
    prior_diag(j) = kernel_eval(cfg.kernel, x, x);
  }

  BoState state = initial_state(cfg);
  GridEval eval = evaluate_grid(state, cfg, kx_rows.topRows(0), prior_diag);

  std::vector<BoStepRecord> records;
  records.reserve(static_cast<std::size_t>(steps));
  for (int t = 1; t <= steps; ++t) {
    const Selection sel = select_from_scores(eval, grid, cfg);
    const auto [noise_f, noise_g] = noise(t);
    const double y_f = oracle_f(sel.x) + noise_f;
    const double y_g = oracle_g(sel.x) + noise_g;

    for (Eigen::Index j = 0; j < n_grid; ++j) {
      kx_rows(t - 1, j) = kernel_eval(cfg.kernel, sel.x, grid[static_cast<std::size_t>(j)]);
    }
    state = observe(state, cfg, sel.x, y_f, y_g, sel.feasible);
    eval = evaluate_grid(state, cfg, kx_rows.topRows(t), prior_diag);

    BoStepRecord record;
    record.x = sel.x;
    record.y_f = y_f;
    record.y_g = y_g;
    record.feasible = sel.feasible;
    record.safe_measure = region_from_ucb(eval.ucb_g, cfg).measure;
    record.beta = bound_beta(state.model_g, cfg.bound_g);
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace safebo
