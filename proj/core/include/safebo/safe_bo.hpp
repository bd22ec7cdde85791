#ifndef SAFEBO_SAFE_BO_HPP
#define SAFEBO_SAFE_BO_HPP

#include "safebo/bounds.hpp"
#include "safebo/gp.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace safebo {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] double length() const { return hi - lo; }
};

/// Configuration of the interior-point safe BO loop. The acquisition
/// alpha_f(x) + tau ln(-alpha_g(x)) is maximized by exhaustive evaluation on
/// a uniform grid (grid_points per dimension), which keeps the argmax
/// reproducible and makes the safe-region measure well defined.
struct SafeBoConfig {
  std::vector<Interval> domain;  // one closed interval per input dimension
  int grid_points = 1001;        // per dimension, >= 2
  double tau = 1e-6;             // log-barrier weight
  Point x_safe;                  // known safe fallback action
  BoundSpec bound_f;
  BoundSpec bound_g;
  double sigma_m = 1.0;
  KernelSpec kernel;
};

struct Observation {
  Point x;
  double y_f = 0.0;
  double y_g = 0.0;
  bool feasible = false;
};

/// Immutable loop state: both surrogates are fitted on exactly the first t
/// observations. observe() returns a new state.
struct BoState {
  GpModel model_f;
  GpModel model_g;
  int t = 0;
  std::vector<Observation> history;
};

struct Selection {
  Point x;
  bool feasible = false;  // true iff x came from the feasible grid set
};

struct SafeRegion {
  double measure = 0.0;
  std::vector<bool> mask;  // ucb_g(grid_i) <= 0
};

struct BoStepRecord {
  Point x;
  double y_f = 0.0;
  double y_g = 0.0;
  bool feasible = false;
  double safe_measure = 0.0;  // after the surrogate update at this step
  double beta = 0.0;          // bound parameter of bound_g after the update
};

/// Additive noise for the (f, g) observation channels at a given step.
using NoiseSource = std::function<std::pair<double, double>(int step)>;
using Oracle = std::function<double(const Point&)>;

void validate_config(const SafeBoConfig& cfg);

/// Uniform product grid over the domain, in lexicographic order (first
/// dimension slowest), grid_points per dimension.
std::vector<Point> make_grid(const SafeBoConfig& cfg);

BoState initial_state(const SafeBoConfig& cfg);

/// Log-barrier acquisition: ucb_f(x) + tau ln(-ucb_g(x)) when ucb_g(x) < 0,
/// -inf otherwise. Infeasibility is a value, not an error.
double acquisition_score(const BoState& state, const SafeBoConfig& cfg, const Point& x);

/// Grid argmax of the acquisition; ties resolve to the smallest grid index
/// (lexicographically smallest coordinates). Falls back to (x_safe, false)
/// when no grid point is feasible.
Selection select_action(const BoState& state, const SafeBoConfig& cfg);

/// New state with both surrogates refitted on t+1 observations.
BoState observe(const BoState& state, const SafeBoConfig& cfg, const Point& x_t,
                double y_f, double y_g, bool feasible);

SafeRegion safe_region(const BoState& state, const SafeBoConfig& cfg);

/// Measure of {grid_i : ucb_g_values[i] <= 0} as a fraction of the domain
/// volume.
SafeRegion safe_region_from_scores(const std::vector<double>& ucb_g_values,
                                   const SafeBoConfig& cfg);

/// Runs T steps of select/observe with y = oracle(x) + noise. Deterministic
/// given (cfg, oracles, noise).
std::vector<BoStepRecord> run(const SafeBoConfig& cfg, const Oracle& oracle_f,
                              const Oracle& oracle_g, const NoiseSource& noise, int steps);

}  // namespace safebo

#endif  // SAFEBO_SAFE_BO_HPP
