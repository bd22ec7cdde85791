#ifndef SAFEBO_BOUNDS_HPP
#define SAFEBO_BOUNDS_HPP

#include "safebo/gp.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace safebo {

/// The three probabilistic uniform error bounds on |mu(x) - g(x)|:
///   WienerKernel   eta = B sqrt(var_gp - var_wk) + sqrt(2 ln(2/delta)) sigma_wk
///   AbbasiYadkori  eta = (B + beta_1) sigma_gp
///   Fiedler        eta = B sigma_gp + beta_2 sigma_wk
enum class BoundKind { WienerKernel, AbbasiYadkori, Fiedler };

std::string to_string(BoundKind kind);
BoundKind bound_kind_from_string(const std::string& name);

struct BoundSpec {
  BoundSpec(BoundKind kind, double rkhs_bound, double delta);

  BoundKind kind;
  double rkhs_bound;  // B >= RKHS norm of the unknown function
  double delta;       // confidence parameter in (0, 1)
};

struct BoundValue {
  double eta = 0.0;         // rkhs_term + noise_term, exact by construction
  double beta = 0.0;
  double rkhs_term = 0.0;
  double noise_term = 0.0;
};

/// sqrt(2 ln(2/delta)); independent of the data and the query point.
double beta_wk(double delta);

/// sqrt(ln det(sigma_m^{-2} K + I) + 2 ln(1/delta)), log-determinant via the
/// Cholesky log-diagonal (the raw determinant overflows for moderate D).
double beta_1(double delta, const Eigen::MatrixXd& gram, double sigma_m);

/// sqrt(D + 2 sqrt(D) sqrt(ln(1/delta)) + 2 ln(1/delta)).
double beta_2(double delta, Eigen::Index d);

/// The bound parameter beta(delta) for the given model/spec (constant in the
/// data for the Wiener-kernel bound, data-dependent for the other two).
double bound_beta(const GpModel& model, const BoundSpec& spec);

BoundValue error_bound(const GpModel& model, const BoundSpec& spec, const Point& x);

/// Upper confidence bound mu(x) + eta(x).
double ucb(const GpModel& model, const BoundSpec& spec, const Point& x);

/// Bound values for a batch of already-evaluated posteriors. beta_1 is
/// computed once from the model's Gram matrix.
std::vector<BoundValue> error_bound_batch(const GpModel& model, const BoundSpec& spec,
                                          const PosteriorBatch& posterior);

struct GammaCondition {
  double gamma = 1.0;      // det(sigma_m^{-2} K + I); +inf if it overflows
  double log_gamma = 0.0;
  bool holds = false;      // gamma > 4, evaluated on the log scale
};

/// Determinant condition under which the Wiener-kernel bound strictly
/// dominates the Abbasi-Yadkori bound.
GammaCondition gamma_condition(const Eigen::MatrixXd& gram, double sigma_m);

}  // namespace safebo

#endif  // SAFEBO_BOUNDS_HPP
