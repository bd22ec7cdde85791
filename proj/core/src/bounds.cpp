#include "safebo/bounds.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace safebo {

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::WienerKernel: return "wk";
    case BoundKind::AbbasiYadkori: return "ay";
    case BoundKind::Fiedler: return "fiedler";
  }
  throw std::invalid_argument("unknown bound kind");
}

BoundKind bound_kind_from_string(const std::string& name) {
  if (name == "wk") return BoundKind::WienerKernel;
  if (name == "ay") return BoundKind::AbbasiYadkori;
  if (name == "fiedler") return BoundKind::Fiedler;
  throw std::invalid_argument("unknown bound kind '" + name + "' (expected wk, ay or fiedler)");
}

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("confidence parameter delta must lie in (0, 1), got " +
                                std::to_string(delta));
  }
}

// ln det(sigma_m^{-2} K + I) as twice the log-diagonal sum of the Cholesky
// factor.
double shifted_log_det(const Eigen::MatrixXd& gram, double sigma_m) {
  if (!(sigma_m > 0.0)) {
    throw std::invalid_argument("sigma_m must be positive for the determinant condition");
  }
  Eigen::MatrixXd shifted = gram / (sigma_m * sigma_m);
  shifted.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("log-determinant: matrix not numerically positive definite");
  }
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

BoundSpec::BoundSpec(BoundKind kind_, double rkhs_bound_, double delta_)
    : kind(kind_), rkhs_bound(rkhs_bound_), delta(delta_) {
  if (!(rkhs_bound > 0.0)) {
    throw std::invalid_argument("RKHS norm bound B must be positive");
  }
  check_delta(delta);
}

double beta_wk(double delta) {
  check_delta(delta);
  return std::sqrt(2.0 * std::log(2.0 / delta));
}

double beta_1(double delta, const Eigen::MatrixXd& gram, double sigma_m) {
  check_delta(delta);
  return std::sqrt(shifted_log_det(gram, sigma_m) + 2.0 * std::log(1.0 / delta));
}

double beta_2(double delta, Eigen::Index d) {
  check_delta(delta);
  if (d < 0) {
    throw std::invalid_argument("data size must be nonnegative");
  }
  const double dd = static_cast<double>(d);
  const double log_inv = std::log(1.0 / delta);
  return std::sqrt(dd + 2.0 * std::sqrt(dd) * std::sqrt(log_inv) + 2.0 * log_inv);
}

namespace {

BoundValue bound_from_posterior(const BoundSpec& spec, double var_gp, double var_wk,
                                double beta) {
  const double sigma_gp = std::sqrt(var_gp);
  const double sigma_wk = std::sqrt(var_wk);
  BoundValue value;
  value.beta = beta;
  switch (spec.kind) {
    case BoundKind::WienerKernel:
      value.rkhs_term = spec.rkhs_bound * std::sqrt(std::max(var_gp - var_wk, 0.0));
      value.noise_term = beta * sigma_wk;
      break;
    case BoundKind::AbbasiYadkori:
      // (B + beta_1) sigma_gp, reported as its two summands
      value.rkhs_term = spec.rkhs_bound * sigma_gp;
      value.noise_term = beta * sigma_gp;
      break;
    case BoundKind::Fiedler:
      // beta_2 sigma_m ||(K + sigma_m^2 I)^{-1} k(x)|| = beta_2 sigma_wk
      value.rkhs_term = spec.rkhs_bound * sigma_gp;
      value.noise_term = beta * sigma_wk;
      break;
  }
  value.eta = value.rkhs_term + value.noise_term;
  return value;
}

}  // namespace

double bound_beta(const GpModel& model, const BoundSpec& spec) {
  switch (spec.kind) {
    case BoundKind::WienerKernel: return beta_wk(spec.delta);
    case BoundKind::AbbasiYadkori: return beta_1(spec.delta, model.gram(), model.sigma_m());
    case BoundKind::Fiedler: return beta_2(spec.delta, model.data_size());
  }
  throw std::invalid_argument("unknown bound kind");
}

BoundValue error_bound(const GpModel& model, const BoundSpec& spec, const Point& x) {
  const PosteriorQuery query = posterior_query(model, x);
  return bound_from_posterior(spec, query.var_gp, query.var_wk, bound_beta(model, spec));
}

double ucb(const GpModel& model, const BoundSpec& spec, const Point& x) {
  return posterior_mean(model, x) + error_bound(model, spec, x).eta;
}

std::vector<BoundValue> error_bound_batch(const GpModel& model, const BoundSpec& spec,
                                          const PosteriorBatch& posterior) {
  const double beta = bound_beta(model, spec);
  std::vector<BoundValue> values(static_cast<std::size_t>(posterior.var_gp.size()));
  for (Eigen::Index i = 0; i < posterior.var_gp.size(); ++i) {
    values[static_cast<std::size_t>(i)] =
        bound_from_posterior(spec, posterior.var_gp(i), posterior.var_wk(i), beta);
  }
  return values;
}

GammaCondition gamma_condition(const Eigen::MatrixXd& gram, double sigma_m) {
  GammaCondition condition;
  condition.log_gamma = shifted_log_det(gram, sigma_m);
  condition.gamma = std::exp(condition.log_gamma);
  condition.holds = condition.log_gamma > std::log(4.0);
  return condition;
}

}  // namespace safebo
