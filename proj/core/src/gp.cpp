#include "safebo/gp.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>
#include <utility>

namespace safebo {

ConditioningError::ConditioningError(Eigen::Index pivot_index, double pivot_value)
    : std::runtime_error("matrix not numerically positive definite: pivot " +
                         std::to_string(pivot_index) + " is " +
                         std::to_string(pivot_value)),
      pivot_index_(pivot_index),
      pivot_value_(pivot_value) {}

namespace {

// Cholesky via Eigen; on failure a plain right-looking pass identifies the
// first non-positive pivot for the error message.
Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& matrix) {
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::MatrixXd a = matrix;
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= a(j, k) * a(j, k);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw ConditioningError(j, pivot);
    }
    a(j, j) = std::sqrt(pivot);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / a(j, j);
    }
  }
  return a.triangularView<Eigen::Lower>();
}

std::shared_ptr<GpFactor> make_factor(const KernelSpec& kernel,
                                      const std::vector<Point>& inputs, double sigma_m,
                                      double jitter) {
  if (sigma_m < 0.0 || jitter < 0.0) {
    throw std::invalid_argument("fit: sigma_m and jitter must be nonnegative");
  }
  auto factor = std::make_shared<GpFactor>(kernel, inputs, sigma_m, jitter);
  factor->gram = gram_matrix(kernel, inputs);
  Eigen::MatrixXd shifted = factor->gram;
  shifted.diagonal().array() += sigma_m * sigma_m + jitter;
  factor->chol = cholesky_or_throw(shifted);
  return factor;
}

Eigen::VectorXd solve_factor(const GpFactor& factor, const Eigen::VectorXd& rhs) {
  Eigen::VectorXd out = factor.chol.triangularView<Eigen::Lower>().solve(rhs);
  factor.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(out);
  return out;
}

void check_labels(const Eigen::VectorXd& labels, std::size_t n_inputs) {
  if (static_cast<std::size_t>(labels.size()) != n_inputs) {
    throw std::invalid_argument("fit: " + std::to_string(n_inputs) + " inputs but " +
                                std::to_string(labels.size()) + " labels");
  }
  if (!labels.allFinite()) {
    throw std::invalid_argument("fit: labels must be finite");
  }
}

}  // namespace

GpModel fit(const KernelSpec& kernel, const Dataset& data, double sigma_m, double jitter) {
  check_labels(data.labels, data.inputs.size());
  auto factor = make_factor(kernel, data.inputs, sigma_m, jitter);
  Eigen::VectorXd alpha = solve_factor(*factor, data.labels);
  return GpModel(std::move(factor), data.labels, std::move(alpha));
}

std::pair<GpModel, GpModel> fit_pair(const KernelSpec& kernel,
                                     const std::vector<Point>& inputs,
                                     const Eigen::VectorXd& labels_a,
                                     const Eigen::VectorXd& labels_b, double sigma_m,
                                     double jitter) {
  check_labels(labels_a, inputs.size());
  check_labels(labels_b, inputs.size());
  std::shared_ptr<const GpFactor> factor = make_factor(kernel, inputs, sigma_m, jitter);
  Eigen::VectorXd alpha_a = solve_factor(*factor, labels_a);
  Eigen::VectorXd alpha_b = solve_factor(*factor, labels_b);
  return {GpModel(factor, labels_a, std::move(alpha_a)),
          GpModel(factor, labels_b, std::move(alpha_b))};
}

class PosteriorEvaluator {
 public:
  static double mean(const GpModel& model, const Eigen::VectorXd& kx) {
    return model.alpha_.size() == 0 ? 0.0 : kx.dot(model.alpha_);
  }

  static Eigen::VectorXd mean_batch(const GpModel& model, const Eigen::MatrixXd& kx_rows) {
    return kx_rows.transpose() * model.alpha_;
  }

  static double var_gp(const GpModel& model, const Eigen::VectorXd& kx, double kxx) {
    const auto& factor = *model.factor_;
    if (kx.size() == 0) return kxx;
    const Eigen::VectorXd v = factor.chol.triangularView<Eigen::Lower>().solve(kx);
    const double var = kxx - v.squaredNorm();
    if (var < 0.0) {
      factor.variance_clamps.fetch_add(1);
      return 0.0;
    }
    return var;
  }

  static double var_wk(const GpModel& model, const Eigen::VectorXd& kx) {
    const auto& factor = *model.factor_;
    if (kx.size() == 0 || factor.sigma_m == 0.0) return 0.0;
    return factor.sigma_m * factor.sigma_m * solve_factor(factor, kx).squaredNorm();
  }

  static PosteriorBatch batch(const GpModel& model, const Eigen::MatrixXd& kx_rows,
                              const Eigen::VectorXd& prior_diag) {
    const auto& factor = *model.factor_;
    PosteriorBatch out;
    if (kx_rows.rows() == 0) {
      out.mean = Eigen::VectorXd::Zero(prior_diag.size());
      out.var_gp = prior_diag;
      out.var_wk = Eigen::VectorXd::Zero(prior_diag.size());
      return out;
    }
    out.mean = kx_rows.transpose() * model.alpha_;
    Eigen::MatrixXd v = factor.chol.triangularView<Eigen::Lower>().solve(kx_rows);
    out.var_gp = prior_diag - v.colwise().squaredNorm().transpose();
    for (Eigen::Index i = 0; i < out.var_gp.size(); ++i) {
      if (out.var_gp(i) < 0.0) {
        factor.variance_clamps.fetch_add(1);
        out.var_gp(i) = 0.0;
      }
    }
    if (factor.sigma_m == 0.0) {
      out.var_wk = Eigen::VectorXd::Zero(prior_diag.size());
    } else {
      factor.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(v);
      out.var_wk = factor.sigma_m * factor.sigma_m *
                   v.colwise().squaredNorm().transpose();
    }
    return out;
  }
};

double posterior_mean(const GpModel& model, const Point& x) {
  return PosteriorEvaluator::mean(model, kernel_vector(model.kernel(), model.inputs(), x));
}

double posterior_variance(const GpModel& model, const Point& x) {
  return PosteriorEvaluator::var_gp(model, kernel_vector(model.kernel(), model.inputs(), x),
                                    kernel_eval(model.kernel(), x, x));
}

double wiener_variance(const GpModel& model, const Point& x) {
  return PosteriorEvaluator::var_wk(model, kernel_vector(model.kernel(), model.inputs(), x));
}

double epistemic_gap(const GpModel& model, const Point& x) {
  const Eigen::VectorXd kx = kernel_vector(model.kernel(), model.inputs(), x);
  const double var_gp = PosteriorEvaluator::var_gp(model, kx, kernel_eval(model.kernel(), x, x));
  const double var_wk = PosteriorEvaluator::var_wk(model, kx);
  return std::sqrt(std::max(var_gp - var_wk, 0.0));
}

PosteriorQuery posterior_query(const GpModel& model, const Point& x) {
  const Eigen::VectorXd kx = kernel_vector(model.kernel(), model.inputs(), x);
  PosteriorQuery query;
  query.mean = PosteriorEvaluator::mean(model, kx);
  query.var_gp = PosteriorEvaluator::var_gp(model, kx, kernel_eval(model.kernel(), x, x));
  query.var_wk = PosteriorEvaluator::var_wk(model, kx);
  return query;
}

PosteriorBatch posterior_batch(const GpModel& model, const std::vector<Point>& xs) {
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd kx_rows(model.data_size(), n);
  Eigen::VectorXd prior_diag(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    kx_rows.col(j) = kernel_vector(model.kernel(), model.inputs(), xs[j]);
    prior_diag(j) = kernel_eval(model.kernel(), xs[j], xs[j]);
  }
  return PosteriorEvaluator::batch(model, kx_rows, prior_diag);
}

PosteriorBatch posterior_batch_with_rows(const GpModel& model,
                                         const Eigen::MatrixXd& kx_rows,
                                         const Eigen::VectorXd& prior_diag) {
  return PosteriorEvaluator::batch(model, kx_rows, prior_diag);
}

Eigen::VectorXd posterior_mean_batch(const GpModel& model, const Eigen::MatrixXd& kx_rows) {
  if (kx_rows.rows() == 0) return Eigen::VectorXd::Zero(kx_rows.cols());
  return PosteriorEvaluator::mean_batch(model, kx_rows);
}

double feature_space_gap(const FeatureMap& map, const std::vector<Point>& xs,
                         double sigma_m, const Point& x) {
  if (!(sigma_m > 0.0)) {
    throw std::invalid_argument("feature_space_gap requires sigma_m > 0");
  }
  const Eigen::VectorXd phi_x = map(x);
  const Eigen::Index n_phi = phi_x.size();
  Eigen::MatrixXd phi(n_phi, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    phi.col(static_cast<Eigen::Index>(i)) = map(xs[i]);
  }
  Eigen::MatrixXd shifted = phi * phi.transpose();
  shifted.diagonal().array() += sigma_m * sigma_m;
  // phi(x)^T M^{-2} phi(x) = ||M^{-1} phi(x)||^2 for symmetric M
  const Eigen::VectorXd z = shifted.ldlt().solve(phi_x);
  const double s2 = sigma_m * sigma_m;
  return s2 * s2 * z.squaredNorm();
}

double feature_space_gap(const KernelSpec& kernel, const std::vector<Point>& xs,
                         double sigma_m, const Point& x) {
  if (!kernel.is_finite_feature()) {
    throw std::invalid_argument("feature_space_gap requires a finite-feature kernel");
  }
  return feature_space_gap(kernel.feature().map, xs, sigma_m, x);
}

}  // namespace safebo
