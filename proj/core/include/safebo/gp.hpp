#ifndef SAFEBO_GP_HPP
#define SAFEBO_GP_HPP

#include "safebo/kernels.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace safebo {

/// Thrown when the regularized Gram matrix is not numerically positive
/// definite. Carries the first non-positive Cholesky pivot.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(Eigen::Index pivot_index, double pivot_value);
  [[nodiscard]] Eigen::Index pivot_index() const { return pivot_index_; }
  [[nodiscard]] double pivot_value() const { return pivot_value_; }

 private:
  Eigen::Index pivot_index_;
  double pivot_value_;
};

struct Dataset {
  std::vector<Point> inputs;
  Eigen::VectorXd labels;
};

/// Kernel, design and Cholesky factor of K + (sigma_m^2 + jitter) I, shared
/// between models fitted on the same inputs (e.g. objective and constraint
/// surrogates that only differ in labels).
struct GpFactor {
  GpFactor(KernelSpec k, std::vector<Point> ins, double sm, double jit)
      : kernel(std::move(k)), inputs(std::move(ins)), sigma_m(sm), jitter(jit) {}

  KernelSpec kernel;
  std::vector<Point> inputs;
  double sigma_m = 0.0;
  double jitter = 0.0;
  Eigen::MatrixXd gram;    // K, without the diagonal shift
  Eigen::MatrixXd chol;    // lower-triangular L with L L^T = K + (sigma_m^2 + jitter) I
  mutable std::atomic<std::int64_t> variance_clamps{0};
};

struct PosteriorQuery {
  double mean = 0.0;
  double var_gp = 0.0;
  double var_wk = 0.0;
};

/// Posterior evaluated at a batch of query points.
struct PosteriorBatch {
  Eigen::VectorXd mean;
  Eigen::VectorXd var_gp;
  Eigen::VectorXd var_wk;
};

/// Immutable exact-GP model. Fitting creates a new value; reads are safe to
/// run concurrently.
class GpModel {
 public:
  [[nodiscard]] const KernelSpec& kernel() const { return factor_->kernel; }
  [[nodiscard]] const std::vector<Point>& inputs() const { return factor_->inputs; }
  [[nodiscard]] const Eigen::VectorXd& labels() const { return labels_; }
  [[nodiscard]] double sigma_m() const { return factor_->sigma_m; }
  [[nodiscard]] double jitter() const { return factor_->jitter; }
  [[nodiscard]] Eigen::Index data_size() const { return labels_.size(); }

  /// Lower-triangular Cholesky factor of K + (sigma_m^2 + jitter) I.
  [[nodiscard]] const Eigen::MatrixXd& factor() const { return factor_->chol; }
  [[nodiscard]] const Eigen::MatrixXd& gram() const { return factor_->gram; }
  [[nodiscard]] std::shared_ptr<const GpFactor> shared_factor() const { return factor_; }

  /// Number of times a negative posterior variance was clamped to zero.
  [[nodiscard]] std::int64_t variance_clamp_count() const {
    return factor_->variance_clamps.load();
  }

 private:
  friend GpModel fit(const KernelSpec&, const Dataset&, double, double);
  friend std::pair<GpModel, GpModel> fit_pair(const KernelSpec&, const std::vector<Point>&,
                                              const Eigen::VectorXd&, const Eigen::VectorXd&,
                                              double, double);
  friend class PosteriorEvaluator;

  GpModel(std::shared_ptr<const GpFactor> factor, Eigen::VectorXd labels,
          Eigen::VectorXd alpha)
      : factor_(std::move(factor)), labels_(std::move(labels)), alpha_(std::move(alpha)) {}

  std::shared_ptr<const GpFactor> factor_;
  Eigen::VectorXd labels_;
  Eigen::VectorXd alpha_;  // (K + (sigma_m^2 + jitter) I)^{-1} y
};

/// Fits an exact GP. sigma_m is the Gaussian noise standard deviation; for
/// sub-Gaussian noise pass the square root of its variance proxy, nothing
/// else changes. Throws ConditioningError if K + (sigma_m^2 + jitter) I is
/// not numerically positive definite, std::invalid_argument on malformed
/// data (size mismatch, non-finite labels, sigma_m or jitter < 0).
GpModel fit(const KernelSpec& kernel, const Dataset& data, double sigma_m,
            double jitter = 0.0);

/// Fits two models on the same inputs (one factorization, two label vectors).
std::pair<GpModel, GpModel> fit_pair(const KernelSpec& kernel,
                                     const std::vector<Point>& inputs,
                                     const Eigen::VectorXd& labels_a,
                                     const Eigen::VectorXd& labels_b, double sigma_m,
                                     double jitter = 0.0);

/// k(x)^T (K + sigma_m^2 I)^{-1} y; zero for an empty model.
double posterior_mean(const GpModel& model, const Point& x);

/// k(x,x) - k(x)^T (K + sigma_m^2 I)^{-1} k(x), clamped below at zero (each
/// clamp increments the model's counter).
double posterior_variance(const GpModel& model, const Point& x);

/// Wiener kernel variance sigma_m^2 ||(K + sigma_m^2 I)^{-1} k(x)||^2.
double wiener_variance(const GpModel& model, const Point& x);

/// sqrt(max(var_gp - var_wk, 0)), the data-independent part of the
/// uncertainty that multiplies the RKHS norm bound.
double epistemic_gap(const GpModel& model, const Point& x);

PosteriorQuery posterior_query(const GpModel& model, const Point& x);
PosteriorBatch posterior_batch(const GpModel& model, const std::vector<Point>& xs);

/// Same posteriors with the cross-covariance rows supplied by the caller
/// (row i of kx_rows = kernel vector of data point i over the queries).
PosteriorBatch posterior_batch_with_rows(const GpModel& model,
                                         const Eigen::MatrixXd& kx_rows,
                                         const Eigen::VectorXd& prior_diag);

/// Posterior means only, for models sharing a factor with an already
/// evaluated batch.
Eigen::VectorXd posterior_mean_batch(const GpModel& model, const Eigen::MatrixXd& kx_rows);

/// Feature-space value of var_gp - var_wk for a finite-feature kernel:
/// sigma_m^4 phi(x)^T (sigma_m^2 I + Phi Phi^T)^{-2} phi(x). Independent of
/// the kernel-space Cholesky route; used to cross-validate epistemic_gap.
/// Throws std::invalid_argument for non-finite-feature kernels.
double feature_space_gap(const KernelSpec& kernel, const std::vector<Point>& xs,
                         double sigma_m, const Point& x);
double feature_space_gap(const FeatureMap& map, const std::vector<Point>& xs,
                         double sigma_m, const Point& x);

}  // namespace safebo

#endif  // SAFEBO_GP_HPP
