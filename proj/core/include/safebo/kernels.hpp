#ifndef SAFEBO_KERNELS_HPP
#define SAFEBO_KERNELS_HPP

#include <Eigen/Dense>

#include <functional>
#include <variant>
#include <vector>

namespace safebo {

/// Input points are fixed-dimension real vectors (dimension 1 in the
/// shipped benchmark).
using Point = Eigen::VectorXd;

/// Maps an input point to a feature vector of fixed dimension.
using FeatureMap = std::function<Eigen::VectorXd(const Point&)>;

/// Squared-exponential kernel sigma^2 * exp(-||x-x'||^2 / (2 l^2)).
struct SquaredExponential {
  double sigma;
  double lengthscale;
};

/// Explicit finite-feature kernel k(x,x') = phi(x)^T phi(x'), used as the
/// feature-space backend for variance-gap cross checks.
struct FiniteFeature {
  FeatureMap map;
  int dim;  // n_phi, constant across inputs
};

class KernelSpec {
 public:
  static KernelSpec squared_exponential(double sigma, double lengthscale);
  static KernelSpec finite_feature(FeatureMap map, int dim);

  [[nodiscard]] bool is_squared_exponential() const {
    return std::holds_alternative<SquaredExponential>(variant_);
  }
  [[nodiscard]] bool is_finite_feature() const {
    return std::holds_alternative<FiniteFeature>(variant_);
  }
  [[nodiscard]] const SquaredExponential& se() const {
    return std::get<SquaredExponential>(variant_);
  }
  [[nodiscard]] const FiniteFeature& feature() const {
    return std::get<FiniteFeature>(variant_);
  }

 private:
  explicit KernelSpec(std::variant<SquaredExponential, FiniteFeature> v)
      : variant_(std::move(v)) {}
  std::variant<SquaredExponential, FiniteFeature> variant_;
};

/// k(x, x'). Throws std::invalid_argument on dimension mismatch.
double kernel_eval(const KernelSpec& spec, const Point& x, const Point& x_prime);

/// D x D Gram matrix K_ij = k(x_i, x_j). The upper triangle is computed and
/// mirrored, so symmetry is exact.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const std::vector<Point>& xs);

/// Vector (k(x, x_1), ..., k(x, x_D)).
Eigen::VectorXd kernel_vector(const KernelSpec& spec, const std::vector<Point>& xs,
                              const Point& x);

/// RKHS norm sqrt(c^T K_z c) of the expansion f = sum_i c_i k(., z_i).
double rkhs_norm_of_expansion(const KernelSpec& spec, const std::vector<Point>& centers,
                              const Eigen::VectorXd& coeffs);

}  // namespace safebo

#endif  // SAFEBO_KERNELS_HPP
