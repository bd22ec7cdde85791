#include "safebo/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace safebo {

KernelSpec KernelSpec::squared_exponential(double sigma, double lengthscale) {
  if (!(sigma > 0.0) || !(lengthscale > 0.0)) {
    throw std::invalid_argument("squared-exponential kernel requires sigma > 0 and lengthscale > 0");
  }
  return KernelSpec(SquaredExponential{sigma, lengthscale});
}

KernelSpec KernelSpec::finite_feature(FeatureMap map, int dim) {
  if (!map) {
    throw std::invalid_argument("finite-feature kernel requires a feature map");
  }
  if (dim < 1) {
    throw std::invalid_argument("finite-feature kernel requires feature dimension >= 1");
  }
  return KernelSpec(FiniteFeature{std::move(map), dim});
}

namespace {

void check_same_dim(const Point& x, const Point& x_prime) {
  if (x.size() != x_prime.size()) {
    throw std::invalid_argument("kernel inputs have mismatched dimensions: " +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(x_prime.size()));
  }
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& x_prime) {
  check_same_dim(x, x_prime);
  if (spec.is_squared_exponential()) {
    const auto& se = spec.se();
    const double sq_dist = (x - x_prime).squaredNorm();
    return se.sigma * se.sigma * std::exp(-sq_dist / (2.0 * se.lengthscale * se.lengthscale));
  }
  const auto& ff = spec.feature();
  return ff.map(x).dot(ff.map(x_prime));
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const std::vector<Point>& xs) {
  const Eigen::Index d = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd gram(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double value = kernel_eval(spec, xs[i], xs[j]);
      gram(i, j) = value;
      gram(j, i) = value;
    }
  }
  return gram;
}

Eigen::VectorXd kernel_vector(const KernelSpec& spec, const std::vector<Point>& xs,
                              const Point& x) {
  Eigen::VectorXd result(static_cast<Eigen::Index>(xs.size()));
  for (Eigen::Index i = 0; i < result.size(); ++i) {
    result(i) = kernel_eval(spec, x, xs[i]);
  }
  return result;
}

double rkhs_norm_of_expansion(const KernelSpec& spec, const std::vector<Point>& centers,
                              const Eigen::VectorXd& coeffs) {
  if (static_cast<Eigen::Index>(centers.size()) != coeffs.size()) {
    throw std::invalid_argument("rkhs_norm_of_expansion: " + std::to_string(centers.size()) +
                                " centers but " + std::to_string(coeffs.size()) + " coefficients");
  }
  const Eigen::MatrixXd gram = gram_matrix(spec, centers);
  const double quad = coeffs.dot(gram * coeffs);
  return std::sqrt(std::max(quad, 0.0));
}

}  // namespace safebo
