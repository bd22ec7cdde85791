#ifndef SAFEBO_TESTS_SUPPORT_HPP
#define SAFEBO_TESTS_SUPPORT_HPP

#include "safebo/kernels.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace safebo::testing {

inline Point p1(double x) {
  Point p(1);
  p(0) = x;
  return p;
}

inline std::vector<Point> points1(std::initializer_list<double> values) {
  std::vector<Point> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(p1(v));
  return out;
}

inline std::vector<Point> grid1(double lo, double hi, int n) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(p1(lo + (hi - lo) * static_cast<double>(i) / (n - 1)));
  }
  return out;
}

// Independent root finder used as the oracle for safe-region boundaries.
inline double bisect(const std::function<double(double)>& fn, double lo, double hi,
                     double tol = 1e-12) {
  double f_lo = fn(lo);
  if (f_lo == 0.0) return lo;
  if (fn(hi) * f_lo > 0.0) {
    throw std::invalid_argument("bisect: endpoints do not bracket a root");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = fn(mid);
    if (f_mid == 0.0) return mid;
    if (f_mid * f_lo > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct TestRng {
  explicit TestRng(std::uint64_t seed) : engine(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine);
  }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine);
  }
  double normal(double sigma = 1.0) {
    return std::normal_distribution<double>(0.0, sigma)(engine);
  }
  std::mt19937_64 engine;
};

}  // namespace safebo::testing

#endif  // SAFEBO_TESTS_SUPPORT_HPP
