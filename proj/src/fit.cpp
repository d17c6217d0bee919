#include "bubble/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "bubble/common.hpp"

namespace bubble {

QuadraticFit fit_quadratic(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw FitError("x and y counts differ");
  if (xs.size() < 4) throw FitError("quadratic fit needs at least four points");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw FitError("non-finite sample");
  if (std::set<double>(xs.begin(), xs.end()).size() < 3) throw FitError("need at least three distinct x values");

  // Centre and scale x for conditioning, then map the coefficients back.
  const auto n = static_cast<Eigen::Index>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double span = 0.0;
  for (double x : xs) span = std::max(span, std::abs(x - mean));
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (xs[static_cast<std::size_t>(i)] - mean) / span;
    a(i, 0) = 1.0;
    a(i, 1) = u;
    a(i, 2) = u * u;
    b(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d q = a.colPivHouseholderQr().solve(b);
  const double d0 = q(0), d1 = q(1) / span, d2 = q(2) / (span * span);
  QuadraticFit f;
  f.c2 = d2;
  f.c1 = d1 - 2.0 * d2 * mean;
  f.c0 = d0 - d1 * mean + d2 * mean * mean;
  f.residual = std::sqrt((a * q - b).squaredNorm() / static_cast<double>(n));
  return f;
}

}  // namespace bubble
