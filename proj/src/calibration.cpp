#include <Eigen/Dense>
#include <cmath>

#include "bubble/perception.hpp"

namespace bubble::perception {

CalibrationResult calibrate_gain(const std::vector<CalibrationSample>& samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 3) throw CalibrationError("gain calibration needs at least three scenarios");
  Eigen::MatrixXd raw(3, n), force(3, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (int i = 0; i < 3; ++i) {
      raw(i, j) = samples[static_cast<std::size_t>(j)].raw[static_cast<std::size_t>(i)];
      force(i, j) = samples[static_cast<std::size_t>(j)].applied_force[static_cast<std::size_t>(i)];
    }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(raw.transpose());
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw CalibrationError("calibration scenarios are not linearly independent");
  // Solve raw^T K^T = force^T in the least-squares sense.
  const Eigen::MatrixXd kt = qr.solve(force.transpose());
  CalibrationResult r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.gain.k[static_cast<std::size_t>(3 * i + j)] = kt(j, i);
  r.gain.calibrated = true;
  const Eigen::MatrixXd resid = force - kt.transpose() * raw;
  r.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
  return r;
}

}  // namespace bubble::perception
