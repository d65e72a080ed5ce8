#include "sibp/samplers.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace sibp {

double slice_sample_1d(const LogDensity& target, double x0, double width, int max_steps,
                       RngStream& rng) {
  const double f0 = target(x0);
  if (!std::isfinite(f0)) {
    throw NumericalError("slice_sample_1d: log density is not finite at the start point");
  }
  const double level = f0 - rng.exponential();

  double left = x0 - width * rng.uniform();
  double right = left + width;
  int steps_left = static_cast<int>(std::floor(max_steps * rng.uniform()));
  int steps_right = max_steps - 1 - steps_left;
  while (steps_left > 0 && target(left) > level) {
    left -= width;
    --steps_left;
  }
  while (steps_right > 0 && target(right) > level) {
    right += width;
    --steps_right;
  }

  for (;;) {
    const double x1 = rng.uniform(left, right);
    if (target(x1) >= level) return x1;
    if (x1 < x0) {
      left = x1;
    } else {
      right = x1;
    }
    if (right - left < 1e-12) {
      throw NumericalError("slice_sample_1d: shrinkage collapsed; malformed target");
    }
  }
}

Eigen::VectorXd elliptical_slice_sample(const Eigen::VectorXd& current, double prior_scale,
                                        const VectorLogDensity& loglik, RngStream& rng,
                                        double current_loglik) {
  Eigen::VectorXd nu(current.size());
  for (Eigen::Index i = 0; i < nu.size(); ++i) nu[i] = prior_scale * rng.normal();

  const double level = current_loglik - rng.exponential();
  double theta = 2.0 * std::numbers::pi * rng.uniform();
  double lo = theta - 2.0 * std::numbers::pi;
  double hi = theta;
  for (;;) {
    Eigen::VectorXd proposal = current * std::cos(theta) + nu * std::sin(theta);
    if (loglik(proposal) > level) return proposal;
    if (theta < 0.0) {
      lo = theta;
    } else {
      hi = theta;
    }
    // The bracket always contains theta = 0 (the current point); once it is
    // numerically empty the current point is the only acceptable state.
    if (hi - lo < 1e-12) return current;
    theta = rng.uniform(lo, hi);
  }
}

Eigen::VectorXd elliptical_slice_sample(const Eigen::VectorXd& current, double prior_scale,
                                        const VectorLogDensity& loglik, RngStream& rng) {
  return elliptical_slice_sample(current, prior_scale, loglik, rng, loglik(current));
}

double sample_log_concave(const LogDensity& target, double lo, double hi, double x0,
                          RngStream& rng, double width, int max_steps) {
  const double span = hi - lo;
  auto to_x = [&](double y) {
    // Logistic map written to stay inside (lo, hi) for large |y|.
    const double s = y >= 0.0 ? 1.0 / (1.0 + std::exp(-y))
                              : std::exp(y) / (1.0 + std::exp(y));
    return lo + span * s;
  };
  auto transformed = [&](double y) {
    const double x = to_x(y);
    if (!(x > lo && x < hi)) return -std::numeric_limits<double>::infinity();
    const double value = target(x);
    if (!std::isfinite(value)) return -std::numeric_limits<double>::infinity();
    // dx/dy = (x - lo)(hi - x) / span
    return value + std::log(x - lo) + std::log(hi - x) - std::log(span);
  };
  const double u = std::fmin(std::fmax((x0 - lo) / span, 1e-15), 1.0 - 1e-15);
  const double y0 = std::log(u) - std::log1p(-u);
  return to_x(slice_sample_1d(transformed, y0, width, max_steps, rng));
}

}  // namespace sibp
