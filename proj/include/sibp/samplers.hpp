#pragma once

#include <functional>

#include <Eigen/Dense>

#include "sibp/distributions.hpp"

namespace sibp {

/// Unnormalised log density; returns -inf outside its support.
using LogDensity = std::function<double(double)>;
using VectorLogDensity = std::function<double(const Eigen::VectorXd&)>;

inline constexpr double kDefaultSliceWidth = 1.0;
inline constexpr double kDefaultLogitSliceWidth = 0.5;
inline constexpr int kDefaultSliceSteps = 50;

/// One stepping-out / shrinkage slice-sampling transition.
/// Throws NumericalError if the shrinkage bracket collapses below 1e-12
/// without finding a point on the slice, or if target(x0) is not finite.
double slice_sample_1d(const LogDensity& target, double x0, double width, int max_steps,
                       RngStream& rng);

/// One elliptical slice sampling transition under a N(0, scale^2 I) prior.
/// `current_loglik` may be passed to avoid re-evaluating loglik(current).
Eigen::VectorXd elliptical_slice_sample(const Eigen::VectorXd& current, double prior_scale,
                                        const VectorLogDensity& loglik, RngStream& rng,
                                        double current_loglik);
Eigen::VectorXd elliptical_slice_sample(const Eigen::VectorXd& current, double prior_scale,
                                        const VectorLogDensity& loglik, RngStream& rng);

/// One transition for a univariate density on (lo, hi): slice sampling on
/// the logit of (x - lo) / (hi - lo), with the Jacobian included.
double sample_log_concave(const LogDensity& target, double lo, double hi, double x0,
                          RngStream& rng, double width = kDefaultLogitSliceWidth,
                          int max_steps = kDefaultSliceSteps);

}  // namespace sibp
