#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sibp/binary_matrix.hpp"
#include "sibp/distributions.hpp"

namespace sibp {

enum class ModelKind { gaussian, probit };

std::string to_string(ModelKind kind);
/// Throws std::invalid_argument for anything but "gaussian" / "probit".
ModelKind parse_model_kind(const std::string& name);

/// Prior constants shared by both models. Gamma priors use shape and rate.
struct Hyperparameters {
  GammaDist weight_prior{1.0, 1.0};
  GammaDist alpha_prior{1.0, 1.0};
  double sigma_g = 1.0;
  double sigma_x_init = 1.0;
  double sigma_v_init = 1.0;
  double alpha_init = 1.0;
  /// Support of the log-uniform priors on sigma_x and sigma_v.
  double scale_lo = 1e-3;
  double scale_hi = 1e3;
};

struct ChainConfig {
  std::size_t sweeps = 1000;
  std::size_t burn_in = 500;
  std::size_t thin = 10;
  std::uint64_t seed = 1;
  Hyperparameters hyper;
  /// Symmetric label-noise rate mixed into every triple's preference
  /// probability; keeps the likelihood positive when a triple is violated.
  double preference_noise = 0.01;
  std::size_t max_features = 200;
  /// Initial state: this many Bernoulli(0.5) columns.
  std::size_t init_features = 10;

  bool update_weights = true;
  bool update_hyperparameters = true;
  bool update_alpha = true;
  // Probit-only switches.
  bool update_sticks = true;
  bool update_regression = true;
  bool learn_sigma_g = false;
  /// Keep the initial sticks and columns fixed: no slice extension, no
  /// pruning. Used for exact finite-truncation checks.
  bool fixed_truncation = false;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Column means and scales applied to covariates before training; the same
/// transform is applied to test points.
struct Standardization {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardization center(const Eigen::MatrixXd& X);
  static Standardization standardize(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// One retained posterior state. Gaussian samples leave the probit fields
/// empty and vice versa.
struct ModelSample {
  std::size_t sweep = 0;
  double log_posterior = 0.0;
  BinaryMatrix Z;
  std::vector<double> w;
  std::vector<double> wH;
  double alpha = 1.0;
  // Gaussian model.
  double sigma_x = 0.0;
  double sigma_v = 0.0;
  // Probit model.
  std::vector<double> sticks;
  Eigen::MatrixXd G;
  double sigma_g = 0.0;
};

struct Trace {
  ModelKind model = ModelKind::gaussian;
  ChainConfig config;
  Standardization preprocessing;
  std::vector<ModelSample> samples;

  /// Samples with sweep > burn_in.
  std::vector<const ModelSample*> post_burn_in() const;
};

using SampleCallback = std::function<void(const ModelSample&)>;

}  // namespace sibp
