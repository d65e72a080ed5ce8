#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sibp/binary_matrix.hpp"
#include "sibp/chain.hpp"
#include "sibp/distributions.hpp"
#include "sibp/preference.hpp"

namespace sibp {

/// Columns of Z, entries of `sticks`, columns of G and entries of w are
/// aligned. Active features are unordered; inactive ones are dropped at the
/// end of each Z update.
struct ProbitState {
  BinaryMatrix Z;
  PreferenceWeights weights;
  std::vector<double> sticks;
  Eigen::MatrixXd G;  // M x K
  double sigma_g = 1.0;
  double alpha = 1.0;
};

/// Phi(x'g + Phi^{-1}(b)), with b clamped away from 0 and 1. Returns the
/// clamped b itself when x'g is zero.
double feature_activation_prob(const Eigen::VectorXd& x, const Eigen::VectorXd& g, double b);

/// Expected number of active features per unit alpha: the integral over b in
/// (clamp, 1) of Pr(column not all zero | b) / b, with g ~ N(0, sigma_g^2 I)
/// averaged over sigma_g times the columns of `noise` (M x S standard normals).
/// Equals H_N when X g = 0.
double activity_rate(const Eigen::MatrixXd& X, double sigma_g, const Eigen::MatrixXd& noise);

class ProbitSampler {
 public:
  /// X must already be standardized.
  ProbitSampler(Eigen::MatrixXd X, TripletSet triplets, std::optional<BinaryMatrix> hash,
                ProbitState init, const ChainConfig& config, RngStream rng);
  ProbitSampler(const ProbitSampler&) = delete;
  ProbitSampler& operator=(const ProbitSampler&) = delete;

  /// Draws the slice variable below the smallest active stick, represents
  /// the inactive sticks above it, Gibbs-updates every entry whose stick
  /// lies above the slice and drops unused columns. In fixed-truncation mode
  /// all entries are updated and the representation is left alone.
  void resample_Z_sliced();
  void resample_sticks();
  void resample_regression();
  void resample_weights();
  void resample_alpha();
  void sweep();

  double log_joint() const;
  double triplet_log_likelihood() const { return tracker_.log_likelihood(); }
  double slice_value() const { return slice_; }
  /// Smallest stick among columns owned by some object (1 when none are).
  double min_active_stick() const;
  /// activity_rate at the current sigma_g; the rate of alpha's Gamma conditional
  /// is the prior rate plus this.
  double activity_rate() const { return rate_; }

  const ProbitState& state() const { return state_; }
  ModelSample snapshot(std::size_t sweep) const;

 private:
  void append_column(double stick);
  void drop_inactive_columns();
  double column_log_likelihood(std::size_t k, const Eigen::VectorXd& eta, double b) const;
  void refresh_eta(std::size_t k);
  void refresh_activity_rate();

  Eigen::MatrixXd X_;
  TripletSet triplets_;
  std::optional<BinaryMatrix> hash_;
  ChainConfig config_;
  RngStream rng_;
  ProbitState state_;
  PreferenceTracker tracker_;
  Eigen::MatrixXd eta_;  // X G, N x K
  double slice_ = 0.0;
  Eigen::MatrixXd rate_noise_;
  double rate_sigma_g_ = 0.0;
  double rate_ = 0.0;
};

struct ProbitCode {
  Eigen::VectorXd probs;
  std::vector<std::uint8_t> binary;
};

ProbitCode predict_code(const Eigen::VectorXd& x_star, const Eigen::MatrixXd& G,
                        const std::vector<double>& sticks);

/// Thresholded codes for every row of X_query (already standardized).
BinaryMatrix probit_codes(const ModelSample& sample, const Eigen::MatrixXd& X_query);

/// Standardizes X, starts from config.init_features Bernoulli(0.5) columns
/// with g = 0 and runs
/// config.sweeps sweeps, recording the initial state and every `thin` sweeps.
Trace run_probit_chain(const Eigen::MatrixXd& X, const TripletSet& triplets,
                       const BinaryMatrix* hash, const ChainConfig& config,
                       const SampleCallback& on_sample = {});

}  // namespace sibp
