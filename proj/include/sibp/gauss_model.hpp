#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "sibp/binary_matrix.hpp"
#include "sibp/chain.hpp"
#include "sibp/distributions.hpp"
#include "sibp/preference.hpp"

namespace sibp {

struct GaussianState {
  BinaryMatrix Z;
  PreferenceWeights weights;
  double sigma_x = 1.0;
  double sigma_v = 1.0;
  double alpha = 1.0;
};

/// Sufficient statistics of the collapsed evidence: Z'Z, Z'X and tr(X'X).
struct EvidenceStats {
  Eigen::MatrixXd ZtZ;
  Eigen::MatrixXd ZtX;
  double trace_XtX = 0.0;
  std::size_t rows = 0;

  static EvidenceStats compute(const Eigen::MatrixXd& X, const BinaryMatrix& Z);
  std::size_t features() const { return static_cast<std::size_t>(ZtZ.rows()); }
  /// Updates the statistics for z_n^k changing; `row` is z_n before the change.
  void flip(std::span<const std::uint8_t> row, std::size_t k, const Eigen::RowVectorXd& x_n,
            bool to_one);
};

/// log Pr(X | Z, sigma_x, sigma_v) with the loadings V integrated out.
double collapsed_log_evidence(const EvidenceStats& stats, double sigma_x, double sigma_v);
double collapsed_log_evidence(const Eigen::MatrixXd& X, const BinaryMatrix& Z, double sigma_x,
                              double sigma_v);

/// Gibbs / Metropolis-Hastings sampler over a GaussianState. Holds the data
/// and the incremental likelihood caches, so it is neither copyable nor movable.
class GaussianSampler {
 public:
  /// X must already be centered. H, when present, has one row per object.
  GaussianSampler(Eigen::MatrixXd X, TripletSet triplets, std::optional<BinaryMatrix> hash,
                  GaussianState init, const ChainConfig& config, RngStream rng);
  GaussianSampler(const GaussianSampler&) = delete;
  GaussianSampler& operator=(const GaussianSampler&) = delete;

  /// Gibbs update of z_n^k for every column also owned by another object.
  void resample_row(std::size_t n);
  /// Replaces the features owned only by n with Poisson(alpha / N) fresh ones,
  /// accepted with the likelihood ratio.
  void propose_new_features(std::size_t n);
  void resample_weights();
  /// sigma_x and sigma_v by slice sampling on the log scale, then alpha.
  void resample_hyperparameters();
  void sweep();

  double log_evidence() const { return evidence_; }
  double triplet_log_likelihood() const { return tracker_.log_likelihood(); }
  double log_joint() const;

  const GaussianState& state() const { return state_; }
  const Eigen::MatrixXd& data() const { return X_; }
  ModelSample snapshot(std::size_t sweep) const;

 private:
  void resync();

  Eigen::MatrixXd X_;
  TripletSet triplets_;
  std::optional<BinaryMatrix> hash_;
  ChainConfig config_;
  RngStream rng_;
  GaussianState state_;
  PreferenceTracker tracker_;
  EvidenceStats stats_;
  double evidence_ = 0.0;
};

/// A = (Z'Z + (sigma_x^2 / sigma_v^2) I)^{-1} Z'X, the posterior mean loadings (K x M).
Eigen::MatrixXd code_projection(const BinaryMatrix& Z, const Eigen::MatrixXd& X, double sigma_x,
                                double sigma_v);

struct GaussianCode {
  Eigen::VectorXd continuous;
  std::vector<std::uint8_t> binary;
};

/// Minimum-norm least-squares solution of A' z = x*, thresholded at 0.5.
GaussianCode predict_code(const Eigen::VectorXd& x_star, const Eigen::MatrixXd& projection);
GaussianCode predict_code(const Eigen::VectorXd& x_star, const BinaryMatrix& Z,
                          const Eigen::MatrixXd& X, double sigma_x, double sigma_v);

/// N(mu, sigma * I_M) for x* given a code z*.
struct PredictiveGaussian {
  Eigen::VectorXd mu;
  double sigma = 0.0;
};

PredictiveGaussian predictive_density(std::span<const std::uint8_t> z_star, const BinaryMatrix& Z,
                                      const Eigen::MatrixXd& X, double sigma_x, double sigma_v);

/// Codes for every row of X_query (already centered) under one sample.
BinaryMatrix gaussian_codes(const ModelSample& sample, const Eigen::MatrixXd& X_train,
                            const Eigen::MatrixXd& X_query);

/// Centers X, starts from config.init_features random columns and runs
/// config.sweeps sweeps.
/// Sample 0 is the initial state; later samples are every `thin` sweeps.
Trace run_gaussian_chain(const Eigen::MatrixXd& X, const TripletSet& triplets,
                         const BinaryMatrix* hash, const ChainConfig& config,
                         const SampleCallback& on_sample = {});

}  // namespace sibp
