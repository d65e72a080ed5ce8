#include "sibp/gauss_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "sibp/errors.hpp"
#include "sibp/ibp_prior.hpp"
#include "sibp/samplers.hpp"

namespace sibp {

namespace {

Eigen::MatrixXd regularised_gram(const Eigen::MatrixXd& ZtZ, double sigma_x, double sigma_v) {
  const double ratio = (sigma_x * sigma_x) / (sigma_v * sigma_v);
  Eigen::MatrixXd A = ZtZ;
  A.diagonal().array() += ratio;
  return A;
}

void check_dims(const BinaryMatrix& Z, const Eigen::MatrixXd& X) {
  if (Z.rows() != static_cast<std::size_t>(X.rows())) {
    throw std::invalid_argument("Z and X must have the same number of rows");
  }
}

}  // namespace

EvidenceStats EvidenceStats::compute(const Eigen::MatrixXd& X, const BinaryMatrix& Z) {
  check_dims(Z, X);
  const Eigen::MatrixXd Zd = Z.to_dense();
  EvidenceStats s;
  s.ZtZ = Zd.transpose() * Zd;
  s.ZtX = Zd.transpose() * X;
  s.trace_XtX = X.squaredNorm();
  s.rows = Z.rows();
  return s;
}

void EvidenceStats::flip(std::span<const std::uint8_t> row, std::size_t k,
                         const Eigen::RowVectorXd& x_n, bool to_one) {
  const double sign = to_one ? 1.0 : -1.0;
  const auto kk = static_cast<Eigen::Index>(k);
  for (Eigen::Index j = 0; j < ZtZ.rows(); ++j) {
    if (j == kk || !row[static_cast<std::size_t>(j)]) continue;
    ZtZ(kk, j) += sign;
    ZtZ(j, kk) += sign;
  }
  ZtZ(kk, kk) += sign;
  ZtX.row(kk) += sign * x_n;
}

double collapsed_log_evidence(const EvidenceStats& stats, double sigma_x, double sigma_v) {
  if (!(sigma_x > 0.0 && sigma_v > 0.0)) {
    throw std::invalid_argument("collapsed_log_evidence: scales must be > 0");
  }
  const double n = static_cast<double>(stats.rows);
  const double m = static_cast<double>(stats.ZtX.cols());
  const double k = static_cast<double>(stats.features());
  double value = -0.5 * n * m * std::log(2.0 * std::numbers::pi) - (n - k) * m * std::log(sigma_x) -
                 k * m * std::log(sigma_v);
  double quad = 0.0;
  if (stats.features() > 0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(regularised_gram(stats.ZtZ, sigma_x, sigma_v));
    if (llt.info() != Eigen::Success) {
      throw NumericalError("collapsed_log_evidence: Z'Z + rI is not positive definite");
    }
    value -= m * llt.matrixLLT().diagonal().array().log().sum();
    quad = llt.matrixL().solve(stats.ZtX).squaredNorm();
  }
  value -= (stats.trace_XtX - quad) / (2.0 * sigma_x * sigma_x);
  return value;
}

double collapsed_log_evidence(const Eigen::MatrixXd& X, const BinaryMatrix& Z, double sigma_x,
                              double sigma_v) {
  return collapsed_log_evidence(EvidenceStats::compute(X, Z), sigma_x, sigma_v);
}

GaussianSampler::GaussianSampler(Eigen::MatrixXd X, TripletSet triplets,
                                 std::optional<BinaryMatrix> hash, GaussianState init,
                                 const ChainConfig& config, RngStream rng)
    : X_(std::move(X)),
      triplets_(std::move(triplets)),
      hash_(std::move(hash)),
      config_(config),
      rng_(std::move(rng)),
      state_(std::move(init)),
      tracker_(triplets_, hash_ ? &*hash_ : nullptr, config.preference_noise) {
  config_.validate();
  check_dims(state_.Z, X_);
  if (triplets_.num_objects() > state_.Z.rows()) {
    throw std::invalid_argument("triplets refer to more objects than the data has");
  }
  if (state_.weights.w.size() != state_.Z.cols()) {
    throw std::invalid_argument("GaussianSampler: need one weight per column of Z");
  }
  if (hash_) {
    if (hash_->rows() != state_.Z.rows()) {
      throw std::invalid_argument("hash rows must match the data");
    }
    if (state_.weights.wH.size() != hash_->cols()) {
      throw std::invalid_argument("GaussianSampler: need one weight per hash bit");
    }
  }
  if (!(state_.sigma_x > 0.0 && state_.sigma_v > 0.0 && state_.alpha > 0.0)) {
    throw std::invalid_argument("GaussianSampler: scales and alpha must be > 0");
  }
  resync();
}

void GaussianSampler::resync() {
  stats_ = EvidenceStats::compute(X_, state_.Z);
  evidence_ = collapsed_log_evidence(stats_, state_.sigma_x, state_.sigma_v);
  tracker_.rebuild(state_.Z, state_.weights);
}

void GaussianSampler::resample_row(std::size_t n) {
  BinaryMatrix& Z = state_.Z;
  if (n >= Z.rows()) throw std::out_of_range("resample_row: object index out of range");
  const double N = static_cast<double>(Z.rows());
  const Eigen::RowVectorXd x_n = X_.row(static_cast<Eigen::Index>(n));
  // Random visiting order, so the update does not depend on column labels.
  std::vector<std::size_t> order(Z.cols());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng_.index(i)]);
  for (const std::size_t k : order) {
    const bool current = Z(n, k) != 0;
    const std::size_t m = Z.column_count(k) - (current ? 1 : 0);
    if (m == 0) continue;
    const std::vector<std::uint8_t> row = Z.row(n);
    stats_.flip(row, k, x_n, !current);
    const double flipped_evidence = collapsed_log_evidence(stats_, state_.sigma_x, state_.sigma_v);
    const double prior_one = std::log(static_cast<double>(m));
    const double prior_zero = std::log(N - static_cast<double>(m));
    const double log_ratio = (current ? prior_zero - prior_one : prior_one - prior_zero) +
                             flipped_evidence - evidence_ +
                             tracker_.flip_delta(Z, state_.weights.w, n, k);
    const double p_flip = 1.0 / (1.0 + std::exp(-log_ratio));
    if (rng_.uniform() < p_flip) {
      tracker_.apply_flip(Z, state_.weights.w, n, k);
      evidence_ = flipped_evidence;
    } else {
      stats_.flip(row, k, x_n, current);
    }
  }
}

void GaussianSampler::propose_new_features(std::size_t n) {
  const BinaryMatrix& Z = state_.Z;
  if (n >= Z.rows()) throw std::out_of_range("propose_new_features: object index out of range");
  std::vector<std::size_t> keep;
  std::size_t singletons = 0;
  for (std::size_t k = 0; k < Z.cols(); ++k) {
    if (Z(n, k) && Z.column_count(k) == 1) {
      ++singletons;
    } else {
      keep.push_back(k);
    }
  }
  const auto fresh =
      static_cast<std::size_t>(rng_.poisson(state_.alpha / static_cast<double>(Z.rows())));
  if (singletons == 0 && fresh == 0) return;
  if (keep.size() + fresh > config_.max_features) return;

  BinaryMatrix proposed = Z;
  proposed.select_columns(keep);
  PreferenceWeights weights;
  weights.wH = state_.weights.wH;
  for (const std::size_t k : keep) weights.w.push_back(state_.weights.w[k]);
  for (std::size_t f = 0; f < fresh; ++f) {
    std::vector<std::uint8_t> column(Z.rows(), 0);
    column[n] = 1;
    proposed.append_column(std::move(column));
    weights.w.push_back(rng_.gamma(config_.hyper.weight_prior.shape,
                                   config_.hyper.weight_prior.rate));
  }

  EvidenceStats stats;
  const auto kept = static_cast<Eigen::Index>(keep.size());
  const auto total = kept + static_cast<Eigen::Index>(fresh);
  stats.rows = stats_.rows;
  stats.trace_XtX = stats_.trace_XtX;
  stats.ZtZ.setZero(total, total);
  stats.ZtX.setZero(total, X_.cols());
  for (Eigen::Index a = 0; a < kept; ++a) {
    const auto ka = static_cast<Eigen::Index>(keep[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < kept; ++b) {
      stats.ZtZ(a, b) = stats_.ZtZ(ka, static_cast<Eigen::Index>(keep[static_cast<std::size_t>(b)]));
    }
    stats.ZtX.row(a) = stats_.ZtX.row(ka);
    const double shared = Z(n, keep[static_cast<std::size_t>(a)]) ? 1.0 : 0.0;
    for (Eigen::Index f = kept; f < total; ++f) {
      stats.ZtZ(a, f) = shared;
      stats.ZtZ(f, a) = shared;
    }
  }
  for (Eigen::Index f = kept; f < total; ++f) {
    for (Eigen::Index g = kept; g < total; ++g) stats.ZtZ(f, g) = 1.0;
    stats.ZtX.row(f) = X_.row(static_cast<Eigen::Index>(n));
  }

  const double proposed_evidence = collapsed_log_evidence(stats, state_.sigma_x, state_.sigma_v);
  const double log_ratio = proposed_evidence - evidence_ +
                           tracker_.local_log_likelihood(proposed, weights, n) -
                           tracker_.local_log_likelihood(Z, state_.weights, n);
  if (log_ratio >= 0.0 || std::log(rng_.uniform()) < log_ratio) {
    state_.Z = std::move(proposed);
    state_.weights = std::move(weights);
    stats_ = std::move(stats);
    evidence_ = proposed_evidence;
    tracker_.refresh(state_.Z, state_.weights, n);
  }
}

void GaussianSampler::resample_weights() {
  resample_preference_weights(tracker_, state_.Z, state_.weights, config_.hyper.weight_prior, rng_);
}

void GaussianSampler::resample_hyperparameters() {
  const double lo = std::log(config_.hyper.scale_lo);
  const double hi = std::log(config_.hyper.scale_hi);
  const auto in_support = [&](double u) { return u >= lo && u <= hi; };
  if (config_.update_hyperparameters) {
    const double sx = slice_sample_1d(
        [&](double u) {
          if (!in_support(u)) return -std::numeric_limits<double>::infinity();
          return collapsed_log_evidence(stats_, std::exp(u), state_.sigma_v);
        },
        std::log(state_.sigma_x), kDefaultSliceWidth, kDefaultSliceSteps, rng_);
    state_.sigma_x = std::exp(sx);
    const double sv = slice_sample_1d(
        [&](double u) {
          if (!in_support(u)) return -std::numeric_limits<double>::infinity();
          return collapsed_log_evidence(stats_, state_.sigma_x, std::exp(u));
        },
        std::log(state_.sigma_v), kDefaultSliceWidth, kDefaultSliceSteps, rng_);
    state_.sigma_v = std::exp(sv);
    evidence_ = collapsed_log_evidence(stats_, state_.sigma_x, state_.sigma_v);
  }
  if (config_.update_alpha) {
    state_.alpha = resample_alpha(state_.Z, config_.hyper.alpha_prior, rng_);
  }
}

void GaussianSampler::sweep() {
  for (std::size_t n = 0; n < state_.Z.rows(); ++n) {
    resample_row(n);
    propose_new_features(n);
  }
  const auto kept = state_.Z.prune_empty_columns();
  if (kept.size() != state_.weights.w.size()) {
    std::vector<double> w;
    w.reserve(kept.size());
    for (const std::size_t k : kept) w.push_back(state_.weights.w[k]);
    state_.weights.w = std::move(w);
  }
  resync();
  if (config_.update_weights) resample_weights();
  resample_hyperparameters();
  resync();
}

double GaussianSampler::log_joint() const {
  const auto& h = config_.hyper;
  double value = log_ibp_prior(state_.Z, state_.alpha) + evidence_ + tracker_.log_likelihood();
  for (const double w : state_.weights.w) {
    value += gamma_log_pdf(w, h.weight_prior.shape, h.weight_prior.rate);
  }
  for (const double w : state_.weights.wH) {
    value += gamma_log_pdf(w, h.weight_prior.shape, h.weight_prior.rate);
  }
  value += gamma_log_pdf(state_.alpha, h.alpha_prior.shape, h.alpha_prior.rate);
  value -= std::log(state_.sigma_x) + std::log(state_.sigma_v);
  return value;
}

ModelSample GaussianSampler::snapshot(std::size_t sweep) const {
  ModelSample s;
  s.sweep = sweep;
  s.log_posterior = log_joint();
  s.Z = state_.Z;
  s.w = state_.weights.w;
  s.wH = state_.weights.wH;
  s.alpha = state_.alpha;
  s.sigma_x = state_.sigma_x;
  s.sigma_v = state_.sigma_v;
  return s;
}

Eigen::MatrixXd code_projection(const BinaryMatrix& Z, const Eigen::MatrixXd& X, double sigma_x,
                                double sigma_v) {
  check_dims(Z, X);
  const Eigen::MatrixXd Zd = Z.to_dense();
  const Eigen::LLT<Eigen::MatrixXd> llt(regularised_gram(Zd.transpose() * Zd, sigma_x, sigma_v));
  if (llt.info() != Eigen::Success) throw NumericalError("code_projection: singular system");
  return llt.solve(Zd.transpose() * X);
}

GaussianCode predict_code(const Eigen::VectorXd& x_star, const Eigen::MatrixXd& projection) {
  if (x_star.size() != projection.cols()) {
    throw std::invalid_argument("predict_code: x* has the wrong dimension");
  }
  GaussianCode code;
  if (projection.rows() == 0) {
    code.continuous = Eigen::VectorXd(0);
    return code;
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(projection.transpose());
  code.continuous = cod.solve(x_star);
  code.binary.resize(static_cast<std::size_t>(code.continuous.size()));
  for (Eigen::Index k = 0; k < code.continuous.size(); ++k) {
    code.binary[static_cast<std::size_t>(k)] = code.continuous[k] > 0.5 ? 1 : 0;
  }
  return code;
}

GaussianCode predict_code(const Eigen::VectorXd& x_star, const BinaryMatrix& Z,
                          const Eigen::MatrixXd& X, double sigma_x, double sigma_v) {
  return predict_code(x_star, code_projection(Z, X, sigma_x, sigma_v));
}

PredictiveGaussian predictive_density(std::span<const std::uint8_t> z_star, const BinaryMatrix& Z,
                                      const Eigen::MatrixXd& X, double sigma_x, double sigma_v) {
  check_dims(Z, X);
  if (z_star.size() != Z.cols()) {
    throw std::invalid_argument("predictive_density: z* has the wrong length");
  }
  const Eigen::MatrixXd Zd = Z.to_dense();
  const Eigen::MatrixXd ZtZ = Zd.transpose() * Zd;
  Eigen::VectorXd z(static_cast<Eigen::Index>(z_star.size()));
  for (std::size_t k = 0; k < z_star.size(); ++k) z[static_cast<Eigen::Index>(k)] = z_star[k];
  PredictiveGaussian out;
  if (Z.cols() == 0) {
    out.mu = Eigen::VectorXd::Zero(X.cols());
    return out;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(regularised_gram(ZtZ, sigma_x, sigma_v));
  if (llt.info() != Eigen::Success) throw NumericalError("predictive_density: singular system");
  const Eigen::VectorXd a = llt.solve(z);
  out.mu = (Zd.transpose() * X).transpose() * a;
  out.sigma = z.squaredNorm() - a.dot(ZtZ * z);
  return out;
}

BinaryMatrix gaussian_codes(const ModelSample& sample, const Eigen::MatrixXd& X_train,
                            const Eigen::MatrixXd& X_query) {
  const Eigen::MatrixXd A = code_projection(sample.Z, X_train, sample.sigma_x, sample.sigma_v);
  BinaryMatrix codes(static_cast<std::size_t>(X_query.rows()), sample.Z.cols());
  for (Eigen::Index r = 0; r < X_query.rows(); ++r) {
    const GaussianCode code = predict_code(X_query.row(r).transpose(), A);
    for (std::size_t k = 0; k < code.binary.size(); ++k) {
      if (code.binary[k]) codes.set(static_cast<std::size_t>(r), k, true);
    }
  }
  return codes;
}

Trace run_gaussian_chain(const Eigen::MatrixXd& X, const TripletSet& triplets,
                         const BinaryMatrix* hash, const ChainConfig& config,
                         const SampleCallback& on_sample) {
  config.validate();
  if (X.rows() == 0) throw std::invalid_argument("run_gaussian_chain: no data");
  Trace trace;
  trace.model = ModelKind::gaussian;
  trace.config = config;
  trace.preprocessing = Standardization::center(X);

  RngStream rng(config.seed);
  const auto& h = config.hyper;
  GaussianState init;
  const auto n = static_cast<std::size_t>(X.rows());
  init.Z = BinaryMatrix(n, config.init_features);
  for (std::size_t k = 0; k < config.init_features; ++k) {
    for (std::size_t r = 0; r < n; ++r) init.Z.set(r, k, rng.bernoulli(0.5));
  }
  init.Z.prune_empty_columns();
  for (std::size_t k = 0; k < init.Z.cols(); ++k) {
    init.weights.w.push_back(rng.gamma(h.weight_prior.shape, h.weight_prior.rate));
  }
  if (hash) {
    for (std::size_t d = 0; d < hash->cols(); ++d) {
      init.weights.wH.push_back(rng.gamma(h.weight_prior.shape, h.weight_prior.rate));
    }
  }
  init.sigma_x = h.sigma_x_init;
  init.sigma_v = h.sigma_v_init;
  init.alpha = h.alpha_init;

  std::optional<BinaryMatrix> hash_copy;
  if (hash) hash_copy = *hash;
  GaussianSampler sampler(trace.preprocessing.apply(X), triplets, std::move(hash_copy),
                          std::move(init), config, std::move(rng));
  const auto record = [&](std::size_t sweep) {
    trace.samples.push_back(sampler.snapshot(sweep));
    if (on_sample) on_sample(trace.samples.back());
  };
  record(0);
  for (std::size_t s = 1; s <= config.sweeps; ++s) {
    sampler.sweep();
    if (s % config.thin == 0) record(s);
  }
  return trace;
}

}  // namespace sibp
