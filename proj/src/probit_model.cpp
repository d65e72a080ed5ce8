#include "sibp/probit_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sibp/ibp_prior.hpp"
#include "sibp/samplers.hpp"

namespace sibp {

namespace {

double log_bernoulli_probit(bool z, double latent) {
  return z ? log_std_normal_cdf(latent) : log_std_normal_cdf(-latent);
}

constexpr Eigen::Index kRateDraws = 128;
constexpr int kRateGrid = 200;
constexpr std::uint64_t kRateStream = 0x5eed;

// ESS steps for the g of a freshly represented column, conditioned on its all-zero column.
constexpr int kInactiveRegressionSteps = 5;

}  // namespace

double feature_activation_prob(const Eigen::VectorXd& x, const Eigen::VectorXd& g, double b) {
  if (x.size() != g.size()) throw std::invalid_argument("feature_activation_prob: size mismatch");
  const double eta = x.dot(g);
  if (eta == 0.0) return std::clamp(b, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return std_normal_cdf(eta + clamped_probit(b));
}

double activity_rate(const Eigen::MatrixXd& X, double sigma_g, const Eigen::MatrixXd& noise) {
  if (noise.rows() != X.cols()) throw std::invalid_argument("activity_rate: noise must have M rows");
  const auto N = X.rows();
  const Eigen::MatrixXd eta = sigma_g * (X * noise);
  // H_N covers the g = 0 case; the grid integrates the excess over u = -log b.
  const double top = -std::log(kProbabilityClamp);
  const double du = top / kRateGrid;
  double excess = 0.0;
  for (int i = 0; i <= kRateGrid; ++i) {
    const double b = std::exp(-du * i);
    const double t = clamped_probit(b);
    const double prior_zero = std::exp(static_cast<double>(N) * std::log1p(-std::min(b, 1.0 - kProbabilityClamp)));
    double zero = 0.0;
    for (Eigen::Index s = 0; s < eta.cols(); ++s) {
      double log_zero = 0.0;
      for (Eigen::Index n = 0; n < N; ++n) log_zero += log_std_normal_cdf(-(eta(n, s) + t));
      zero += std::exp(log_zero);
    }
    if (eta.cols() > 0) zero /= static_cast<double>(eta.cols());
    const double weight = (i == 0 || i == kRateGrid) ? 0.5 : 1.0;
    excess += weight * (prior_zero - zero) * du;
  }
  return harmonic_number(static_cast<std::size_t>(N)) + excess;
}

ProbitSampler::ProbitSampler(Eigen::MatrixXd X, TripletSet triplets,
                             std::optional<BinaryMatrix> hash, ProbitState init,
                             const ChainConfig& config, RngStream rng)
    : X_(std::move(X)),
      triplets_(std::move(triplets)),
      hash_(std::move(hash)),
      config_(config),
      rng_(std::move(rng)),
      state_(std::move(init)),
      tracker_(triplets_, hash_ ? &*hash_ : nullptr, config.preference_noise) {
  config_.validate();
  const std::size_t K = state_.Z.cols();
  if (state_.Z.rows() != static_cast<std::size_t>(X_.rows())) {
    throw std::invalid_argument("Z and X must have the same number of rows");
  }
  if (triplets_.num_objects() > state_.Z.rows()) {
    throw std::invalid_argument("triplets refer to more objects than the data has");
  }
  if (state_.sticks.size() != K || static_cast<std::size_t>(state_.G.cols()) != K ||
      state_.weights.w.size() != K) {
    throw std::invalid_argument("ProbitSampler: Z, sticks, G and w must have equal widths");
  }
  if (K > 0 && state_.G.rows() != X_.cols()) {
    throw std::invalid_argument("ProbitSampler: G must have one row per covariate");
  }
  if (K == 0) state_.G.resize(X_.cols(), 0);
  for (const double b : state_.sticks) {
    if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("ProbitSampler: sticks must lie in (0, 1]");
  }
  if (hash_) {
    if (hash_->rows() != state_.Z.rows()) throw std::invalid_argument("hash rows must match the data");
    if (state_.weights.wH.size() != hash_->cols()) {
      throw std::invalid_argument("ProbitSampler: need one weight per hash bit");
    }
  }
  if (!(state_.sigma_g > 0.0 && state_.alpha > 0.0)) {
    throw std::invalid_argument("ProbitSampler: sigma_g and alpha must be > 0");
  }
  eta_ = X_ * state_.G;
  tracker_.rebuild(state_.Z, state_.weights);
  RngStream noise_rng = rng_.split(kRateStream);
  rate_noise_.resize(X_.cols(), kRateDraws);
  for (Eigen::Index s = 0; s < kRateDraws; ++s) {
    for (Eigen::Index m = 0; m < X_.cols(); ++m) rate_noise_(m, s) = noise_rng.normal();
  }
  refresh_activity_rate();
}

void ProbitSampler::refresh_activity_rate() {
  if (rate_sigma_g_ == state_.sigma_g && rate_ > 0.0) return;
  rate_ = sibp::activity_rate(X_, state_.sigma_g, rate_noise_);
  rate_sigma_g_ = state_.sigma_g;
}

double ProbitSampler::min_active_stick() const {
  double lowest = 1.0;
  for (std::size_t k = 0; k < state_.Z.cols(); ++k) {
    if (state_.Z.column_count(k) > 0) lowest = std::min(lowest, state_.sticks[k]);
  }
  return lowest;
}

void ProbitSampler::append_column(double stick) {
  const auto K = static_cast<Eigen::Index>(state_.Z.cols());
  state_.Z.append_column();
  state_.sticks.push_back(stick);
  state_.G.conservativeResize(X_.cols(), K + 1);
  for (Eigen::Index m = 0; m < X_.cols(); ++m) state_.G(m, K) = rng_.normal(0.0, state_.sigma_g);
  if (config_.update_regression) {
    const double bias = clamped_probit(stick);
    const auto all_zero = [&](const Eigen::VectorXd& g) {
      const Eigen::VectorXd eta = X_ * g;
      double total = 0.0;
      for (Eigen::Index n = 0; n < eta.size(); ++n) total += log_bernoulli_probit(false, eta[n] + bias);
      return total;
    };
    for (int step = 0; step < kInactiveRegressionSteps; ++step) {
      state_.G.col(K) = elliptical_slice_sample(state_.G.col(K), state_.sigma_g, all_zero, rng_);
    }
  }
  state_.weights.w.push_back(
      rng_.gamma(config_.hyper.weight_prior.shape, config_.hyper.weight_prior.rate));
  eta_.conservativeResize(X_.rows(), K + 1);
  refresh_eta(static_cast<std::size_t>(K));
}

void ProbitSampler::drop_inactive_columns() {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < state_.Z.cols(); ++k) {
    if (state_.Z.column_count(k) > 0) keep.push_back(k);
  }
  if (keep.size() == state_.Z.cols()) return;
  const auto K = static_cast<Eigen::Index>(keep.size());
  std::vector<double> sticks(keep.size());
  std::vector<double> w(keep.size());
  Eigen::MatrixXd G(X_.cols(), K);
  Eigen::MatrixXd eta(X_.rows(), K);
  for (std::size_t a = 0; a < keep.size(); ++a) {
    const auto aa = static_cast<Eigen::Index>(a);
    const auto kk = static_cast<Eigen::Index>(keep[a]);
    sticks[a] = state_.sticks[keep[a]];
    w[a] = state_.weights.w[keep[a]];
    G.col(aa) = state_.G.col(kk);
    eta.col(aa) = eta_.col(kk);
  }
  state_.Z.select_columns(keep);
  state_.sticks = std::move(sticks);
  state_.weights.w = std::move(w);
  state_.G = std::move(G);
  eta_ = std::move(eta);
}

void ProbitSampler::refresh_eta(std::size_t k) {
  const auto kk = static_cast<Eigen::Index>(k);
  eta_.col(kk) = X_ * state_.G.col(kk);
}

double ProbitSampler::column_log_likelihood(std::size_t k, const Eigen::VectorXd& eta,
                                            double b) const {
  const double bias = clamped_probit(b);
  const auto column = state_.Z.column(k);
  double total = 0.0;
  for (Eigen::Index n = 0; n < eta.size(); ++n) {
    total += log_bernoulli_probit(column[static_cast<std::size_t>(n)] != 0, eta[n] + bias);
  }
  return total;
}

void ProbitSampler::resample_Z_sliced() {
  BinaryMatrix& Z = state_.Z;
  const bool fixed = config_.fixed_truncation;
  if (!fixed) {
    drop_inactive_columns();
    const double b_star = min_active_stick();
    slice_ = rng_.uniform() * b_star;
    const std::size_t N = Z.rows();
    // Inactive sticks are ordered from 1 downwards, independently of the active ones.
    double upper = 1.0;
    while (Z.cols() < config_.max_features) {
      const double b = sample_inactive_stick(upper, state_.alpha, N, rng_);
      if (b <= slice_) break;
      append_column(b);
      upper = b;
    }
  }

  const std::size_t K = Z.cols();
  std::vector<double> bias(K);
  for (std::size_t k = 0; k < K; ++k) bias[k] = clamped_probit(state_.sticks[k]);

  for (std::size_t n = 0; n < Z.rows(); ++n) {
    for (std::size_t k = 0; k < K; ++k) {
      if (!fixed && state_.sticks[k] <= slice_) continue;
      const bool current = Z(n, k) != 0;
      const double latent = eta_(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) + bias[k];
      const double log_one = log_bernoulli_probit(true, latent);
      const double log_zero = log_bernoulli_probit(false, latent);
      double log_ratio = (current ? log_zero - log_one : log_one - log_zero) +
                         tracker_.flip_delta(Z, state_.weights.w, n, k);
      if (!fixed) {
        // p(slice | Z) = 1 / b*(Z), b* the smallest stick among active columns.
        double others = 1.0;
        for (std::size_t j = 0; j < K; ++j) {
          if (j != k && Z.column_count(j) > 0) others = std::min(others, state_.sticks[j]);
        }
        const bool active_now = Z.column_count(k) > 0;
        const bool active_flipped = current ? Z.column_count(k) > 1 : true;
        const double star_now = active_now ? std::min(others, state_.sticks[k]) : others;
        const double star_flipped = active_flipped ? std::min(others, state_.sticks[k]) : others;
        log_ratio += std::log(star_now) - std::log(star_flipped);
      }
      const double p_flip = 1.0 / (1.0 + std::exp(-log_ratio));
      if (rng_.uniform() < p_flip) tracker_.apply_flip(Z, state_.weights.w, n, k);
    }
  }
  if (!fixed) drop_inactive_columns();
}

void ProbitSampler::resample_sticks() {
  if (config_.fixed_truncation || !config_.update_sticks) return;
  for (std::size_t k = 0; k < state_.Z.cols(); ++k) {
    const Eigen::VectorXd eta = eta_.col(static_cast<Eigen::Index>(k));
    const LogDensity target = [&, k](double b) {
      return -std::log(b) + column_log_likelihood(k, eta, b);
    };
    state_.sticks[k] = sample_log_concave(target, 0.0, 1.0, state_.sticks[k], rng_);
  }
}

void ProbitSampler::resample_regression() {
  if (config_.update_regression) {
    for (std::size_t k = 0; k < state_.Z.cols(); ++k) {
      const double bias = clamped_probit(state_.sticks[k]);
      const auto column = state_.Z.column(k);
      const auto loglik = [&](const Eigen::VectorXd& g) {
        const Eigen::VectorXd eta = X_ * g;
        double total = 0.0;
        for (Eigen::Index n = 0; n < eta.size(); ++n) {
          total += log_bernoulli_probit(column[static_cast<std::size_t>(n)] != 0, eta[n] + bias);
        }
        return total;
      };
      const auto kk = static_cast<Eigen::Index>(k);
      state_.G.col(kk) = elliptical_slice_sample(state_.G.col(kk), state_.sigma_g, loglik, rng_);
      refresh_eta(k);
    }
  }
  if (config_.learn_sigma_g && state_.G.size() > 0) {
    const double sum_sq = state_.G.squaredNorm();
    const double count = static_cast<double>(state_.G.size());
    const double lo = std::log(config_.hyper.scale_lo);
    const double hi = std::log(config_.hyper.scale_hi);
    const double u = slice_sample_1d(
        [&](double v) {
          if (v < lo || v > hi) return -std::numeric_limits<double>::infinity();
          return -count * v - 0.5 * sum_sq * std::exp(-2.0 * v);
        },
        std::log(state_.sigma_g), kDefaultSliceWidth, kDefaultSliceSteps, rng_);
    state_.sigma_g = std::exp(u);
    refresh_activity_rate();
  }
}

void ProbitSampler::resample_weights() {
  if (!config_.update_weights) return;
  resample_preference_weights(tracker_, state_.Z, state_.weights, config_.hyper.weight_prior, rng_);
}

void ProbitSampler::resample_alpha() {
  if (!config_.update_alpha) return;
  std::size_t active = 0;
  for (std::size_t k = 0; k < state_.Z.cols(); ++k) active += state_.Z.column_count(k) > 0 ? 1 : 0;
  const auto& prior = config_.hyper.alpha_prior;
  state_.alpha = rng_.gamma(prior.shape + static_cast<double>(active), prior.rate + rate_);
}

void ProbitSampler::sweep() {
  resample_Z_sliced();
  resample_sticks();
  resample_regression();
  resample_weights();
  resample_alpha();
  tracker_.rebuild(state_.Z, state_.weights);
}

double ProbitSampler::log_joint() const {
  const auto& h = config_.hyper;
  const std::size_t K = state_.Z.cols();
  const double alpha = state_.alpha;
  double value = tracker_.log_likelihood();
  for (std::size_t k = 0; k < K; ++k) {
    value += column_log_likelihood(k, eta_.col(static_cast<Eigen::Index>(k)), state_.sticks[k]);
  }
  // Active sticks form a Poisson process with intensity alpha / b on (0, 1);
  // no other feature is active, with probability exp(-alpha * activity_rate).
  std::size_t active = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (state_.Z.column_count(k) == 0) continue;
    ++active;
    value -= std::log(state_.sticks[k]);
  }
  value += static_cast<double>(active) * std::log(alpha) - alpha * rate_;
  const double sg = state_.sigma_g;
  value += -0.5 * state_.G.squaredNorm() / (sg * sg) -
           static_cast<double>(state_.G.size()) * (std::log(sg) + 0.5 * std::log(2.0 * std::numbers::pi));
  for (const double w : state_.weights.w) {
    value += gamma_log_pdf(w, h.weight_prior.shape, h.weight_prior.rate);
  }
  for (const double w : state_.weights.wH) {
    value += gamma_log_pdf(w, h.weight_prior.shape, h.weight_prior.rate);
  }
  value += gamma_log_pdf(alpha, h.alpha_prior.shape, h.alpha_prior.rate);
  return value;
}

ModelSample ProbitSampler::snapshot(std::size_t sweep) const {
  ModelSample s;
  s.sweep = sweep;
  s.log_posterior = log_joint();
  s.Z = state_.Z;
  s.w = state_.weights.w;
  s.wH = state_.weights.wH;
  s.alpha = state_.alpha;
  s.sticks = state_.sticks;
  s.G = state_.G;
  s.sigma_g = state_.sigma_g;
  return s;
}

ProbitCode predict_code(const Eigen::VectorXd& x_star, const Eigen::MatrixXd& G,
                        const std::vector<double>& sticks) {
  if (static_cast<std::size_t>(G.cols()) != sticks.size()) {
    throw std::invalid_argument("predict_code: G and sticks disagree on K");
  }
  if (sticks.size() > 0 && G.rows() != x_star.size()) {
    throw std::invalid_argument("predict_code: x* has the wrong dimension");
  }
  ProbitCode code;
  code.probs.resize(static_cast<Eigen::Index>(sticks.size()));
  code.binary.resize(sticks.size());
  for (std::size_t k = 0; k < sticks.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    code.probs[kk] = feature_activation_prob(x_star, G.col(kk), sticks[k]);
    code.binary[k] = code.probs[kk] > 0.5 ? 1 : 0;
  }
  return code;
}

BinaryMatrix probit_codes(const ModelSample& sample, const Eigen::MatrixXd& X_query) {
  BinaryMatrix codes(static_cast<std::size_t>(X_query.rows()), sample.sticks.size());
  for (Eigen::Index r = 0; r < X_query.rows(); ++r) {
    const ProbitCode code = predict_code(X_query.row(r).transpose(), sample.G, sample.sticks);
    for (std::size_t k = 0; k < code.binary.size(); ++k) {
      if (code.binary[k]) codes.set(static_cast<std::size_t>(r), k, true);
    }
  }
  return codes;
}

Trace run_probit_chain(const Eigen::MatrixXd& X, const TripletSet& triplets,
                       const BinaryMatrix* hash, const ChainConfig& config,
                       const SampleCallback& on_sample) {
  config.validate();
  if (X.rows() == 0) throw std::invalid_argument("run_probit_chain: no data");
  Trace trace;
  trace.model = ModelKind::probit;
  trace.config = config;
  trace.preprocessing = Standardization::standardize(X);

  RngStream rng(config.seed);
  const auto& h = config.hyper;
  const auto n = static_cast<std::size_t>(X.rows());
  ProbitState init;
  init.alpha = h.alpha_init;
  init.sigma_g = h.sigma_g;
  init.Z = BinaryMatrix(n, config.init_features);
  for (std::size_t k = 0; k < config.init_features; ++k) {
    for (std::size_t r = 0; r < n; ++r) init.Z.set(r, k, rng.bernoulli(0.5));
  }
  init.Z.prune_empty_columns();
  for (std::size_t k = 0; k < init.Z.cols(); ++k) {
    init.sticks.push_back(static_cast<double>(init.Z.column_count(k)) / static_cast<double>(n + 1));
    init.weights.w.push_back(rng.gamma(h.weight_prior.shape, h.weight_prior.rate));
  }
  init.G = Eigen::MatrixXd::Zero(X.cols(), static_cast<Eigen::Index>(init.Z.cols()));
  if (hash) {
    for (std::size_t d = 0; d < hash->cols(); ++d) {
      init.weights.wH.push_back(rng.gamma(h.weight_prior.shape, h.weight_prior.rate));
    }
  }

  std::optional<BinaryMatrix> hash_copy;
  if (hash) hash_copy = *hash;
  ProbitSampler sampler(trace.preprocessing.apply(X), triplets, std::move(hash_copy),
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
