#pragma once

#include <array>
#include <cstdint>
#include <variant>

#include "sibp/errors.hpp"

namespace sibp {

/// xoshiro256** stream with splitmix64 seeding.
///
/// All variates are produced by code in this library (no <random>
/// distributions), so a seed yields the same sequence on every platform.
/// Substreams returned by split() are separated by 2^128 draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential();
  /// Gamma with shape and *rate*.
  double gamma(double shape, double rate);
  /// Beta(a, 1), drawn as U^(1/a).
  double beta_a1(double a);
  std::uint64_t poisson(double lambda);
  bool bernoulli(double p);
  /// Uniform on {0, ..., n - 1}; n must be positive.
  std::size_t index(std::size_t n);

  /// Independent substream `index` (index 0 is the jump-ahead of this stream).
  RngStream split(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  bool operator==(const RngStream&) const = default;

 private:
  void jump();

  std::array<std::uint64_t, 4> s_{};
  std::uint64_t seed_ = 0;
};

struct GaussianDist {
  double mean = 0.0;
  double sd = 1.0;
};
struct GammaDist {
  double shape = 1.0;
  double rate = 1.0;
};
struct BetaA1Dist {
  double a = 1.0;
};
struct PoissonDist {
  double lambda = 0.0;
};
struct BernoulliDist {
  double p = 0.5;
};
struct UniformDist {
  double lo = 0.0;
  double hi = 1.0;
};

using DistSpec = std::variant<GaussianDist, GammaDist, BetaA1Dist, PoissonDist,
                              BernoulliDist, UniformDist>;

/// Throws std::invalid_argument if the parameters are out of range.
void validate(const DistSpec& spec);

/// One variate; Poisson and Bernoulli values are returned as exact integers.
double draw(const DistSpec& spec, RngStream& rng);

double std_normal_cdf(double x);
/// log Phi(x), accurate in the far left tail.
double log_std_normal_cdf(double x);
double std_normal_log_pdf(double x);

/// Inverse standard normal CDF. Throws std::domain_error unless 0 < p < 1.
double std_normal_inv_cdf(double p);

inline constexpr double kProbabilityClamp = 1e-12;
/// Clamps p to [1e-12, 1 - 1e-12] before inverting.
double clamped_probit(double p);

/// log density of Gamma(shape, rate) at x > 0.
double gamma_log_pdf(double x, double shape, double rate);

}  // namespace sibp
