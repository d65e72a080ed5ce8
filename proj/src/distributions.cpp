#include "sibp/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>

namespace sibp {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// Hormann's PTRS transformed rejection, used for lambda >= 30.
std::uint64_t poisson_ptrs(double lambda, RngStream& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

void RngStream::jump() {
  static constexpr std::array<std::uint64_t, 4> kJump = {
      0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL, 0xa9582618e03fc9aaULL,
      0x39abdc4529b1661cULL};
  std::array<std::uint64_t, 4> acc{};
  for (const std::uint64_t word : kJump) {
    for (int b = 0; b < 64; ++b) {
      if (word & (std::uint64_t{1} << b)) {
        for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
      }
      next_u64();
    }
  }
  s_ = acc;
}

RngStream RngStream::split(std::uint64_t index) const {
  RngStream out = *this;
  for (std::uint64_t i = 0; i <= index; ++i) out.jump();
  return out;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
  // Marsaglia polar method; the second variate is discarded so that the
  // stream has no hidden cache.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape, double rate) {
  if (shape < 1.0) {
    const double boost = std::pow(uniform(), 1.0 / shape);
    return gamma(shape + 1.0, rate) * boost;
  }
  // Marsaglia & Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

double RngStream::beta_a1(double a) { return std::pow(uniform(), 1.0 / a); }

std::uint64_t RngStream::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda >= 30.0) return poisson_ptrs(lambda, *this);
  const double limit = std::exp(-lambda);
  std::uint64_t k = 0;
  double prod = uniform();
  while (prod > limit) {
    ++k;
    prod *= uniform();
  }
  return k;
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

void validate(const DistSpec& spec) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid distribution parameter: " + what);
  };
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianDist>) {
          if (!(d.sd > 0.0) || !std::isfinite(d.mean)) fail("gaussian sd");
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          if (!(d.shape > 0.0) || !(d.rate > 0.0)) fail("gamma shape/rate");
        } else if constexpr (std::is_same_v<T, BetaA1Dist>) {
          if (!(d.a > 0.0)) fail("beta a");
        } else if constexpr (std::is_same_v<T, PoissonDist>) {
          if (!(d.lambda >= 0.0) || !std::isfinite(d.lambda)) fail("poisson lambda");
        } else if constexpr (std::is_same_v<T, BernoulliDist>) {
          if (!(d.p >= 0.0 && d.p <= 1.0)) fail("bernoulli p");
        } else if constexpr (std::is_same_v<T, UniformDist>) {
          if (!(d.lo < d.hi)) fail("uniform bounds");
        }
      },
      spec);
}

std::size_t RngStream::index(std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

double draw(const DistSpec& spec, RngStream& rng) {
  validate(spec);
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, GaussianDist>) {
          return rng.normal(d.mean, d.sd);
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return rng.gamma(d.shape, d.rate);
        } else if constexpr (std::is_same_v<T, BetaA1Dist>) {
          return rng.beta_a1(d.a);
        } else if constexpr (std::is_same_v<T, PoissonDist>) {
          return static_cast<double>(rng.poisson(d.lambda));
        } else if constexpr (std::is_same_v<T, BernoulliDist>) {
          return rng.bernoulli(d.p) ? 1.0 : 0.0;
        } else {
          return rng.uniform(d.lo, d.hi);
        }
      },
      spec);
}

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double std_normal_log_pdf(double x) {
  return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_std_normal_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x > -35.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Mills-ratio asymptotic expansion.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return std_normal_log_pdf(x) - std::log(-x) + std::log(series);
}

double std_normal_inv_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("std_normal_inv_cdf: p must lie in (0, 1)");
  }
  // Acklam's rational approximation (relative error ~1e-9).
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the erfc-based CDF. In the upper tail the
  // residual is formed from the complement to avoid cancellation.
  double e;
  if (p > 0.5) {
    e = (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  } else {
    e = std_normal_cdf(x) - p;
  }
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double clamped_probit(double p) {
  const double clamped =
      std::fmin(std::fmax(p, kProbabilityClamp), 1.0 - kProbabilityClamp);
  return std_normal_inv_cdf(clamped);
}

double gamma_log_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

}  // namespace sibp
