#include "sibp/ibp_prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace sibp {

double harmonic_number(std::size_t n) {
  double total = 0.0;
  for (std::size_t i = n; i >= 1; --i) total += 1.0 / static_cast<double>(i);
  return total;
}

BinaryMatrix sample_ibp_matrix(std::size_t num_objects, double alpha, RngStream& rng) {
  if (num_objects == 0) throw std::invalid_argument("sample_ibp_matrix: need N >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_ibp_matrix: alpha must be > 0");
  BinaryMatrix Z(num_objects, 0);
  for (std::size_t n = 0; n < num_objects; ++n) {
    const double customers = static_cast<double>(n + 1);
    for (std::size_t k = 0; k < Z.cols(); ++k) {
      if (rng.uniform() < static_cast<double>(Z.column_count(k)) / customers) Z.set(n, k, true);
    }
    const std::uint64_t fresh = rng.poisson(alpha / customers);
    for (std::uint64_t d = 0; d < fresh; ++d) {
      Z.append_column();
      Z.set(n, Z.cols() - 1, true);
    }
  }
  return Z;
}

double existing_feature_prior_prob(std::size_t m_minus, std::size_t num_objects) {
  if (num_objects == 0 || m_minus + 1 > num_objects) {
    throw std::out_of_range("existing_feature_prior_prob: need m_minus <= N - 1");
  }
  return static_cast<double>(m_minus) / static_cast<double>(num_objects);
}

Sticks sample_stick_lengths(std::size_t num_sticks, double alpha, RngStream& rng) {
  if (num_sticks == 0) throw std::invalid_argument("sample_stick_lengths: need K >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_stick_lengths: alpha must be > 0");
  Sticks sticks;
  sticks.alpha = alpha;
  sticks.b.reserve(num_sticks);
  double b = 1.0;
  for (std::size_t k = 0; k < num_sticks; ++k) {
    b *= rng.beta_a1(alpha);
    sticks.b.push_back(b);
  }
  return sticks;
}

double log_ibp_prior(const BinaryMatrix& Z, double alpha) {
  const std::size_t n = Z.rows();
  const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
  std::map<std::vector<std::uint8_t>, std::size_t> histories;
  double total = -alpha * harmonic_number(n);
  for (std::size_t k = 0; k < Z.cols(); ++k) {
    const std::size_t m = Z.column_count(k);
    if (m == 0) continue;
    ++histories[std::vector<std::uint8_t>(Z.column(k).begin(), Z.column(k).end())];
    total += std::log(alpha) + std::lgamma(static_cast<double>(n - m) + 1.0) +
             std::lgamma(static_cast<double>(m)) - log_n_fact;
  }
  for (const auto& [history, multiplicity] : histories) {
    total -= std::lgamma(static_cast<double>(multiplicity) + 1.0);
  }
  return total;
}

double resample_alpha(const BinaryMatrix& Z, const GammaDist& prior, RngStream& rng) {
  std::size_t active = 0;
  for (std::size_t k = 0; k < Z.cols(); ++k) active += Z.column_count(k) > 0 ? 1 : 0;
  return rng.gamma(prior.shape + static_cast<double>(active),
                   prior.rate + harmonic_number(Z.rows()));
}

double resample_alpha(const Sticks& sticks, const GammaDist& prior, RngStream& rng,
                      double tail_mass) {
  // sum_j log v_j telescopes to log b_K.
  const double log_last = sticks.b.empty() ? 0.0 : std::log(sticks.b.back());
  return rng.gamma(prior.shape + static_cast<double>(sticks.b.size()),
                   prior.rate - log_last + tail_mass);
}

double tail_exponent(double b, std::size_t num_objects) {
  const double x = 1.0 - b;
  double power = 1.0;
  double total = 0.0;
  for (std::size_t i = 1; i <= num_objects; ++i) {
    power *= x;
    total += power / static_cast<double>(i);
  }
  return total;
}

double tail_active_mass(double b, std::size_t num_objects) {
  const double x = 1.0 - b;
  double power = 1.0;
  double total = 0.0;
  for (std::size_t i = 1; i <= num_objects; ++i) {
    power *= x;
    total += (1.0 - power) / static_cast<double>(i);
  }
  return total;
}

double inactive_stick_log_density(double b, double alpha, std::size_t num_objects) {
  if (!(b > 0.0 && b < 1.0)) {
    if (b == 1.0 && num_objects == 0) return 0.0;
    return -std::numeric_limits<double>::infinity();
  }
  return alpha * tail_exponent(b, num_objects) + (alpha - 1.0) * std::log(b) +
         static_cast<double>(num_objects) * std::log1p(-b);
}

double sample_inactive_stick(double upper, double alpha, std::size_t num_objects,
                             RngStream& rng) {
  if (!(upper > 0.0 && upper <= 1.0)) {
    throw std::invalid_argument("sample_inactive_stick: upper must lie in (0, 1]");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_inactive_stick: alpha must be > 0");
  // Work in u = log b, where the density is exp(alpha u) times a bounded,
  // decreasing factor; below the grid it is treated as a pure exponential.
  constexpr std::size_t kGrid = 2048;
  const double u_hi = std::log(upper);
  const double span = std::min(60.0 / alpha + 10.0, 700.0);
  const double u_lo = u_hi - span;
  const double h = span / static_cast<double>(kGrid - 1);

  std::vector<double> logd(kGrid);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < kGrid; ++g) {
    const double u = u_lo + h * static_cast<double>(g);
    const double b = std::exp(u);
    double value = alpha * u + alpha * tail_exponent(b, num_objects);
    if (num_objects > 0) {
      value = b < 1.0 ? value + static_cast<double>(num_objects) * std::log1p(-b)
                      : -std::numeric_limits<double>::infinity();
    }
    logd[g] = value;
    top = std::max(top, value);
  }
  for (auto& v : logd) v = std::max(v - top, -800.0);

  // Segment masses under piecewise-exponential interpolation; segment 0 is
  // the region below the grid.
  auto segment_mass = [&](double la, double slope) {
    if (std::fabs(slope * h) < 1e-10) return std::exp(la) * h;
    return std::exp(la) * std::expm1(slope * h) / slope;
  };
  std::vector<double> cumulative(kGrid);
  cumulative[0] = std::exp(logd[0]) / alpha;
  for (std::size_t g = 1; g < kGrid; ++g) {
    const double slope = (logd[g] - logd[g - 1]) / h;
    cumulative[g] = cumulative[g - 1] + segment_mass(logd[g - 1], slope);
  }

  const double target = rng.uniform() * cumulative.back();
  const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
  const auto seg = static_cast<std::size_t>(it - cumulative.begin());
  double u;
  if (seg == 0) {
    // exp(alpha (u - u_lo)) below the grid: u = u_lo + log(V) / alpha.
    u = u_lo + std::log(target / cumulative[0]) / alpha;
  } else {
    const double la = logd[seg - 1];
    const double slope = (logd[seg] - la) / h;
    const double r = target - cumulative[seg - 1];
    double t;
    if (std::fabs(slope * h) < 1e-10) {
      t = r / std::exp(la);
    } else {
      t = std::log1p(r * slope * std::exp(-la)) / slope;
    }
    u = u_lo + h * static_cast<double>(seg - 1) + std::clamp(t, 0.0, h);
  }
  const double b = std::exp(u);
  return std::clamp(b, std::numeric_limits<double>::min(), std::nextafter(upper, 0.0));
}

}  // namespace sibp
