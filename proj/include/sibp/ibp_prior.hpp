#pragma once

#include <cstddef>
#include <vector>

#include "sibp/binary_matrix.hpp"
#include "sibp/distributions.hpp"

namespace sibp {

/// Decreasing stick lengths b_1 >= b_2 >= ... (b_k = prod_{j<=k} v_j) and
/// the concentration they were drawn with.
struct Sticks {
  std::vector<double> b;
  double alpha = 1.0;
};

/// H_N = sum_{i=1}^N 1/i.
double harmonic_number(std::size_t n);

/// Sequential buffet draw: customer n takes dish k with probability m_k / n
/// and Poisson(alpha / n) new dishes.
BinaryMatrix sample_ibp_matrix(std::size_t num_objects, double alpha, RngStream& rng);

/// m_{-n,k} / N; throws std::out_of_range unless m_minus <= N - 1.
double existing_feature_prior_prob(std::size_t m_minus, std::size_t num_objects);

Sticks sample_stick_lengths(std::size_t num_sticks, double alpha, RngStream& rng);

/// log P([Z] | alpha) for the left-ordered equivalence class of Z. All-zero
/// columns are ignored.
double log_ibp_prior(const BinaryMatrix& Z, double alpha);

/// alpha | K+ ~ Gamma(shape + K+, rate + H_N), K+ = non-empty columns of Z.
double resample_alpha(const BinaryMatrix& Z, const GammaDist& prior, RngStream& rng);

/// alpha | v ~ Gamma(shape + K, rate - sum_j log v_j + tail_mass).
/// `tail_mass` is the expected number of active features beyond the last
/// represented stick per unit alpha (zero for a finite stick sequence).
double resample_alpha(const Sticks& sticks, const GammaDist& prior, RngStream& rng,
                      double tail_mass = 0.0);

/// sum_{i=1}^N (1/i) (1 - b)^i, the exponent of the inactive-tail density.
double tail_exponent(double b, std::size_t num_objects);

/// sum_{i=1}^N (1/i) (1 - (1 - b)^i): expected number of active features,
/// per unit alpha, among all sticks below b.
double tail_active_mass(double b, std::size_t num_objects);

/// Unnormalised log density of the stick following one of length `upper`
/// when every later feature is inactive:
/// alpha * tail_exponent(b) + (alpha - 1) log b + N log(1 - b) on (0, upper).
double inactive_stick_log_density(double b, double alpha, std::size_t num_objects);

/// Exact draw from inactive_stick_log_density on (0, upper) by numerical
/// inversion of its CDF on a fine grid in log b.
double sample_inactive_stick(double upper, double alpha, std::size_t num_objects,
                             RngStream& rng);

}  // namespace sibp
