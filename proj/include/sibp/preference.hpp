#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sibp/binary_matrix.hpp"
#include "sibp/distributions.hpp"

namespace sibp {

/// "Object i prefers j to l": i shares a concept with j but not with l.
struct Triplet {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t l = 0;
  bool operator==(const Triplet&) const = default;
};

/// Triples over `num_objects` objects plus a per-object index listing every
/// triple in which the object appears (in any slot, once per triple).
class TripletSet {
 public:
  TripletSet() = default;
  /// Throws std::invalid_argument on out-of-range or repeated indices.
  TripletSet(std::size_t num_objects, std::vector<Triplet> triples);

  std::size_t num_objects() const { return involving_.size(); }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const std::vector<Triplet>& triples() const { return triples_; }
  const Triplet& operator[](std::size_t t) const { return triples_[t]; }
  const std::vector<std::size_t>& involving(std::size_t object) const {
    return involving_.at(object);
  }

 private:
  std::vector<Triplet> triples_;
  std::vector<std::vector<std::size_t>> involving_;
};

/// Non-negative weights for latent features (w) and observed hash bits (wH).
struct PreferenceWeights {
  std::vector<double> w;
  std::vector<double> wH;
};

/// Weight mass of features that favour j (shared by i and j, not by l) and
/// of features that favour l.
struct PreferenceMass {
  double toward = 0.0;
  double away = 0.0;
};

/// +1 if the bit favours j, -1 if it favours l, 0 otherwise.
inline int preference_side(std::uint8_t zi, std::uint8_t zj, std::uint8_t zl) {
  if (zi == zj && zi != zl) return 1;
  if (zi != zj && zi == zl) return -1;
  return 0;
}

/// p = toward / (toward + away), or 1/2 when no bit discriminates.
double preference_from_mass(const PreferenceMass& mass);

/// log of the preference probability mixed with symmetric label noise:
/// log(noise / 2 + (1 - noise) p). With noise == 0 this is log p, which is
/// -inf when only the away side carries mass.
double log_preference(const PreferenceMass& mass, double noise);

double preference_prob(std::span<const std::uint8_t> zi, std::span<const std::uint8_t> zj,
                       std::span<const std::uint8_t> zl, std::span<const double> w);

double extended_preference_prob(std::span<const std::uint8_t> zi,
                                std::span<const std::uint8_t> zj,
                                std::span<const std::uint8_t> zl,
                                std::span<const std::uint8_t> hi,
                                std::span<const std::uint8_t> hj,
                                std::span<const std::uint8_t> hl,
                                const PreferenceWeights& weights);

/// Mass of one triple under Z (and H when non-null).
PreferenceMass triple_mass(const Triplet& t, const BinaryMatrix& Z,
                           const PreferenceWeights& weights, const BinaryMatrix* H);

double triplet_log_likelihood(const TripletSet& T, const BinaryMatrix& Z,
                              const PreferenceWeights& weights,
                              const BinaryMatrix* H = nullptr, double noise = 0.0);

/// Change in triplet_log_likelihood when z_n^k is flipped. Only the triples
/// that contain n are visited.
double flip_delta_log_likelihood(const TripletSet& T, const BinaryMatrix& Z,
                                 const PreferenceWeights& weights, const BinaryMatrix* H,
                                 std::size_t n, std::size_t k, double noise = 0.0);

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

/// Incremental triplet likelihood: caches the per-triple masses so that
/// flips and single-weight changes cost O(triples touched).
class PreferenceTracker {
 public:
  PreferenceTracker(const TripletSet& triplets, const BinaryMatrix* hash, double noise);

  void rebuild(const BinaryMatrix& Z, const PreferenceWeights& weights);
  /// Recomputes the cached masses of the triples containing n, discarding
  /// rounding drift accumulated by incremental updates.
  void refresh(const BinaryMatrix& Z, const PreferenceWeights& weights, std::size_t n);
  double log_likelihood() const;

  double flip_delta(const BinaryMatrix& Z, std::span<const double> w, std::size_t n,
                    std::size_t k) const;
  /// Flips z_n^k in Z and updates the cached masses.
  void apply_flip(BinaryMatrix& Z, std::span<const double> w, std::size_t n, std::size_t k);

  /// Sum of log terms over the triples containing n, computed from scratch.
  double local_log_likelihood(const BinaryMatrix& Z, const PreferenceWeights& weights,
                              std::size_t n) const;

  /// Number of bits favouring each side of a triple.
  struct SideCounts {
    int toward = 0;
    int away = 0;
  };

  /// Triples on which one bit column (a latent feature or a hash bit)
  /// discriminates, with the side it favours.
  struct ColumnTerms {
    std::vector<std::size_t> triples;
    std::vector<std::int8_t> sides;
  };
  ColumnTerms column_terms(const BinaryMatrix& bits, std::size_t column) const;
  /// Log-likelihood of the affected triples when the column's weight moves
  /// from `current` to `proposed` (terms on other triples are omitted).
  double column_log_likelihood(const ColumnTerms& terms, double current,
                               double proposed) const;
  void commit_weight(const ColumnTerms& terms, double current, double proposed);

  const TripletSet& triplets() const { return *triplets_; }
  const BinaryMatrix* hash() const { return hash_; }
  double noise() const { return noise_; }

 private:
  const TripletSet* triplets_;
  const BinaryMatrix* hash_;
  double noise_;
  std::vector<PreferenceMass> mass_;
  std::vector<SideCounts> counts_;
};

/// Slice-samples every w_k (and every wH_d) on the log scale against its
/// Gamma(shape, rate) prior times the triplet likelihood. The tracker must
/// be in sync with (Z, weights) on entry and is kept in sync.
void resample_preference_weights(PreferenceTracker& tracker, const BinaryMatrix& Z,
                                 PreferenceWeights& weights, const GammaDist& prior,
                                 RngStream& rng);

/// One triple per line, "i,j,l", zero-based.
/// `num_objects` == 0 infers the object count from the largest index.
TripletSet read_triplets(const std::filesystem::path& path, std::size_t num_objects = 0);
void write_triplets(const TripletSet& triplets, const std::filesystem::path& path);

}  // namespace sibp
