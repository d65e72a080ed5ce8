#include "sibp/preference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sibp/samplers.hpp"

namespace sibp {

TripletSet::TripletSet(std::size_t num_objects, std::vector<Triplet> triples)
    : triples_(std::move(triples)), involving_(num_objects) {
  for (std::size_t t = 0; t < triples_.size(); ++t) {
    const Triplet& tr = triples_[t];
    if (tr.i >= num_objects || tr.j >= num_objects || tr.l >= num_objects) {
      throw std::invalid_argument("TripletSet: index out of range in triple " +
                                  std::to_string(t));
    }
    if (tr.i == tr.j || tr.i == tr.l || tr.j == tr.l) {
      throw std::invalid_argument("TripletSet: repeated index in triple " +
                                  std::to_string(t));
    }
    involving_[tr.i].push_back(t);
    involving_[tr.j].push_back(t);
    involving_[tr.l].push_back(t);
  }
}

double preference_from_mass(const PreferenceMass& mass) {
  const double total = mass.toward + mass.away;
  if (!(total > 0.0)) return 0.5;
  return mass.toward / total;
}

double log_preference(const PreferenceMass& mass, double noise) {
  const double total = mass.toward + mass.away;
  if (!(total > 0.0)) return -std::numbers::ln2;
  // Cached masses can drift a few ulps below zero after many updates.
  const double p = std::fmax(mass.toward, 0.0) / total;
  if (noise == 0.0) return std::log(p);
  return std::log(0.5 * noise + (1.0 - noise) * p);
}

namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t c, std::size_t w) {
  if (a != b || a != c || a != w) {
    throw std::invalid_argument("preference: vector length mismatch");
  }
}

void accumulate(PreferenceMass& mass, std::span<const std::uint8_t> zi,
                std::span<const std::uint8_t> zj, std::span<const std::uint8_t> zl,
                std::span<const double> w) {
  for (std::size_t k = 0; k < w.size(); ++k) {
    const int side = preference_side(zi[k], zj[k], zl[k]);
    if (side > 0) {
      mass.toward += w[k];
    } else if (side < 0) {
      mass.away += w[k];
    }
  }
}

void accumulate_column(PreferenceMass& mass, const Triplet& t, const BinaryMatrix& bits,
                       std::span<const double> w) {
  for (std::size_t k = 0; k < w.size(); ++k) {
    const int side = preference_side(bits(t.i, k), bits(t.j, k), bits(t.l, k));
    if (side > 0) {
      mass.toward += w[k];
    } else if (side < 0) {
      mass.away += w[k];
    }
  }
}

void check_matrix(const TripletSet& T, const BinaryMatrix& Z, const PreferenceWeights& weights,
                  const BinaryMatrix* H) {
  if (Z.cols() != weights.w.size()) {
    throw std::invalid_argument("triplet likelihood: Z columns do not match w");
  }
  if (T.num_objects() > Z.rows() && !T.empty()) {
    throw std::out_of_range("triplet likelihood: triplet indices exceed Z rows");
  }
  const std::size_t hash_bits = H ? H->cols() : 0;
  if (hash_bits != weights.wH.size()) {
    throw std::invalid_argument("triplet likelihood: hash columns do not match wH");
  }
  if (H && H->rows() != Z.rows() && H->cols() > 0) {
    throw std::invalid_argument("triplet likelihood: hash rows do not match Z");
  }
}

}  // namespace

double preference_prob(std::span<const std::uint8_t> zi, std::span<const std::uint8_t> zj,
                       std::span<const std::uint8_t> zl, std::span<const double> w) {
  check_lengths(zi.size(), zj.size(), zl.size(), w.size());
  PreferenceMass mass;
  accumulate(mass, zi, zj, zl, w);
  return preference_from_mass(mass);
}

double extended_preference_prob(std::span<const std::uint8_t> zi,
                                std::span<const std::uint8_t> zj,
                                std::span<const std::uint8_t> zl,
                                std::span<const std::uint8_t> hi,
                                std::span<const std::uint8_t> hj,
                                std::span<const std::uint8_t> hl,
                                const PreferenceWeights& weights) {
  check_lengths(zi.size(), zj.size(), zl.size(), weights.w.size());
  check_lengths(hi.size(), hj.size(), hl.size(), weights.wH.size());
  PreferenceMass mass;
  accumulate(mass, zi, zj, zl, weights.w);
  accumulate(mass, hi, hj, hl, weights.wH);
  return preference_from_mass(mass);
}

PreferenceMass triple_mass(const Triplet& t, const BinaryMatrix& Z,
                           const PreferenceWeights& weights, const BinaryMatrix* H) {
  PreferenceMass mass;
  accumulate_column(mass, t, Z, weights.w);
  if (H) accumulate_column(mass, t, *H, weights.wH);
  return mass;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double total = 0.0;
    for (const double v : values) total += v;
    return total;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double triplet_log_likelihood(const TripletSet& T, const BinaryMatrix& Z,
                              const PreferenceWeights& weights, const BinaryMatrix* H,
                              double noise) {
  check_matrix(T, Z, weights, H);
  std::vector<double> terms(T.size());
  for (std::size_t t = 0; t < T.size(); ++t) {
    terms[t] = log_preference(triple_mass(T[t], Z, weights, H), noise);
  }
  return pairwise_sum(terms);
}

double flip_delta_log_likelihood(const TripletSet& T, const BinaryMatrix& Z,
                                 const PreferenceWeights& weights, const BinaryMatrix* H,
                                 std::size_t n, std::size_t k, double noise) {
  check_matrix(T, Z, weights, H);
  if (n >= Z.rows() || k >= Z.cols()) {
    throw std::out_of_range("flip_delta_log_likelihood: index out of range");
  }
  if (n >= T.num_objects()) return 0.0;
  PreferenceTracker tracker(T, H, noise);
  BinaryMatrix flipped = Z;
  flipped.flip(n, k);
  return tracker.local_log_likelihood(flipped, weights, n) -
         tracker.local_log_likelihood(Z, weights, n);
}

PreferenceTracker::PreferenceTracker(const TripletSet& triplets, const BinaryMatrix* hash,
                                     double noise)
    : triplets_(&triplets), hash_(hash), noise_(noise) {
  if (!(noise >= 0.0 && noise < 1.0)) {
    throw std::invalid_argument("PreferenceTracker: noise must lie in [0, 1)");
  }
}

namespace {

PreferenceTracker::SideCounts count_sides(const Triplet& t, const BinaryMatrix& Z,
                                          const BinaryMatrix* H) {
  PreferenceTracker::SideCounts c;
  auto add = [&](const BinaryMatrix& bits) {
    for (std::size_t k = 0; k < bits.cols(); ++k) {
      const int side = preference_side(bits(t.i, k), bits(t.j, k), bits(t.l, k));
      if (side > 0) ++c.toward;
      if (side < 0) ++c.away;
    }
  };
  add(Z);
  if (H) add(*H);
  return c;
}

// Moves weight wk between the sides of one triple; a side with no
// discriminating bit left gets exactly zero mass.
void move_side(PreferenceMass& m, PreferenceTracker::SideCounts& c, int before, int after,
               double wk) {
  if (before > 0) {
    m.toward -= wk;
    --c.toward;
  }
  if (before < 0) {
    m.away -= wk;
    --c.away;
  }
  if (after > 0) {
    m.toward += wk;
    ++c.toward;
  }
  if (after < 0) {
    m.away += wk;
    ++c.away;
  }
  if (c.toward == 0) m.toward = 0.0;
  if (c.away == 0) m.away = 0.0;
}

}  // namespace

void PreferenceTracker::rebuild(const BinaryMatrix& Z, const PreferenceWeights& weights) {
  check_matrix(*triplets_, Z, weights, hash_);
  mass_.assign(triplets_->size(), PreferenceMass{});
  counts_.assign(triplets_->size(), SideCounts{});
  for (std::size_t t = 0; t < triplets_->size(); ++t) {
    mass_[t] = triple_mass((*triplets_)[t], Z, weights, hash_);
    counts_[t] = count_sides((*triplets_)[t], Z, hash_);
  }
}

void PreferenceTracker::refresh(const BinaryMatrix& Z, const PreferenceWeights& weights,
                                std::size_t n) {
  if (n >= triplets_->num_objects()) return;
  for (const std::size_t t : triplets_->involving(n)) {
    mass_[t] = triple_mass((*triplets_)[t], Z, weights, hash_);
    counts_[t] = count_sides((*triplets_)[t], Z, hash_);
  }
}

double PreferenceTracker::log_likelihood() const {
  std::vector<double> terms(mass_.size());
  for (std::size_t t = 0; t < mass_.size(); ++t) terms[t] = log_preference(mass_[t], noise_);
  return pairwise_sum(terms);
}

double PreferenceTracker::flip_delta(const BinaryMatrix& Z, std::span<const double> w,
                                     std::size_t n, std::size_t k) const {
  if (n >= triplets_->num_objects()) return 0.0;
  double delta = 0.0;
  for (const std::size_t t : triplets_->involving(n)) {
    const Triplet& tr = (*triplets_)[t];
    std::uint8_t zi = Z(tr.i, k);
    std::uint8_t zj = Z(tr.j, k);
    std::uint8_t zl = Z(tr.l, k);
    const int before = preference_side(zi, zj, zl);
    if (tr.i == n) zi ^= 1;
    if (tr.j == n) zj ^= 1;
    if (tr.l == n) zl ^= 1;
    const int after = preference_side(zi, zj, zl);
    if (before == after) continue;
    PreferenceMass next = mass_[t];
    SideCounts counts = counts_[t];
    move_side(next, counts, before, after, w[k]);
    delta += log_preference(next, noise_) - log_preference(mass_[t], noise_);
  }
  return delta;
}

void PreferenceTracker::apply_flip(BinaryMatrix& Z, std::span<const double> w, std::size_t n,
                                   std::size_t k) {
  if (n < triplets_->num_objects()) {
    for (const std::size_t t : triplets_->involving(n)) {
      const Triplet& tr = (*triplets_)[t];
      std::uint8_t zi = Z(tr.i, k);
      std::uint8_t zj = Z(tr.j, k);
      std::uint8_t zl = Z(tr.l, k);
      const int before = preference_side(zi, zj, zl);
      if (tr.i == n) zi ^= 1;
      if (tr.j == n) zj ^= 1;
      if (tr.l == n) zl ^= 1;
      const int after = preference_side(zi, zj, zl);
      if (before == after) continue;
      move_side(mass_[t], counts_[t], before, after, w[k]);
    }
  }
  Z.flip(n, k);
}

double PreferenceTracker::local_log_likelihood(const BinaryMatrix& Z,
                                               const PreferenceWeights& weights,
                                               std::size_t n) const {
  if (n >= triplets_->num_objects()) return 0.0;
  double total = 0.0;
  for (const std::size_t t : triplets_->involving(n)) {
    total += log_preference(triple_mass((*triplets_)[t], Z, weights, hash_), noise_);
  }
  return total;
}

PreferenceTracker::ColumnTerms PreferenceTracker::column_terms(const BinaryMatrix& bits,
                                                               std::size_t column) const {
  ColumnTerms terms;
  for (std::size_t t = 0; t < triplets_->size(); ++t) {
    const Triplet& tr = (*triplets_)[t];
    const int side = preference_side(bits(tr.i, column), bits(tr.j, column), bits(tr.l, column));
    if (side != 0) {
      terms.triples.push_back(t);
      terms.sides.push_back(static_cast<std::int8_t>(side));
    }
  }
  return terms;
}

double PreferenceTracker::column_log_likelihood(const ColumnTerms& terms, double current,
                                                double proposed) const {
  double total = 0.0;
  const double change = proposed - current;
  for (std::size_t a = 0; a < terms.triples.size(); ++a) {
    PreferenceMass m = mass_[terms.triples[a]];
    if (terms.sides[a] > 0) {
      m.toward += change;
    } else {
      m.away += change;
    }
    total += log_preference(m, noise_);
  }
  return total;
}

void PreferenceTracker::commit_weight(const ColumnTerms& terms, double current,
                                      double proposed) {
  const double change = proposed - current;
  for (std::size_t a = 0; a < terms.triples.size(); ++a) {
    PreferenceMass& m = mass_[terms.triples[a]];
    if (terms.sides[a] > 0) {
      m.toward += change;
    } else {
      m.away += change;
    }
  }
}

namespace {

double resample_one_weight(PreferenceTracker& tracker, const BinaryMatrix& bits,
                           std::size_t column, double current, const GammaDist& prior,
                           RngStream& rng) {
  const auto terms = tracker.column_terms(bits, column);
  // Density of u = log w: Gamma(e^u) * e^u * likelihood.
  auto target = [&](double u) {
    const double value = std::exp(u);
    if (!(value > 0.0) || !std::isfinite(value)) {
      return -std::numeric_limits<double>::infinity();
    }
    return gamma_log_pdf(value, prior.shape, prior.rate) + u +
           tracker.column_log_likelihood(terms, current, value);
  };
  const double u = slice_sample_1d(target, std::log(current), kDefaultSliceWidth,
                                   kDefaultSliceSteps, rng);
  const double next = std::exp(u);
  tracker.commit_weight(terms, current, next);
  return next;
}

}  // namespace

void resample_preference_weights(PreferenceTracker& tracker, const BinaryMatrix& Z,
                                 PreferenceWeights& weights, const GammaDist& prior,
                                 RngStream& rng) {
  for (std::size_t k = 0; k < weights.w.size(); ++k) {
    weights.w[k] = resample_one_weight(tracker, Z, k, weights.w[k], prior, rng);
  }
  if (tracker.hash()) {
    for (std::size_t d = 0; d < weights.wH.size(); ++d) {
      weights.wH[d] = resample_one_weight(tracker, *tracker.hash(), d, weights.wH[d], prior, rng);
    }
  }
}

TripletSet read_triplets(const std::filesystem::path& path, std::size_t num_objects) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open triplet file " + path.string());
  std::vector<Triplet> triples;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t values[3];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int f = 0; f < 3; ++f) {
      auto [ptr, ec] = std::from_chars(p, end, values[f]);
      if (ec != std::errc()) {
        throw ParseError("expected a non-negative integer", line_no,
                         static_cast<std::size_t>(p - line.data()) + 1);
      }
      p = ptr;
      if (f < 2) {
        if (p == end || *p != ',') {
          throw ParseError("expected ','", line_no, static_cast<std::size_t>(p - line.data()) + 1);
        }
        ++p;
      }
    }
    if (p != end) {
      throw ParseError("trailing characters", line_no, static_cast<std::size_t>(p - line.data()) + 1);
    }
    triples.push_back({values[0], values[1], values[2]});
    for (const auto v : values) max_index = std::max(max_index, v);
  }
  if (num_objects == 0) num_objects = triples.empty() ? 0 : max_index + 1;
  try {
    return TripletSet(num_objects, std::move(triples));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

void write_triplets(const TripletSet& triplets, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write triplet file " + path.string());
  for (const Triplet& t : triplets.triples()) out << t.i << ',' << t.j << ',' << t.l << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace sibp
