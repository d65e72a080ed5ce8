#include <doctest.h>

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "sibp/errors.hpp"
#include "sibp/preference.hpp"
#include "test_util.hpp"

using namespace sibp;

namespace {

using Bits = std::vector<std::uint8_t>;

BinaryMatrix random_matrix(std::size_t n, std::size_t k, RngStream& rng) {
  BinaryMatrix Z(n, k);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < k; ++c) Z.set(r, c, rng.bernoulli(0.5));
  return Z;
}

TripletSet random_triplets(std::size_t n, std::size_t count, RngStream& rng) {
  std::vector<Triplet> ts;
  while (ts.size() < count) {
    const auto i = rng.next_u64() % n, j = rng.next_u64() % n, l = rng.next_u64() % n;
    if (i == j || i == l || j == l) continue;
    ts.push_back({i, j, l});
  }
  return TripletSet(n, ts);
}

// Direct transcription of the indicator sums, independent of the library.
double oracle_prob(const Bits& zi, const Bits& zj, const Bits& zl, const std::vector<double>& w) {
  double a = 0.0, b = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    a += w[k] * (zi[k] == zj[k]) * (1 - (zi[k] == zl[k]));
    b += w[k] * (zi[k] == zl[k]) * (1 - (zi[k] == zj[k]));
  }
  return a + b > 0.0 ? a / (a + b) : 0.5;
}

}  // namespace

TEST_CASE("preference probability hand examples") {
  const Bits zi{1, 0, 1}, zj{1, 1, 0}, zl{0, 0, 1};
  const std::vector<double> w{2, 1, 4};
  CHECK(preference_prob(zi, zj, zl, w) == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
  CHECK(preference_prob(zi, zl, zj, w) == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
  CHECK(preference_prob(zi, zi, zi, w) == 0.5);
  CHECK_THROWS(preference_prob(zi, zj, Bits{0, 1}, w));

  PreferenceWeights pw{w, {}};
  CHECK(extended_preference_prob(zi, zj, zl, {}, {}, {}, pw) == preference_prob(zi, zj, zl, w));
  PreferenceWeights hw{{1, 1, 1}, {3}};
  const Bits zero{0, 0, 0};
  CHECK(extended_preference_prob(zero, zero, zero, Bits{1}, Bits{1}, Bits{0}, hw) == 1.0);
  PreferenceWeights none{{0, 0, 0}, {0}};
  CHECK(extended_preference_prob(zi, zj, zl, Bits{1}, Bits{1}, Bits{0}, none) == 0.5);
  CHECK_THROWS(extended_preference_prob(zi, zj, zl, Bits{1}, Bits{1}, Bits{0, 1}, hw));
}

TEST_CASE("preference probability properties on random instances") {
  RngStream rng(3);
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t k = 1 + rng.next_u64() % 6;
    Bits zi(k), zj(k), zl(k);
    std::vector<double> w(k);
    for (std::size_t c = 0; c < k; ++c) {
      zi[c] = rng.bernoulli(0.5);
      zj[c] = rng.bernoulli(0.5);
      zl[c] = rng.bernoulli(0.5);
      w[c] = rng.gamma(1.0, 1.0);
    }
    const double p = preference_prob(zi, zj, zl, w);
    CHECK(std::abs(p - oracle_prob(zi, zj, zl, w)) < 1e-14);
    CHECK(std::abs(p + preference_prob(zi, zl, zj, w) - 1.0) < 1e-12);
    auto scaled = w;
    for (auto& x : scaled) x *= 7.3;
    CHECK(std::abs(preference_prob(zi, zj, zl, scaled) - p) < 1e-12);
    for (std::size_t c = 0; c < k; ++c) {
      if (preference_side(zi[c], zj[c], zl[c]) != 1) continue;
      auto more = w;
      more[c] += 1.0;
      CHECK(preference_prob(zi, zj, zl, more) >= p - 1e-15);
    }
  }
}

TEST_CASE("triplet log likelihood") {
  const auto Z = BinaryMatrix::from_rows({{1, 0, 1}, {1, 1, 0}, {0, 0, 1}}, 3);
  PreferenceWeights w{{2, 1, 4}, {}};
  CHECK(triplet_log_likelihood(TripletSet(3, {}), Z, w) == 0.0);
  CHECK(triplet_log_likelihood(TripletSet(3, {{0, 1, 2}}), Z, w) ==
        doctest::Approx(std::log(2.0 / 7.0)).epsilon(1e-14));
  CHECK(triplet_log_likelihood(TripletSet(3, {{0, 1, 2}, {0, 2, 1}}), Z, w) ==
        doctest::Approx(std::log(2.0 / 7.0) + std::log(5.0 / 7.0)).epsilon(1e-14));
  CHECK(triplet_log_likelihood(TripletSet(3, {{0, 1, 2}, {0, 1, 2}}), Z, w) ==
        doctest::Approx(2.0 * std::log(2.0 / 7.0)).epsilon(1e-14));
  const double noise = 0.1;
  CHECK(triplet_log_likelihood(TripletSet(3, {{0, 1, 2}}), Z, w, nullptr, noise) ==
        doctest::Approx(std::log(noise / 2 + (1 - noise) * 2.0 / 7.0)).epsilon(1e-14));
  CHECK_THROWS_AS(TripletSet(3, {{0, 1, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(TripletSet(3, {{0, 0, 1}}), std::invalid_argument);
}

TEST_CASE("flip delta matches full recomputation") {
  RngStream rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 3 + rng.next_u64() % 8, k = 1 + rng.next_u64() % 6;
    auto Z = random_matrix(n, k, rng);
    const auto T = random_triplets(n, 1 + rng.next_u64() % 40, rng);
    PreferenceWeights w;
    for (std::size_t c = 0; c < k; ++c) w.w.push_back(rng.gamma(1.0, 1.0));
    const bool with_hash = rep % 2 == 0;
    const auto H = random_matrix(n, 2, rng);
    if (with_hash) w.wH = {rng.gamma(1.0, 1.0), rng.gamma(1.0, 1.0)};
    const BinaryMatrix* h = with_hash ? &H : nullptr;
    const double noise = rep % 3 == 0 ? 0.0 : 0.05;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        const double before = triplet_log_likelihood(T, Z, w, h, noise);
        const double delta = flip_delta_log_likelihood(T, Z, w, h, r, c, noise);
        Z.flip(r, c);
        const double after = triplet_log_likelihood(T, Z, w, h, noise);
        if (std::isfinite(before) && std::isfinite(after)) CHECK(std::abs(delta - (after - before)) < 1e-10);
        const double back = flip_delta_log_likelihood(T, Z, w, h, r, c, noise);
        if (std::isfinite(delta)) CHECK(std::abs(delta + back) < 1e-10);
        Z.flip(r, c);
      }
    }
  }
  auto Z = BinaryMatrix::from_rows({{1, 0}, {1, 1}, {0, 0}, {1, 1}}, 2);
  PreferenceWeights w{{1, 2}, {}};
  CHECK(flip_delta_log_likelihood(TripletSet(4, {{0, 1, 2}}), Z, w, nullptr, 3, 0) == 0.0);
}

TEST_CASE("tracker stays in sync") {
  RngStream rng(9);
  const std::size_t n = 10, k = 5;
  auto Z = random_matrix(n, k, rng);
  const auto T = random_triplets(n, 40, rng);
  const auto H = random_matrix(n, 3, rng);
  PreferenceWeights w{{0.5, 1, 2, 0.1, 3}, {1, 0.2, 0.7}};
  PreferenceTracker tracker(T, &H, 0.02);
  tracker.rebuild(Z, w);
  for (int step = 0; step < 300; ++step) {
    const auto r = rng.next_u64() % n, c = rng.next_u64() % k;
    const double expect = tracker.flip_delta(Z, w.w, r, c);
    const double before = tracker.log_likelihood();
    tracker.apply_flip(Z, w.w, r, c);
    CHECK(tracker.log_likelihood() - before == doctest::Approx(expect).epsilon(1e-9));
    CHECK(tracker.log_likelihood() ==
          doctest::Approx(triplet_log_likelihood(T, Z, w, &H, 0.02)).epsilon(1e-10));
  }
  const auto terms = tracker.column_terms(Z, 2);
  const double full_before = tracker.log_likelihood();
  const double part_before = tracker.column_log_likelihood(terms, w.w[2], w.w[2]);
  const double part_after = tracker.column_log_likelihood(terms, w.w[2], 5.0);
  tracker.commit_weight(terms, w.w[2], 5.0);
  w.w[2] = 5.0;
  CHECK(tracker.log_likelihood() - full_before ==
        doctest::Approx(part_after - part_before).epsilon(1e-9));
  CHECK(tracker.log_likelihood() ==
        doctest::Approx(triplet_log_likelihood(T, Z, w, &H, 0.02)).epsilon(1e-10));
}

TEST_CASE("weights recover the prior without triples") {
  const BinaryMatrix Z(4, 1);
  const TripletSet T(4, {});
  PreferenceTracker tracker(T, nullptr, 0.0);
  PreferenceWeights w{{1.0}, {}};
  tracker.rebuild(Z, w);
  RngStream rng(21);
  std::vector<double> xs;
  for (int s = 0; s < 20000; ++s) {
    resample_preference_weights(tracker, Z, w, GammaDist{2.0, 1.0}, rng);
    if (s % 4 == 0) xs.push_back(w.w[0]);
  }
  CHECK(testing::ks_pvalue(xs, [](double x) { return 1.0 - std::exp(-x) * (1.0 + x); }) > 0.01);
}

TEST_CASE("triplet files") {
  const auto dir = testing::scratch_dir("triplets");
  const TripletSet T(5, {{0, 1, 2}, {4, 3, 0}});
  write_triplets(T, dir / "t.txt");
  const auto back = read_triplets(dir / "t.txt");
  CHECK(back.triples() == T.triples());
  CHECK(back.num_objects() == 5);
  CHECK(read_triplets(dir / "t.txt", 9).num_objects() == 9);
  std::ofstream(dir / "bad.txt") << "0,1,2\n3,x,1\n";
  try {
    read_triplets(dir / "bad.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS(read_triplets(dir / "missing.txt"));
}
