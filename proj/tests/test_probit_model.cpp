#include <doctest.h>

#include <cmath>
#include <vector>

#include "sibp/probit_model.hpp"
#include "test_util.hpp"

using namespace sibp;

TEST_CASE("activation with zero regression is the stick") {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(3, -2.0, 5.0);
  const Eigen::VectorXd g = Eigen::VectorXd::Zero(3);
  for (double b = 1e-10; b < 1.0; b *= 3.7) {
    CHECK(std::abs(feature_activation_prob(x, g, b) - b) < 1e-12);
    CHECK(std::abs(feature_activation_prob(x, g, 1.0 - b) - (1.0 - b)) < 1e-12);
  }
  Eigen::VectorXd g1(3);
  g1 << 0.0, 0.0, 1.0;
  CHECK(feature_activation_prob(x, g1, 0.5) == doctest::Approx(testing::normal_cdf(5.0)));
}

TEST_CASE("probit code prediction") {
  const std::vector<double> sticks{0.9, 0.4, 0.05};
  const auto code = predict_code(Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Zero(2, 3), sticks);
  for (int k = 0; k < 3; ++k) CHECK(code.probs(k) == sticks[static_cast<std::size_t>(k)]);
  CHECK(code.binary == std::vector<std::uint8_t>{1, 0, 0});
  Eigen::MatrixXd G(2, 3);
  G << 10, 0, 0, 0, 0, -10;
  const auto strong = predict_code(Eigen::VectorXd::Ones(2), G, sticks);
  CHECK(strong.binary == std::vector<std::uint8_t>{1, 0, 0});
  CHECK(strong.probs(0) > 0.999);
}

TEST_CASE("regression posterior matches quadrature") {
  RngStream rng(1);
  const std::size_t n = 50;
  Eigen::MatrixXd X(n, 1);
  for (std::size_t i = 0; i < n; ++i) X(static_cast<Eigen::Index>(i), 0) = rng.normal();
  X = Standardization::standardize(X).apply(X);
  BinaryMatrix Z(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    // Mostly separable, with a few flipped labels so the posterior is proper and finite.
    const bool positive = X(static_cast<Eigen::Index>(i), 0) > 0.0;
    Z.set(i, 0, i % 10 == 0 ? !positive : positive);
  }
  ProbitState init;
  init.Z = Z;
  init.weights.w = {1.0};
  init.sticks = {0.5};
  init.G = Eigen::MatrixXd::Zero(1, 1);
  init.sigma_g = 2.0;
  ChainConfig cfg;
  cfg.fixed_truncation = true;
  ProbitSampler sampler(X, TripletSet(n, {}), std::nullopt, init, cfg, RngStream(2));
  std::vector<double> gs;
  for (int s = 0; s < 20000; ++s) {
    sampler.resample_regression();
    gs.push_back(sampler.state().G(0, 0));
  }
  auto log_post = [&](double g) {
    double v = -0.5 * g * g / 4.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double eta = X(static_cast<Eigen::Index>(i), 0) * g;
      v += Z(i, 0) ? log_std_normal_cdf(eta) : log_std_normal_cdf(-eta);
    }
    return v;
  };
  double num = 0.0, den = 0.0;
  for (double g = -5.0; g <= 20.0; g += 1e-3) {
    const double p = std::exp(log_post(g));
    num += g * p;
    den += p;
  }
  const double expect = num / den;
  CHECK(expect > 0.0);
  CHECK(std::abs(testing::mean(gs) - expect) < 3.0 * testing::batch_means_error(gs));
}

TEST_CASE("regression prior recovery without objects") {
  ProbitState init;
  init.Z = BinaryMatrix(0, 1);
  init.weights.w = {1.0};
  init.sticks = {0.5};
  init.G = Eigen::MatrixXd::Zero(2, 1);
  init.sigma_g = 1.5;
  ChainConfig cfg;
  cfg.fixed_truncation = true;
  ProbitSampler sampler(Eigen::MatrixXd(0, 2), TripletSet(0, {}), std::nullopt, init, cfg,
                        RngStream(3));
  std::vector<double> g0;
  for (int s = 0; s < 5000; ++s) {
    sampler.resample_regression();
    g0.push_back(sampler.state().G(0, 0));
  }
  CHECK(testing::ks_pvalue(g0, [](double x) { return testing::normal_cdf(x / 1.5); }) > 0.01);
}

TEST_CASE("probit chains") {
  RngStream rng(4);
  Eigen::MatrixXd X(12, 2);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  const TripletSet T(12, {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}});
  ChainConfig cfg;
  cfg.sweeps = 0;
  cfg.burn_in = 0;
  CHECK(run_probit_chain(X, T, nullptr, cfg).samples.size() == 1);
  cfg.sweeps = 30;
  cfg.burn_in = 10;
  cfg.thin = 5;
  cfg.seed = 99;
  const auto a = run_probit_chain(X, T, nullptr, cfg);
  const auto b = run_probit_chain(X, T, nullptr, cfg);
  CHECK(a.model == ModelKind::probit);
  CHECK(a.samples.size() == 7);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t s = 0; s < a.samples.size(); ++s) {
    const auto& sa = a.samples[s];
    CHECK(sa.Z == b.samples[s].Z);
    CHECK(sa.sticks == b.samples[s].sticks);
    CHECK(sa.log_posterior == b.samples[s].log_posterior);
    CHECK(sa.sticks.size() == sa.Z.cols());
    CHECK(static_cast<std::size_t>(sa.G.cols()) == sa.Z.cols());
    for (double st : sa.sticks) {
      CHECK(st > 0.0);
      CHECK(st < 1.0);
    }
    if (s > 0) {
      for (std::size_t k = 0; k < sa.Z.cols(); ++k) CHECK(sa.Z.column_count(k) > 0);
    }
  }
}

TEST_CASE("activity rate") {
  RngStream rng(11);
  Eigen::MatrixXd noise(1, 20000);
  for (Eigen::Index s = 0; s < noise.cols(); ++s) noise(0, s) = rng.normal();

  double harmonic = 0.0;
  for (int i = 1; i <= 6; ++i) harmonic += 1.0 / i;
  CHECK(activity_rate(Eigen::MatrixXd::Zero(6, 1), 1.0, noise) == doctest::Approx(harmonic).epsilon(1e-12));

  // One object at x = 1: Pr(z = 0 | b) = Phi(-Phi^{-1}(b) / sqrt(1 + sigma^2)).
  const double sigma = 1.5;
  const double scale = std::sqrt(1.0 + sigma * sigma);
  const int steps = 20000;
  const double top = -std::log(1e-12);
  double oracle = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double b = std::exp(-top * (i + 0.5) / steps);
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (testing::normal_cdf(mid) < b ? lo : hi) = mid;
    }
    const double t = 0.5 * (lo + hi);
    oracle += (1.0 - testing::normal_cdf(-t / scale)) * top / steps;
  }
  CHECK(activity_rate(Eigen::MatrixXd::Ones(1, 1), sigma, noise) == doctest::Approx(oracle).epsilon(0.02));
  CHECK(oracle > 1.5);
}
