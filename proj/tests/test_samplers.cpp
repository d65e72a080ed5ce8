#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "sibp/errors.hpp"
#include "sibp/samplers.hpp"
#include "test_util.hpp"

using namespace sibp;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> slice_chain(const LogDensity& target, double x0, std::size_t n,
                                std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> out;
  double x = x0;
  for (std::size_t s = 0; s < n * 10; ++s) {
    x = slice_sample_1d(target, x, kDefaultSliceWidth, kDefaultSliceSteps, rng);
    if (s % 10 == 9) out.push_back(x);
  }
  return out;
}

std::vector<double> concave_chain(const LogDensity& target, double lo, double hi, std::size_t n,
                                  std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> out;
  double x = 0.5 * (lo + hi);
  for (std::size_t s = 0; s < n * 10; ++s) {
    x = sample_log_concave(target, lo, hi, x, rng);
    if (s % 10 == 9) out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("slice sampler targets") {
  const auto normal = slice_chain([](double x) { return -0.5 * x * x; }, 0.0, 5000, 1);
  CHECK(testing::ks_pvalue(normal, testing::normal_cdf) > 0.01);
  const auto gamma = slice_chain(
      [](double x) { return x > 0.0 ? std::log(x) - x : kNegInf; }, 1.0, 5000, 2);
  CHECK(testing::ks_pvalue(gamma, [](double x) { return 1.0 - std::exp(-x) * (1.0 + x); }) > 0.01);
  RngStream rng(3);
  const double spike = slice_sample_1d(
      [](double x) { return -0.5 * (x - 2.0) * (x - 2.0) / 1e-16; }, 2.0, 1.0, 50, rng);
  CHECK(std::abs(spike - 2.0) < 1e-6);
  CHECK_THROWS_AS(slice_sample_1d([](double) { return kNegInf; }, 0.0, 1.0, 50, rng),
                  NumericalError);
}

TEST_CASE("elliptical slice sampling") {
  RngStream rng(4);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  std::vector<std::vector<double>> coords(3);
  for (int s = 0; s < 10000; ++s) {
    x = elliptical_slice_sample(x, 2.0, [](const Eigen::VectorXd&) { return 0.0; }, rng);
    for (int d = 0; d < 3; ++d) coords[d].push_back(x(d));
  }
  for (const auto& c : coords) {
    const double v = testing::variance(c);
    // Standard error of a Gaussian sample variance is sigma^2 sqrt(2 / (n - 1)).
    CHECK(std::abs(v - 4.0) < 3.0 * 4.0 * std::sqrt(2.0 / (c.size() - 1.0)));
  }

  // Prior N(0, I), likelihood N(y; x, 0.5 I): posterior N(y / 1.5, I / 3).
  const Eigen::Vector2d y(1.0, -2.0);
  auto loglik = [&](const Eigen::VectorXd& v) { return -(v - y).squaredNorm(); };
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
  std::vector<double> a, b, ab;
  for (int s = 0; s < 40000; ++s) {
    z = elliptical_slice_sample(z, 1.0, loglik, rng);
    a.push_back(z(0));
    b.push_back(z(1));
    ab.push_back(z(0) * z(1));
  }
  CHECK(std::abs(testing::mean(a) - y(0) / 1.5) < 3.0 * testing::batch_means_error(a));
  CHECK(std::abs(testing::mean(b) - y(1) / 1.5) < 3.0 * testing::batch_means_error(b));
  CHECK(std::abs(testing::variance(a) - 1.0 / 3.0) < 0.03);
  const double cov = testing::mean(ab) - testing::mean(a) * testing::mean(b);
  CHECK(std::abs(cov) < 3.0 * testing::batch_means_error(ab));

  Eigen::VectorXd cur(2);
  cur << 0.3, 0.7;
  auto only_here = [&](const Eigen::VectorXd& v) { return (v - cur).norm() == 0.0 ? 0.0 : kNegInf; };
  const auto same = elliptical_slice_sample(cur, 1.0, only_here, rng);
  CHECK((same - cur).norm() < 1e-12);
}

TEST_CASE("log-concave sampler on bounded supports") {
  const auto beta = concave_chain(
      [](double x) { return 2.0 * std::log(x) + std::log1p(-x); }, 0.0, 1.0, 5000, 5);
  CHECK(testing::ks_pvalue(beta, [](double x) { return 4 * x * x * x - 3 * x * x * x * x; }) > 0.01);
  const auto flat = concave_chain([](double) { return 0.0; }, -1.0, 3.0, 5000, 6);
  CHECK(testing::ks_pvalue(flat, [](double x) { return (x + 1.0) / 4.0; }) > 0.01);
  const auto trunc = concave_chain([](double x) { return -x; }, 0.0, 0.5, 5000, 7);
  // Mean of Exp(1) truncated to (0, c): 1 - c e^{-c} / (1 - e^{-c}).
  const double c = 0.5;
  const double expect = 1.0 - c * std::exp(-c) / (1.0 - std::exp(-c));
  CHECK(std::abs(testing::mean(trunc) - expect) < 3.0 * testing::std_error(trunc));
  for (double x : trunc) {
    CHECK(x > 0.0);
    CHECK(x < 0.5);
  }
}
