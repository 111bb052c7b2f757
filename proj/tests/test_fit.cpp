#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qcs/fit.hpp"

using namespace qcs;

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

}  // namespace

TEST_CASE("decaying cosine recovers the generating parameters") {
  // Ramsey-like fringe: 2.1 MHz, t2 3.5 us, small offset.
  const std::vector<double> truth{0.42, 2.1e6, 0.6, 3.5e-6, 0.5};
  const auto x = linspace(0.0, 8e-6, 160);
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    y[k] = eval_decaying_cosine(x[k], truth);

  const FitResult r = fit_decaying_cosine(x, y);
  REQUIRE(r.converged);
  REQUIRE(r.params.size() == 5);
  CHECK(std::abs(r.params[0]) == doctest::Approx(truth[0]).epsilon(1e-4));
  CHECK(r.params[1] == doctest::Approx(truth[1]).epsilon(1e-4));
  CHECK(r.params[3] == doctest::Approx(truth[3]).epsilon(1e-3));
  CHECK(r.params[4] == doctest::Approx(truth[4]).epsilon(1e-4));
  CHECK(r.rss < 1e-12);
}

TEST_CASE("decaying cosine tolerates shot noise") {
  const std::vector<double> truth{0.35, 1.3e6, -0.4, 5.0e-6, 0.48};
  const auto x = linspace(0.0, 1.2e-5, 240);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    y[k] = eval_decaying_cosine(x[k], truth) + noise(rng);

  const FitResult r = fit_decaying_cosine(x, y);
  REQUIRE(r.converged);
  CHECK(r.params[1] == doctest::Approx(truth[1]).epsilon(0.01));
  CHECK(r.params[3] == doctest::Approx(truth[3]).epsilon(0.10));
}

TEST_CASE("exponential decay recovers the generating parameters") {
  const std::vector<double> truth{0.5, 115e-6, 0.45};
  const auto x = linspace(0.0, 4e-4, 60);
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    y[k] = eval_exponential_decay(x[k], truth);

  const FitResult r = fit_exponential_decay(x, y);
  REQUIRE(r.converged);
  REQUIRE(r.params.size() == 3);
  CHECK(r.params[0] == doctest::Approx(truth[0]).epsilon(1e-5));
  CHECK(r.params[1] == doctest::Approx(truth[1]).epsilon(1e-5));
  CHECK(r.params[2] == doctest::Approx(truth[2]).epsilon(1e-5));
}

TEST_CASE("rabi oscillation frequency from a sin^2 line") {
  const std::vector<double> truth{0.9, 4.0e6, 0.05};
  const auto x = linspace(0.0, 1e-6, 101);
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    y[k] = eval_rabi_sin2(x[k], truth);

  const FitResult r = fit_rabi_sin2(x, y);
  REQUIRE(r.converged);
  CHECK(std::abs(r.params[0]) == doctest::Approx(truth[0]).epsilon(1e-4));
  CHECK(r.params[1] == doctest::Approx(truth[1]).epsilon(1e-4));
  CHECK(r.params[2] == doctest::Approx(truth[2]).epsilon(1e-3));
}

TEST_CASE("generic least squares on a custom model") {
  // y = p0 * x + p1 has an exact linear solution the iteration must find.
  const auto x = linspace(-1.0, 1.0, 21);
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) y[k] = 3.25 * x[k] - 0.75;

  const FitModel line = [](double xv, const std::vector<double>& p) {
    return p[0] * xv + p[1];
  };
  const FitResult r = fit_least_squares(x, y, line, {0.0, 0.0});
  REQUIRE(r.converged);
  CHECK(r.params[0] == doctest::Approx(3.25).epsilon(1e-9));
  CHECK(r.params[1] == doctest::Approx(-0.75).epsilon(1e-9));
  CHECK(r.iterations > 0);
}

TEST_CASE("a stalled fit reports failure instead of throwing") {
  // A flat model cannot explain a slope; the fit settles on the mean and
  // still counts as converged. A NaN-producing model must not.
  const auto x = linspace(0.0, 1.0, 8);
  std::vector<double> y{0, 1, 2, 3, 4, 5, 6, 7};
  const FitModel bad = [](double, const std::vector<double>&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  const FitResult r = fit_least_squares(x, y, bad, {1.0});
  CHECK_FALSE(r.converged);
}
