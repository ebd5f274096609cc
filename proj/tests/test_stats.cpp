#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "revphase/errors.hpp"
#include "revphase/stats.hpp"

using namespace revphase;
using cd = std::complex<double>;

namespace {

std::vector<cd> gaussian(std::size_t n, std::uint64_t seed, double sx, double sy, double rho) {
  std::mt19937_64 r(seed);
  std::normal_distribution<double> d;
  std::vector<cd> z(n);
  for (auto& v : z) {
    const double a = d(r), b = d(r);
    v = {sx * a, sy * (rho * a + std::sqrt(1.0 - rho * rho) * b)};
  }
  return z;
}

}  // namespace

TEST_CASE("wrap_phase") {
  CHECK(wrap_phase(-0.5) == doctest::Approx(2.0 * std::numbers::pi - 0.5));
  CHECK(wrap_phase(7.0) == doctest::Approx(7.0 - 2.0 * std::numbers::pi));
  CHECK(wrap_phase(0.0) == 0.0);
  for (double t : {-100.0, -1e-17, 6.283185307179586, 1e6}) {
    const double w = wrap_phase(t);
    CHECK(w >= 0.0);
    CHECK(w < 2.0 * std::numbers::pi);
  }
}

TEST_CASE("KS statistic and Kolmogorov tail") {
  // sorted {0.1, 0.2, 0.9}: D+ = 2/3 - 0.2 dominates D- = 0.9 - 2/3
  std::vector<double> u{0.9, 0.1, 0.2};
  CHECK(ks_uniform_statistic(u) == doctest::Approx(2.0 / 3.0 - 0.2));
  // Asymptotic Kolmogorov distribution: P(K > 1.36) = 0.0494, P(K > 1.63) = 0.0098.
  CHECK(kolmogorov_pvalue(1.36 / std::sqrt(1e6), 1000000) == doctest::Approx(0.0494).epsilon(0.01));
  CHECK(kolmogorov_pvalue(1.63 / std::sqrt(1e6), 1000000) == doctest::Approx(0.00977).epsilon(0.02));
  CHECK(kolmogorov_pvalue(0.0, 100) == doctest::Approx(1.0));
  CHECK(kolmogorov_pvalue(1.0, 100) < 1e-30);
}

TEST_CASE("Rayleigh p-value") {
  CHECK(rayleigh_pvalue(0.0, 100) == doctest::Approx(1.0));
  // Large n: p ~ exp(-n rbar^2).
  CHECK(rayleigh_pvalue(0.05, 10000) == doctest::Approx(std::exp(-25.0)).epsilon(0.05));
}

TEST_CASE("circularity test: accepts circular, rejects anisotropic and correlated") {
  const auto ok = circularity_test(gaussian(5000, 1, 1.0, 1.0, 0.0));
  CHECK_FALSE(ok.reject);
  CHECK(circularity_test(gaussian(5000, 2, 1.0, 1.2, 0.0)).reject);
  CHECK(circularity_test(gaussian(5000, 3, 1.0, 1.0, 0.15)).reject);
  auto deg = gaussian(100, 4, 1.0, 0.0, 0.0);
  const auto r = circularity_test(deg);
  CHECK(r.reject);
  CHECK(r.p_value == 0.0);
  CHECK_THROWS_AS(circularity_test(gaussian(29, 5, 1.0, 1.0, 0.0)), DomainError);
  const auto j = ok.to_json();
  CHECK(j["decision"] == "accept");
  CHECK(j["test"] == "circularity");
}

TEST_CASE("phase uniformity") {
  const auto z = gaussian(4000, 6, 1.0, 1.0, 0.0);
  CHECK_FALSE(phase_uniformity_test({100.0, phases_of(z)}).reject);
  CHECK(phase_uniformity_test({100.0, phases_of(gaussian(4000, 7, 1.0, 0.3, 0.0))}).reject);
  // A von Mises-like shift is caught too.
  std::vector<double> ph;
  std::mt19937_64 r(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) ph.push_back(wrap_phase(2.0 * std::numbers::pi * std::pow(u(r), 1.3)));
  CHECK(phase_uniformity_test({1.0, ph}).reject);
}

TEST_CASE("convergence slope") {
  std::vector<double> x, y;
  for (double v = 1.0; v <= 1000.0; v *= 1.7) {
    x.push_back(v);
    y.push_back(3.0 * std::pow(v, -2.0));
  }
  const auto fit = convergence_slope(x, y);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-10));
  y[1] = -1.0;
  CHECK_THROWS_AS(convergence_slope(x, y), DomainError);
  CHECK_THROWS_AS(convergence_slope(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}), DomainError);
}

TEST_CASE("bootstrap SE of a mean matches s / sqrt(n)") {
  std::mt19937_64 r(9);
  std::normal_distribution<double> d;
  std::vector<double> x(400);
  for (auto& v : x) v = d(r);
  double m = 0.0, s2 = 0.0;
  for (double v : x) m += v / 400.0;
  for (double v : x) s2 += (v - m) * (v - m) / 400.0;
  const double se = bootstrap_se(
      400,
      [&](std::span<const std::size_t> idx) {
        double a = 0.0;
        for (auto i : idx) a += x[i];
        return a / static_cast<double>(idx.size());
      },
      2000, 3);
  CHECK(se == doctest::Approx(std::sqrt(s2 / 400.0)).epsilon(0.08));
}
