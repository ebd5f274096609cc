#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "revphase/moments.hpp"

using namespace revphase;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {

// Independent closed forms, written from the model rather than the library.
struct Ref {
  double sp, sm, c;
};
Ref closed(double B, double a, double f) {
  const double x = 4.0 * pi * f / a;
  const double aniso = B / (2.0 * a * (1.0 + x * x));
  return {B / (2.0 * a) + aniso, B / (2.0 * a) - aniso, 2.0 * pi * f * B / (a * a * (1.0 + x * x))};
}

}  // namespace

TEST_CASE("closed forms") {
  const auto p = FrequencyProfile::constant(20.0, 0.7, 8000.0);
  for (double f : {0.0, 1.0, 10.0, 500.0}) {
    const auto m = closed_form_sigma(p, f);
    const auto r = closed(0.7, 20.0, f);
    CHECK(m.sigma_plus_sq == doctest::Approx(r.sp).epsilon(1e-14));
    CHECK(m.sigma_minus_sq == doctest::Approx(r.sm).epsilon(1e-14).scale(1e-300));
    CHECK(m.cross_cov == doctest::Approx(r.c).epsilon(1e-14).scale(1e-300));
    CHECK(m.cauchy_schwarz_ok());
  }
  CHECK(asymptotic_variance(p, 100.0) == doctest::Approx(0.7 / 20.0));
  // Fourier autocorrelation at one bandwidth: (B/a)(1 - i)/2.
  const cd r = fourier_autocorrelation(p, 1000.0, 20.0 / (2.0 * pi));
  CHECK(std::abs(r - cd(1.0, -1.0) * 0.5 * (0.7 / 20.0)) < 1e-15);
}

TEST_CASE("damped transform against the two-exponential closed form") {
  const double a = 30.0, T = 2.0, f = 40.0;
  auto g = [&](double mu) {
    const cd s(a / 2.0, 2.0 * pi * mu);
    return (1.0 - std::exp(-s * T)) / s;
  };
  for (double nu : {0.0, 39.0, 40.0, 123.0, -40.0}) {
    const cd ref_c = 0.5 * (g(nu - f) + g(nu + f));
    const cd ref_s = cd(0, 0.5) * (g(nu + f) - g(nu - f));
    auto c = cos_test(f, T);
    auto s = sin_test(f, T);
    CHECK(std::abs(damped_transform(c, a, nu) - ref_c) < 1e-12 * std::abs(ref_c) + 1e-15);
    CHECK(std::abs(damped_transform(s, a, nu) - ref_s) < 1e-12 * std::abs(ref_s) + 1e-15);
    // The Filon path (explicit envelope) agrees with the closed form.
    c.envelope = [](double) { return 1.0; };
    CHECK(std::abs(damped_transform(c, a, nu) - ref_c) < 1e-8 * std::abs(ref_c) + 1e-12);
  }
}

TEST_CASE("autocovariance of a constant profile is a damped sinc") {
  const double B = 1.3, a = 12.0, nyq = 500.0;
  const auto p = FrequencyProfile::constant(a, B, nyq);
  CHECK(autocovariance(p, 0.1, 0.0) == doctest::Approx(2.0 * nyq * B * std::exp(-a * 0.1)).epsilon(1e-10));
  const double peak = 2.0 * nyq * B * std::exp(-a * 0.2);
  for (double tau : {1e-4, 3.7e-3, 0.05, 0.0511}) {
    const double ref = B * std::exp(-a * 0.2) * std::sin(2.0 * pi * nyq * tau) / (pi * tau);
    CHECK(std::abs(autocovariance(p, 0.2, tau) - ref) < 1e-10 * peak);
  }
  CHECK(autocovariance(p, -0.1, 0.0) == 0.0);
}

TEST_CASE("quadrature equals the closed forms for a wide-band constant profile") {
  const double B = 1.0, a = 20.0;
  const auto p = FrequencyProfile::constant(a, B, 1e9);
  for (double f : {0.0, 1.0, 5.0, 100.0}) {
    const auto q = quadrature_moment(p, f);
    const auto r = closed(B, a, f);
    CHECK(q.sigma_plus_sq == doctest::Approx(r.sp).epsilon(1e-6));
    if (r.sm > 0.0) CHECK(q.sigma_minus_sq == doctest::Approx(r.sm).epsilon(1e-6));
    else CHECK(std::abs(q.sigma_minus_sq) < 1e-12);
    if (r.c > 0.0) CHECK(q.cross_cov == doctest::Approx(r.c).epsilon(1e-6));
    CHECK(q.cauchy_schwarz_ok());
  }
}

TEST_CASE("band-limited quadrature stays within the band-limit bound") {
  const double B = 1.0, a = 20.0;
  const auto p = FrequencyProfile::constant(a, B, 4000.0);
  for (double f : {0.0, 200.0, 1000.0, 3000.0}) {
    const auto q = quadrature_moment(p, f);
    const auto r = closed(B, a, f);
    const double bound = band_limit_bound(p, f);
    CHECK(bound == doctest::Approx(B / (2.0 * pi * pi * (4000.0 - f))));
    CHECK(std::abs(q.sigma_plus_sq - r.sp) <= bound + 1e-6 * r.sp);
    CHECK(std::abs(q.sigma_minus_sq - r.sm) <= bound + 1e-6 * r.sp);
    CHECK(std::abs(q.cross_cov - r.c) <= bound + 1e-6 * r.sp);
  }
}

TEST_CASE("variance via an enveloped test function equals the plain one") {
  const auto p = FrequencyProfile::constant(25.0, 1.0, 2000.0);
  const double T = default_support(p);
  auto c = cos_test(300.0, T);
  const double v0 = scalar_product_variance(p, c);
  c.envelope = [](double) { return 1.0; };
  CHECK(scalar_product_variance(p, c) == doctest::Approx(v0).epsilon(1e-7));
  // Bilinearity: Var(2 phi) = 4 Var(phi).
  auto c2 = cos_test(300.0, T);
  c2.amplitude = 2.0;
  CHECK(scalar_product_variance(p, c2) == doctest::Approx(4.0 * v0).epsilon(1e-10));
}

TEST_CASE("discrete moment oracle against brute-force sums") {
  const double B = 1.7, a = 40.0, fs = 8000.0, dt = 1.0 / fs;
  const std::size_t L = 3000;
  for (double f : {0.0, 3.0, 250.0, 3999.0}) {
    long double sp = 0, sm = 0, c = 0;
    for (std::size_t n = 0; n < L; ++n) {
      const long double v = B * std::exp(-a * static_cast<long double>(n) * dt);
      const long double w = 2.0L * std::numbers::pi_v<long double> * f * static_cast<long double>(n) * dt;
      sp += v * std::cos(w) * std::cos(w);
      sm += v * std::sin(w) * std::sin(w);
      c += v * std::cos(w) * std::sin(w);
    }
    const auto m = discrete_polack_moment(B, a, fs, f, L);
    const double s = dt * dt;
    CHECK(m.sigma_plus_sq == doctest::Approx(static_cast<double>(sp) * s).epsilon(1e-10));
    CHECK(m.sigma_minus_sq == doctest::Approx(static_cast<double>(sm) * s).epsilon(1e-9).scale(1e-18));
    CHECK(m.cross_cov == doctest::Approx(static_cast<double>(c) * s).epsilon(1e-9).scale(1e-18));
  }
  for (double xi : {0.0, 2.0, 60.0}) {
    cd acc = 0.0;
    for (std::size_t n = 0; n < L; ++n)
      acc += B * std::exp(-a * n * dt) * std::polar(1.0, -2.0 * pi * xi * n * dt);
    CHECK(std::abs(discrete_polack_autocorrelation(B, a, fs, xi, L) - acc * dt * dt) < 1e-10 * std::abs(acc) * dt * dt);
  }
}

TEST_CASE("discrete model converges to the continuous closed forms (B_cont = B dt)") {
  const double B = 1.0, a = 20.0, fs = 8000.0, dt = 1.0 / fs;
  for (double f : {0.0, 100.0, 1000.0}) {
    const auto m = discrete_polack_moment(B, a, fs, f, 200000);
    const auto r = closed(B * dt, a, f);
    CHECK(m.sigma_plus_sq == doctest::Approx(r.sp).epsilon(2e-3));
  }
}
