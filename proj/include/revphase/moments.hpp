#pragma once

#include <complex>
#include <cstddef>
#include <functional>

#include "revphase/profiles.hpp"

namespace revphase {

/// Second moments of (<h, c_f>, <h, s_f>): sigma_plus_sq = Var <h,c_f>,
/// sigma_minus_sq = Var <h,s_f>, cross_cov = Cov(<h,c_f>, <h,s_f>).
struct SpectralMoment {
  double f = 0.0;
  double sigma_plus_sq = 0.0;
  double sigma_minus_sq = 0.0;
  double cross_cov = 0.0;

  double total() const noexcept { return sigma_plus_sq + sigma_minus_sq; }
  bool cauchy_schwarz_ok(double slack = 1e-12) const noexcept;
};

enum class Carrier { Cosine, Sine };

/// phi(u) = amplitude * envelope(u) * carrier(2 pi f u) on [0, support],
/// zero elsewhere. An empty envelope means 1. The carrier is exact: the
/// sine at f = 0 is identically zero.
struct TestFunction {
  Carrier carrier = Carrier::Cosine;
  double f = 0.0;
  double support = 1.0;
  double amplitude = 1.0;
  std::function<double(double)> envelope;

  double operator()(double u) const;
};

/// Support T with exp(-alpha_min T) = 1e-16, long enough that truncation
/// effects stay below 1e-8 of the moments.
double default_support(const FrequencyProfile& p);
TestFunction cos_test(double f, double support);
TestFunction sin_test(double f, double support);

/// int_0^T phi(u) exp(-a u / 2) exp(-2 i pi nu u) du. Closed form for an
/// empty envelope, Filon panels (quadratic envelope interpolant) otherwise.
std::complex<double> damped_transform(const TestFunction& phi, double a, double nu);

/// gamma_h(t, tau) = 1{t >= 0} int_{-nyq}^{nyq} B(f) exp(-alpha(f) t + 2 i pi f tau) df.
double autocovariance(const FrequencyProfile& p, double t, double tau);

/// Double integral of phi(t + tau/2) psi(t - tau/2) gamma_h(t, tau). The
/// change of variables u = t + tau/2, v = t - tau/2 separates it into
///   int B(nu) Re[conj(Phi(nu)) Psi(nu)] dnu,
/// Phi the alpha(nu)-damped transform of phi. Panels refined by doubling
/// until successive values agree to 1e-8 relative.
double scalar_product_covariance(const FrequencyProfile& p, const TestFunction& phi, const TestFunction& psi);
double scalar_product_variance(const FrequencyProfile& p, const TestFunction& phi);

/// Both variances and the covariance for c_f, s_f on the default support.
SpectralMoment quadrature_moment(const FrequencyProfile& p, double f);

/// sigma_pm^2 = B(f)/(2 alpha(f)) +- B(0) / (2 alpha(0) (1 + (4 pi f/alpha(0))^2)),
/// C = 2 pi f B(0) / (alpha(0)^2 (1 + (4 pi f/alpha(0))^2)).
SpectralMoment closed_form_sigma(const FrequencyProfile& p, double f);

/// B(f) / alpha(f).
double asymptotic_variance(const FrequencyProfile& p, double f);

/// E[H(f + xi/2) conj(H(f - xi/2))] = (B/alpha) (1 - i x) / (1 + x^2), x = 2 pi xi / alpha(f).
std::complex<double> fourier_autocorrelation(const FrequencyProfile& p, double f, double xi);

/// Absolute bound on the part of the closed forms carried by |nu| > nyquist
/// (which a profile band-limited to +-nyquist lacks): B / (2 pi^2 (nyq - f)).
double band_limit_bound(const FrequencyProfile& p, double f);

// ---------------------------------------------------------------------------
// Exact moments of the sampled simple model h[n] = sqrt(b) eps[n] q^{n/2},
// q = exp(-alpha dt), n < length, under H_est(f) = dt sum h[n] e^{-2 i pi f n dt}.
// cross_cov follows the SpectralMoment sign: Cov(<h,c_f>, <h,s_f>) = -Cov(Re H, Im H).

SpectralMoment discrete_polack_moment(double b, double alpha, double sample_rate, double f,
                                      std::size_t length);
std::complex<double> discrete_polack_autocorrelation(double b, double alpha, double sample_rate, double xi,
                                                     std::size_t length);

}  // namespace revphase
