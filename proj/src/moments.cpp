#include "revphase/moments.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "revphase/errors.hpp"
#include "revphase/quadrature.hpp"

namespace revphase {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Complex Gauss–Legendre over [0, h].
template <class F>
cplx gauss8(F&& f, double h) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const double re = Rule::integrate([&](double s) { return f(s).real(); }, 0.0, h);
  const double im = Rule::integrate([&](double s) { return f(s).imag(); }, 0.0, h);
  return {re, im};
}

// int_0^T env(u) e^{-w u} du, Re w > 0.
cplx exp_integral(const TestFunction& phi, cplx w, std::size_t panels) {
  const double T = phi.support;
  if (!phi.envelope) {
    if (std::abs(w) * T < 1.0) return gauss8([&](double s) { return std::exp(-w * s); }, T);
    return (1.0 - std::exp(-w * T)) / w;
  }
  // Filon: quadratic interpolant of the envelope on each panel, the
  // exponential integrated exactly by parts.
  const double h = T / static_cast<double>(panels);
  const bool small = std::abs(w) * h < 1.0;
  const cplx E = std::exp(-w * h);
  const cplx step = std::exp(-w * h);
  cplx shift = 1.0;
  cplx sum = 0.0;
  for (std::size_t m = 0; m < panels; ++m) {
    const double u0 = h * static_cast<double>(m);
    if (m % 64 == 0) shift = std::exp(-w * u0);
    const double e0 = phi.envelope(u0), e1 = phi.envelope(u0 + 0.5 * h), e2 = phi.envelope(u0 + h);
    const double c2 = 2.0 * (e0 - 2.0 * e1 + e2) / (h * h);
    const double c1 = (e2 - e0) / h - c2 * h;
    cplx J;
    if (small) {
      J = gauss8([&](double s) { return (e0 + s * (c1 + s * c2)) * std::exp(-w * s); }, h);
    } else {
      const cplx w2 = w * w;
      J = (e0 - e2 * E) / w + (c1 - (c1 + 2.0 * c2 * h) * E) / w2 + (2.0 * c2 * (1.0 - E)) / (w2 * w);
    }
    sum += shift * J;
    shift *= step;
  }
  return sum;
}

cplx damped(const TestFunction& phi, double a, double nu, std::size_t panels) {
  if (phi.amplitude == 0.0) return 0.0;
  if (phi.carrier == Carrier::Sine && phi.f == 0.0) return 0.0;
  const cplx wm(0.5 * a, kTwoPi * (nu - phi.f));
  const cplx wp(0.5 * a, kTwoPi * (nu + phi.f));
  const cplx im = exp_integral(phi, wm, panels);
  const cplx ip = phi.f == 0.0 ? im : exp_integral(phi, wp, panels);
  cplx r;
  if (phi.carrier == Carrier::Cosine) {
    r = 0.5 * (im + ip);
  } else {
    // sin = (e^{i theta} - e^{-i theta}) / 2i
    r = 0.5 * cplx(0.0, -1.0) * (im - ip);
  }
  return phi.amplitude * r;
}

std::vector<double> breakpoints(double nyq, double scale, std::initializer_list<double> centers) {
  std::vector<double> b{0.0, nyq};
  for (double c : centers) {
    if (c > 0.0 && c < nyq) b.push_back(c);
    for (double d = scale / 64.0; d < 2.0 * nyq; d *= 2.0) {
      if (c - d > 0.0 && c - d < nyq) b.push_back(c - d);
      if (c + d > 0.0 && c + d < nyq) b.push_back(c + d);
    }
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace

bool SpectralMoment::cauchy_schwarz_ok(double slack) const noexcept {
  if (sigma_plus_sq < 0.0 || sigma_minus_sq < 0.0) return false;
  return std::abs(cross_cov) <= std::sqrt(sigma_plus_sq * sigma_minus_sq) * (1.0 + slack) + 1e-300;
}

double TestFunction::operator()(double u) const {
  if (u < 0.0 || u > support) return 0.0;
  const double env = envelope ? envelope(u) : 1.0;
  const double c = carrier == Carrier::Cosine ? std::cos(kTwoPi * f * u) : std::sin(kTwoPi * f * u);
  return amplitude * env * c;
}

double default_support(const FrequencyProfile& p) { return 16.0 * std::numbers::ln10 / p.alpha_min(); }

TestFunction cos_test(double f, double support) { return {Carrier::Cosine, f, support, 1.0, {}}; }
TestFunction sin_test(double f, double support) { return {Carrier::Sine, f, support, 1.0, {}}; }

cplx damped_transform(const TestFunction& phi, double a, double nu) {
  if (!(a > 0.0)) throw_domain("damping must be > 0");
  if (!(phi.support > 0.0)) throw_domain("test function support must be > 0");
  return damped(phi, a, nu, 4096);
}

double autocovariance(const FrequencyProfile& p, double t, double tau) {
  if (t < 0.0) return 0.0;
  const double nyq = p.nyquist();
  auto g = [&](double f) {
    const auto [alpha, b] = p.eval(f);
    return b * std::exp(-alpha * t) * std::cos(kTwoPi * f * tau);
  };
  std::size_t panels = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(2.0 * nyq * std::abs(tau))));
  double prev = 2.0 * quad::gauss_panels(g, 0.0, nyq, panels);
  for (int it = 0; it < 12; ++it) {
    panels *= 2;
    const double cur = 2.0 * quad::gauss_panels(g, 0.0, nyq, panels);
    if (std::abs(cur - prev) <= 1e-12 * std::abs(cur) + 1e-300) return cur;
    prev = cur;
  }
  return prev;
}

double scalar_product_covariance(const FrequencyProfile& p, const TestFunction& phi, const TestFunction& psi) {
  if (!(phi.support > 0.0 && psi.support > 0.0)) throw_domain("test function support must be > 0");
  const double nyq = p.nyquist();
  const double fphi = std::min(std::abs(phi.f), nyq), fpsi = std::min(std::abs(psi.f), nyq);
  const double a_ref = std::min({p.alpha(0.0), p.alpha(fphi), p.alpha(fpsi)});
  const auto breaks = breakpoints(nyq, a_ref / (4.0 * kPi), {0.0, fphi, fpsi});
  const bool same = &phi == &psi;

  std::size_t split = 1, panels = 256;
  auto integral = [&]() {
    auto g = [&](double nu) {
      const auto [alpha, b] = p.eval(nu);
      if (b == 0.0) return 0.0;
      const cplx A = damped(phi, alpha, nu, panels);
      const cplx B = same ? A : damped(psi, alpha, nu, panels);
      return b * (A.real() * B.real() + A.imag() * B.imag());
    };
    return 2.0 * quad::gauss_breakpoints(g, breaks, split);
  };
  double prev = integral();
  for (int it = 0; it < 6; ++it) {
    split *= 2;
    if (phi.envelope || psi.envelope) panels *= 2;
    const double cur = integral();
    if (std::abs(cur - prev) <= 1e-9 * std::abs(cur) + 1e-300) return cur;
    prev = cur;
  }
  return prev;
}

double scalar_product_variance(const FrequencyProfile& p, const TestFunction& phi) {
  return scalar_product_covariance(p, phi, phi);
}

SpectralMoment quadrature_moment(const FrequencyProfile& p, double f) {
  const double T = default_support(p);
  const auto c = cos_test(f, T);
  const auto s = sin_test(f, T);
  return {f, scalar_product_variance(p, c), scalar_product_variance(p, s), scalar_product_covariance(p, c, s)};
}

SpectralMoment closed_form_sigma(const FrequencyProfile& p, double f) {
  const auto [a0, b0] = p.eval(0.0);
  const auto [af, bf] = p.eval(f);
  if (!(a0 > 0.0)) throw_domain("alpha(0) must be > 0");
  const double x = 4.0 * kPi * f / a0;
  const double d = 1.0 + x * x;
  const double lead = bf / (2.0 * af);
  const double corr = b0 / (2.0 * a0 * d);
  return {f, lead + corr, lead - corr, kTwoPi * f * b0 / (a0 * a0 * d)};
}

double asymptotic_variance(const FrequencyProfile& p, double f) {
  const auto [a, b] = p.eval(f);
  if (!(a > 0.0)) throw_domain("alpha must be > 0");
  return b / a;
}

cplx fourier_autocorrelation(const FrequencyProfile& p, double f, double xi) {
  const auto [a, b] = p.eval(f);
  if (!(a > 0.0)) throw_domain("alpha must be > 0");
  const double x = kTwoPi * xi / a;
  return (b / a) * cplx(1.0, -x) / (1.0 + x * x);
}

double band_limit_bound(const FrequencyProfile& p, double f) {
  const double nyq = p.nyquist();
  const double af = std::abs(f);
  if (!(af < nyq)) return std::numeric_limits<double>::infinity();
  double bmax = p.b(0.0);
  for (int i = 1; i <= 256; ++i) bmax = std::max(bmax, p.b(nyq * i / 256.0));
  return bmax / (2.0 * kPi * kPi * (nyq - af));
}

SpectralMoment discrete_polack_moment(double b, double alpha, double sample_rate, double f, std::size_t length) {
  const double dt = 1.0 / sample_rate;
  const double q = std::exp(-alpha * dt);
  const double L = static_cast<double>(length);
  // sum_{n<L} q^n and sum_{n<L} q^n e^{2 i w n}, w = 2 pi f dt
  const double s0 = -std::expm1(L * std::log(q)) / -std::expm1(std::log(q));
  const cplx z = q * std::polar(1.0, 2.0 * kTwoPi * f * dt);
  const cplx s2 = (1.0 - std::pow(z, L)) / (1.0 - z);
  const double k = 0.5 * dt * dt * b;
  // Re H = dt sum x cos, Im H = -dt sum x sin, so <h,s> = -Im H.
  return {f, k * (s0 + s2.real()), k * (s0 - s2.real()), k * s2.imag()};
}

cplx discrete_polack_autocorrelation(double b, double alpha, double sample_rate, double xi, std::size_t length) {
  const double dt = 1.0 / sample_rate;
  const cplx z = std::exp(cplx(-alpha * dt, -kTwoPi * xi * dt));
  const double L = static_cast<double>(length);
  return dt * dt * b * (1.0 - std::pow(z, L)) / (1.0 - z);
}

}  // namespace revphase
