#include "revphase/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "revphase/errors.hpp"
#include "revphase/seeding.hpp"

namespace revphase {

namespace {

constexpr std::size_t kMinSamples = 30;

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double normal_two_sided(double z) {
  static const boost::math::normal_distribution<double> N01;
  return clamp01(2.0 * boost::math::cdf(boost::math::complement(N01, std::abs(z))));
}

}  // namespace

nlohmann::json TestReport::to_json() const {
  nlohmann::json j;
  j["test"] = test;
  j["statistic"] = statistic;
  j["p_value"] = p_value;
  j["significance"] = significance;
  j["decision"] = reject ? "reject" : "accept";
  j["n"] = n;
  j["details"] = details;
  return j;
}

TestReport circularity_test(std::span<const std::complex<double>> z, double significance) {
  if (z.size() < kMinSamples) throw_domain("circularity test needs at least 30 samples");
  const double n = static_cast<double>(z.size());
  double mr = 0.0, mi = 0.0;
  for (const auto& v : z) {
    mr += v.real();
    mi += v.imag();
  }
  mr /= n;
  mi /= n;
  double srr = 0.0, sii = 0.0, sri = 0.0;
  for (const auto& v : z) {
    const double a = v.real() - mr, b = v.imag() - mi;
    srr += a * a;
    sii += b * b;
    sri += a * b;
  }
  const double var_re = srr / (n - 1.0), var_im = sii / (n - 1.0);

  TestReport r;
  r.test = "circularity";
  r.n = z.size();
  r.significance = significance;
  r.details["var_re"] = var_re;
  r.details["var_im"] = var_im;
  if (!(var_re > 0.0) || !(var_im > 0.0)) {
    // Degenerate: a zero-variance part is as far from isotropic as it gets.
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    r.reject = true;
    r.details["degenerate"] = true;
    return r;
  }
  const double F = var_re / var_im;
  const boost::math::fisher_f_distribution<double> fdist(n - 1.0, n - 1.0);
  const double cdf = boost::math::cdf(fdist, F);
  const double p_f = clamp01(2.0 * std::min(cdf, 1.0 - cdf));

  const double corr = std::clamp(sri / std::sqrt(srr * sii), -1.0, 1.0);
  const double zstat = std::atanh(std::clamp(corr, -1.0 + 1e-15, 1.0 - 1e-15)) * std::sqrt(n - 3.0);
  const double p_z = normal_two_sided(zstat);

  r.statistic = F;
  r.p_value = std::min(1.0, 2.0 * std::min(p_f, p_z));
  r.reject = r.p_value < significance;
  r.details["variance_ratio"] = F;
  r.details["p_variance_ratio"] = p_f;
  r.details["corr"] = corr;
  r.details["fisher_z"] = zstat;
  r.details["p_corr"] = p_z;
  return r;
}

double wrap_phase(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

std::vector<double> phases_of(std::span<const std::complex<double>> z) {
  std::vector<double> out(z.size());
  std::transform(z.begin(), z.end(), out.begin(), [](const auto& v) { return wrap_phase(std::arg(v)); });
  return out;
}

double ks_uniform_statistic(std::span<const double> u) {
  std::vector<double> s(u.begin(), u.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = std::clamp(s[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

double kolmogorov_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return clamp01(sum);
}

double rayleigh_pvalue(double rbar, std::size_t n) {
  const double nn = static_cast<double>(n);
  const double rn = nn * rbar;
  const double p = std::exp(std::sqrt(1.0 + 4.0 * nn + 4.0 * (nn * nn - rn * rn)) - (1.0 + 2.0 * nn));
  return clamp01(p);
}

TestReport phase_uniformity_test(const PhaseSample& sample, double significance) {
  const auto& ph = sample.phases;
  if (ph.size() < kMinSamples) throw_domain("uniformity test needs at least 30 samples");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> u(ph.size());
  double c = 0.0, s = 0.0;
  for (std::size_t i = 0; i < ph.size(); ++i) {
    u[i] = ph[i] / two_pi;
    c += std::cos(ph[i]);
    s += std::sin(ph[i]);
  }
  const double n = static_cast<double>(ph.size());
  const double rbar = std::hypot(c, s) / n;

  TestReport r;
  r.test = "phase_uniformity";
  r.n = ph.size();
  r.significance = significance;
  r.statistic = ks_uniform_statistic(u);
  r.p_value = kolmogorov_pvalue(r.statistic, ph.size());
  r.reject = r.p_value < significance;
  r.details["ks_d"] = r.statistic;
  r.details["ks_p"] = r.p_value;
  r.details["rayleigh_rbar"] = rbar;
  r.details["rayleigh_z"] = n * rbar * rbar;
  r.details["rayleigh_p"] = rayleigh_pvalue(rbar, ph.size());
  r.details["f_hz"] = sample.f;
  return r;
}

SlopeFit convergence_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw_domain("slope fit: xs and ys differ in length");
  if (xs.size() < 3) throw_domain("slope fit needs at least 3 points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw_domain("slope fit needs positive data");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw_domain("slope fit needs distinct x values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

double bootstrap_se(std::size_t n, const std::function<double(std::span<const std::size_t>)>& stat,
                    std::size_t resamples, std::uint64_t seed) {
  if (n < 2 || resamples < 2) return 0.0;
  std::vector<double> vals(resamples);
  std::vector<std::size_t> idx(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    auto rng = make_rng(seed, b);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& i : idx) i = pick(rng);
    vals[b] = stat(idx);
  }
  const double m = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(resamples);
  double ss = 0.0;
  for (double v : vals) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(resamples - 1));
}

}  // namespace revphase
