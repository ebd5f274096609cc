#include "revphase/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

#include "revphase/errors.hpp"
#include "revphase/moments.hpp"
#include "revphase/seeding.hpp"

namespace revphase {

namespace {

using cplx = std::complex<double>;
constexpr std::size_t kBootstrapBelow = 1000;
constexpr std::size_t kBootstrapResamples = 200;

bool use_simple(const SynthesisConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::Simple:
      if (cfg.profile.kind() != ProfileKind::Constant) throw_config("simple model needs a constant profile");
      return true;
    case ModelKind::Generalized: return false;
    case ModelKind::Auto: return cfg.profile.kind() == ProfileKind::Constant;
  }
  return false;
}

double simple_duration(const SynthesisConfig& cfg) {
  return cfg.options.duration > 0.0 ? cfg.options.duration : auto_duration(cfg.profile.alpha(0.0));
}

// Runs body(j) for every member, in parallel or not; the first exception
// thrown by any member is rethrown after the loop.
template <class Body>
void for_members(std::size_t n, bool parallel, Body&& body) {
  std::exception_ptr err;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    try {
      body(static_cast<std::size_t>(j));
    } catch (...) {
#pragma omp critical(revphase_member_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

CoefficientTable coefficients(const EnsembleSpec& spec, std::span<const double> freqs, bool parallel) {
  spec.validate();
  const auto& cfg = spec.synthesis;
  const std::size_t L = synthesized_length(cfg);
  std::vector<SingleFrequencyTransform> tf;
  tf.reserve(freqs.size());
  for (double f : freqs) tf.emplace_back(f, cfg.sample_rate, L);

  CoefficientTable t;
  t.frequencies.assign(freqs.begin(), freqs.end());
  t.n = spec.n_samples;
  t.data.assign(t.n * freqs.size(), cplx(0.0));
  const std::size_t K = freqs.size();
  for_members(t.n, parallel, [&](std::size_t j) {
    const auto h = synthesize(cfg, spec.member_seed(j));
    for (std::size_t k = 0; k < K; ++k) t.data[j * K + k] = tf[k](h.samples);
  });
  return t;
}

struct Sums {
  double mr = 0, mi = 0, vr = 0, vi = 0, c = 0;
};

template <class Index>
Sums sample_moments(std::span<const cplx> h, std::size_t n, Index&& idx) {
  Sums s;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.mr += h[idx(i)].real();
    s.mi += h[idx(i)].imag();
  }
  s.mr /= dn;
  s.mi /= dn;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = h[idx(i)].real() - s.mr, b = h[idx(i)].imag() - s.mi;
    s.vr += a * a;
    s.vi += b * b;
    s.c += a * b;
  }
  s.vr /= dn - 1.0;
  s.vi /= dn - 1.0;
  s.c /= dn - 1.0;
  return s;
}

}  // namespace

ImpulseResponse synthesize(const SynthesisConfig& cfg, std::uint64_t seed) {
  if (use_simple(cfg)) {
    const auto [alpha, b] = cfg.profile.eval(0.0);
    return simple_polack(b, alpha, simple_duration(cfg), cfg.sample_rate, seed);
  }
  return generalized_polack(cfg.profile, cfg.bank, cfg.sample_rate, seed, cfg.options);
}

std::size_t synthesized_length(const SynthesisConfig& cfg) {
  if (use_simple(cfg)) return samples_for_duration(simple_duration(cfg), cfg.sample_rate);
  return generalized_length(cfg.profile, cfg.bank, cfg.sample_rate, cfg.options);
}

void EnsembleSpec::validate() const {
  if (n_samples < 2) throw_config("ensemble needs at least 2 samples");
  const double nyq = 0.5 * synthesis.sample_rate;
  for (double f : frequencies)
    if (!(f >= 0.0 && f < nyq)) throw_domain("ensemble frequencies must lie in [0, fs/2)");
}

std::uint64_t EnsembleSpec::member_seed(std::size_t j) const { return derive_seed(master_seed, j); }

std::vector<cplx> CoefficientTable::column(std::size_t k) const {
  std::vector<cplx> c(n);
  for (std::size_t j = 0; j < n; ++j) c[j] = at(j, k);
  return c;
}

CoefficientTable ensemble_coefficients(const EnsembleSpec& spec, std::span<const double> freqs) {
  return coefficients(spec, freqs, true);
}

CoefficientTable ensemble_coefficients_serial(const EnsembleSpec& spec, std::span<const double> freqs) {
  return coefficients(spec, freqs, false);
}

double EmpiricalMoment::corr() const {
  const double d = std::sqrt(var_re * var_im);
  return d > 0.0 ? cov_re_im / d : 0.0;
}

EmpiricalMoment moments_of(double f, std::span<const cplx> h, std::uint64_t seed) {
  if (h.size() < 2) throw_config("moments need at least 2 samples");
  const std::size_t n = h.size();
  const auto s = sample_moments(h, n, [](std::size_t i) { return i; });
  EmpiricalMoment m;
  m.f = f;
  m.n = n;
  m.var_re = s.vr;
  m.var_im = s.vi;
  m.cov_re_im = s.c;
  if (n >= kBootstrapBelow) {
    const double dn1 = static_cast<double>(n - 1);
    m.se_var_re = s.vr * std::sqrt(2.0 / dn1);
    m.se_var_im = s.vi * std::sqrt(2.0 / dn1);
    m.se_cov = std::sqrt((s.vr * s.vi + s.c * s.c) / dn1);
    return m;
  }
  m.bootstrap = true;
  auto boot = [&](int which, std::uint64_t sub) {
    return bootstrap_se(
        n,
        [&](std::span<const std::size_t> idx) {
          const auto b = sample_moments(h, n, [&](std::size_t i) { return idx[i]; });
          return which == 0 ? b.vr : which == 1 ? b.vi : b.c;
        },
        kBootstrapResamples, derive_seed(seed, sub));
  };
  // Same resample indices for all three statistics.
  m.se_var_re = boot(0, 0);
  m.se_var_im = boot(1, 0);
  m.se_cov = boot(2, 0);
  return m;
}

std::vector<EmpiricalMoment> estimate_spectral_moments(const EnsembleSpec& spec, const CoefficientTable& table) {
  std::vector<EmpiricalMoment> out;
  for (std::size_t k = 0; k < table.frequencies.size(); ++k) {
    const auto col = table.column(k);
    out.push_back(moments_of(table.frequencies[k], col, derive_seed(spec.master_seed ^ 0x5eedb007ULL, k)));
  }
  return out;
}

std::vector<EmpiricalMoment> estimate_spectral_moments(const EnsembleSpec& spec) {
  return estimate_spectral_moments(spec, ensemble_coefficients(spec, spec.frequencies));
}

std::vector<CrossBinResult> cross_bin_sweep(const EnsembleSpec& spec, double f, std::span<const double> xis) {
  const double nyq = 0.5 * spec.synthesis.sample_rate;
  std::vector<double> freqs;
  for (double xi : xis) {
    const double lo = f - 0.5 * xi, hi = f + 0.5 * xi;
    if (!(lo > 0.0 && hi < nyq && lo < nyq && hi > 0.0)) throw_domain("f +- xi/2 must lie in (0, fs/2)");
    freqs.push_back(hi);
    freqs.push_back(lo);
  }
  const auto table = ensemble_coefficients(spec, freqs);
  const double dt = 1.0 / spec.synthesis.sample_rate;
  std::vector<CrossBinResult> out;
  for (std::size_t x = 0; x < xis.size(); ++x) {
    CrossBinResult r;
    r.f = f;
    r.xi = xis[x];
    r.n = table.n;
    cplx sum = 0.0;
    for (std::size_t j = 0; j < table.n; ++j) sum += table.at(j, 2 * x) * std::conj(table.at(j, 2 * x + 1));
    r.empirical = sum / static_cast<double>(table.n);
    double ssr = 0.0, ssi = 0.0;
    for (std::size_t j = 0; j < table.n; ++j) {
      const cplx d = table.at(j, 2 * x) * std::conj(table.at(j, 2 * x + 1)) - r.empirical;
      ssr += d.real() * d.real();
      ssi += d.imag() * d.imag();
    }
    const double dn = static_cast<double>(table.n);
    r.se_re = std::sqrt(ssr / (dn - 1.0) / dn);
    r.se_im = std::sqrt(ssi / (dn - 1.0) / dn);
    r.theoretical = fourier_autocorrelation(spec.synthesis.profile, f, r.xi) * dt;
    r.rel_error = std::abs(r.empirical - r.theoretical) / std::abs(r.theoretical);
    out.push_back(r);
  }
  return out;
}

CrossBinResult cross_bin_correlation(const EnsembleSpec& spec, double f, double xi) {
  const double x[] = {xi};
  return cross_bin_sweep(spec, f, x).front();
}

// ---------------------------------------------------------------------------

nlohmann::json WhitenessReport::to_json() const {
  nlohmann::json j = summary.to_json();
  j["max_rho"] = max_rho;
  j["max_pair_raw"] = max_pair_raw;
  j["cutoff_hz"] = cutoff_hz;
  j["upper_cutoff_hz"] = upper_cutoff_hz;
  j["first_bin"] = first_bin;
  j["last_bin"] = last_bin;
  j["first_frame"] = first_frame;
  j["bins_used"] = bins_used;
  j["bins_excluded"] = bins_excluded;
  j["uniformity_p"] = uniformity_p;
  j["excluded_uniformity_p"] = excluded_uniformity_p;
  j["pass"] = pass;
  auto arr = nlohmann::json::array();
  for (const auto& l : lags)
    arr.push_back({{"bin_lag", l.bin_lag}, {"frame_lag", l.frame_lag}, {"rho", l.rho}, {"positions", l.positions}});
  j["lags"] = arr;
  return j;
}

WhitenessReport stft_phase_whiteness(const EnsembleSpec& spec, const StftConfig& cfg, const WhitenessOptions& opts) {
  spec.validate();
  validate(cfg, false);
  if (std::abs(cfg.sample_rate - spec.synthesis.sample_rate) > 1e-9 * cfg.sample_rate)
    throw_config("STFT and synthesis sample rates differ");
  if (opts.frames < 1 || opts.bin_lags.empty() || opts.frame_lags.empty()) throw_config("whiteness needs lags");

  const std::size_t K = cfg.bins();
  const int max_dm = *std::max_element(opts.frame_lags.begin(), opts.frame_lags.end());
  WhitenessReport rep;
  rep.first_frame = cfg.center ? (cfg.window_length / 2 + cfg.hop - 1) / cfg.hop : 0;
  const std::size_t frames = rep.first_frame + opts.frames + static_cast<std::size_t>(std::max(0, max_dm));
  const std::size_t last_sample =
      (frames - 1) * cfg.hop + (cfg.center ? cfg.window_length / 2 : cfg.window_length);

  const auto& prof = spec.synthesis.profile;
  const double nyq = cfg.sample_rate / 2.0;
  rep.cutoff_hz = std::max(opts.min_hz, opts.cutoff_ratio * prof.alpha(0.0) / (4.0 * std::numbers::pi));
  rep.upper_cutoff_hz = nyq - std::max(opts.min_hz, opts.cutoff_ratio * prof.alpha(nyq) / (4.0 * std::numbers::pi));
  rep.first_bin = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(rep.cutoff_hz / cfg.bin_hz() - 1e-12)), 1);
  rep.last_bin = rep.upper_cutoff_hz > 0.0
                     ? std::min<std::size_t>(static_cast<std::size_t>(std::floor(rep.upper_cutoff_hz / cfg.bin_hz() + 1e-12)), K - 2)
                     : 0;
  const std::size_t last_bin = rep.last_bin;
  if (rep.first_bin > last_bin) throw_config("low/high-frequency exclusion leaves no STFT bins");
  rep.bins_used = last_bin - rep.first_bin + 1;
  rep.bins_excluded = (K - 2) - rep.bins_used;

  auto synth = spec.synthesis;
  synth.options.duration = static_cast<double>(last_sample) / cfg.sample_rate;

  // Unit phasors of every member at (frame, bin), frames x K per member.
  const std::size_t n = spec.n_samples;
  const std::size_t f0 = rep.first_frame;
  std::vector<cplx> unit(n * frames * K);
  for_members(n, true, [&](std::size_t j) {
    const auto h = synthesize(synth, spec.member_seed(j));
    const auto S = stft(h.samples, cfg, frames);
    for (std::size_t m = 0; m < frames; ++m)
      for (std::size_t k = 0; k < K; ++k) {
        const cplx z = m < S.frames ? S.at(m, k) : cplx(0.0);
        const double r = std::abs(z);
        unit[(j * frames + m) * K + k] = r > 0.0 ? z / r : cplx(1.0, 0.0);
      }
  });
  auto u = [&](std::size_t j, std::size_t m, std::size_t k) { return unit[(j * frames + m) * K + k]; };
  const double dn = static_cast<double>(n);

  for (int dk : opts.bin_lags)
    for (int dm : opts.frame_lags) {
      LagCorrelation lc{dk, dm, 0.0, 0};
      double acc = 0.0;
      for (std::size_t m = f0; m < f0 + opts.frames; ++m)
        for (std::size_t k = rep.first_bin; k + static_cast<std::size_t>(dk) <= last_bin; ++k) {
          cplx rm = 0.0, rp = 0.0;
          const std::size_t m2 = m + static_cast<std::size_t>(dm), k2 = k + static_cast<std::size_t>(dk);
          for (std::size_t j = 0; j < n; ++j) {
            const cplx a = u(j, m, k), b = u(j, m2, k2);
            rm += a * std::conj(b);
            rp += a * b;
          }
          rm /= dn;
          rp /= dn;
          acc += std::norm(rm) + std::norm(rp);
          rep.max_pair_raw = std::max({rep.max_pair_raw, std::abs(rm), std::abs(rp)});
          ++lc.positions;
        }
      if (lc.positions > 0) lc.rho = std::sqrt(std::max(0.0, acc / static_cast<double>(lc.positions) - 2.0 / dn));
      rep.max_rho = std::max(rep.max_rho, lc.rho);
      rep.lags.push_back(lc);
    }

  // Per-position KS, Bonferroni over positions.
  auto aggregate = [&](std::size_t k_lo, std::size_t k_hi) {
    double pmin = 1.0;
    std::size_t count = 0;
    std::vector<double> v(n);
    for (std::size_t m = f0; m < f0 + opts.frames; ++m)
      for (std::size_t k = k_lo; k <= k_hi && k < K; ++k) {
        for (std::size_t j = 0; j < n; ++j) v[j] = wrap_phase(std::arg(u(j, m, k))) / (2.0 * std::numbers::pi);
        pmin = std::min(pmin, kolmogorov_pvalue(ks_uniform_statistic(v), n));
        ++count;
      }
    return count == 0 ? 1.0 : std::min(1.0, pmin * static_cast<double>(count));
  };
  rep.uniformity_p = aggregate(rep.first_bin, last_bin);
  {
    const double lo = rep.first_bin > 1 ? aggregate(1, rep.first_bin - 1) : 1.0;
    const double hi = last_bin < K - 2 ? aggregate(last_bin + 1, K - 2) : 1.0;
    rep.excluded_uniformity_p = std::min(1.0, 2.0 * std::min(lo, hi));
  }

  rep.pass = rep.max_rho < opts.max_corr && rep.uniformity_p >= opts.significance;
  rep.summary.test = "stft_whiteness";
  rep.summary.statistic = rep.max_rho;
  rep.summary.p_value = rep.uniformity_p;
  rep.summary.significance = opts.significance;
  rep.summary.reject = !rep.pass;
  rep.summary.n = n;
  return rep;
}

}  // namespace revphase
