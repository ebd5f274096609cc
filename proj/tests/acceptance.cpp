// Acceptance criteria 1-10. One PASS/FAIL line per criterion; exit status is
// nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "revphase/ensemble.hpp"
#include "revphase/io.hpp"
#include "revphase/losses.hpp"
#include "revphase/moments.hpp"
#include "revphase/seeding.hpp"
#include "revphase/stats.hpp"

using namespace revphase;
using std::numbers::pi;

namespace {

// Pinned tolerances.
constexpr double kZ = 3.0;                       // criterion 1, standard errors
constexpr double kQuadRel = 1e-6;                // criterion 2
constexpr double kClosedSlopeTol = 0.05;         // criterion 3
constexpr double kEmpSlopeTol = 0.3;             // criterion 3
constexpr double kXcorrRel = 0.05;               // criterion 5
constexpr double kXcorrFar = 0.05;               // criterion 5, fraction of B dt / alpha
constexpr double kWhiteMaxCorr = 0.05;           // criterion 6
constexpr double kInvariance = 1e-12;            // criterion 7
constexpr double kSisdrDry = 40.0, kSisdrWet = 1.0, kMagLoss = 1e-6;  // criterion 8
constexpr double kCalLo = 0.002, kCalHi = 0.03;  // criterion 9
constexpr double kAlpha = 0.01;
constexpr double kFig1Seconds = 300.0;

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

EnsembleSpec constant_ensemble(std::size_t n, std::uint64_t seed, double fs, std::vector<double> freqs,
                               double alpha = 20.0, double b = 1.0) {
  return EnsembleSpec{n, seed,
                      SynthesisConfig{FrequencyProfile::constant(alpha, b, fs / 2.0), default_filter_bank(fs), fs,
                                      ModelKind::Auto, {}},
                      std::move(freqs)};
}

FrequencyProfile fig1_profile(double fs) {
  ArProfileSpec ar;
  ar.seed = 529;
  return sample_ar_profile(ar, fs / 2.0);
}

Outcome c1() {
  const double fs = 8000.0, alpha = 20.0, b = 1.0;
  const auto spec = constant_ensemble(20000, derive_seed(kSeed, 1), fs, {200.0, 500.0, 1000.0}, alpha, b);
  const double target = b / fs / (2.0 * alpha);
  const double corr_max = 3.0 / std::sqrt(20000.0);
  Outcome o{true, ""};
  for (const auto& m : estimate_spectral_moments(spec)) {
    const double zr = (m.var_re - target) / m.se_var_re, zi = (m.var_im - target) / m.se_var_im;
    const bool ok = std::abs(zr) <= kZ && std::abs(zi) <= kZ && std::abs(m.corr()) < corr_max;
    o.pass = o.pass && ok;
    o.detail += fmt("f=%g z_re=%+.2f z_im=%+.2f corr=%+.4f; ", m.f, zr, zi, m.corr());
  }
  o.detail += fmt("|corr| bound %.4f", corr_max);
  return o;
}

Outcome c2() {
  Outcome o{true, ""};
  double worst = 0.0;
  for (double alpha : {20.0, 3.0}) {
    const auto p = FrequencyProfile::constant(alpha, 1.0, 1e9);
    for (double f : {0.0, 1.0, 5.0, 100.0, 1000.0}) {
      const auto q = quadrature_moment(p, f);
      const auto c = closed_form_sigma(p, f);
      auto rel = [](double a, double r) { return r == 0.0 ? std::abs(a) : std::abs(a - r) / std::abs(r); };
      // sigma_- and C vanish at f = 0: absolute comparison against sigma_+.
      const double e = std::max({rel(q.sigma_plus_sq, c.sigma_plus_sq),
                                 f == 0.0 ? std::abs(q.sigma_minus_sq) / c.sigma_plus_sq
                                          : rel(q.sigma_minus_sq, c.sigma_minus_sq),
                                 f == 0.0 ? std::abs(q.cross_cov) / c.sigma_plus_sq : rel(q.cross_cov, c.cross_cov)});
      worst = std::max(worst, e);
    }
  }
  o.pass = worst < kQuadRel;
  o.detail = fmt("wide band: max rel err %.2e (tol %.0e)", worst, kQuadRel);
  // Band-limited to +-4 kHz: within the analytic band-limit bound.
  const auto p = FrequencyProfile::constant(20.0, 1.0, 4000.0);
  double worst_ratio = 0.0;
  for (double f : {0.0, 200.0, 1000.0, 3000.0}) {
    const auto q = quadrature_moment(p, f);
    const auto c = closed_form_sigma(p, f);
    const double allow = band_limit_bound(p, f) + kQuadRel * c.sigma_plus_sq;
    const double d = std::max({std::abs(q.sigma_plus_sq - c.sigma_plus_sq), std::abs(q.sigma_minus_sq - c.sigma_minus_sq),
                               std::abs(q.cross_cov - c.cross_cov)});
    worst_ratio = std::max(worst_ratio, d / allow);
  }
  o.pass = o.pass && worst_ratio <= 1.0;
  o.detail += fmt("; Fs=8k: max |err| / (band-limit bound + 1e-6 ref) = %.3f", worst_ratio);
  return o;
}

Outcome c3() {
  Outcome o;
  const double a0 = 20.0;
  const auto wide = FrequencyProfile::constant(a0, 1.0, 1e9);
  std::vector<double> fs_, aniso, cc;
  for (int i = 0; i <= 20; ++i) {
    const double f = 100.0 * std::pow(100.0, i / 20.0) * a0 / (4.0 * pi);
    const auto m = closed_form_sigma(wide, f);
    fs_.push_back(f);
    aniso.push_back(m.sigma_plus_sq - m.sigma_minus_sq);
    cc.push_back(m.cross_cov);
  }
  const auto s_an = convergence_slope(fs_, aniso), s_c = convergence_slope(fs_, cc);

  // Empirical anisotropy on x = 4 pi f / alpha in [2, 8], n = 5e4. A small alpha dt keeps the
  // sampled model's constant B dt^2 / 2 floor (from the t = 0 sample) far below the anisotropy.
  const double a_emp = 5.0;
  std::vector<double> freqs;
  for (double x = 2.0; x <= 8.0 + 1e-9; x += 0.5) freqs.push_back(x * a_emp / (4.0 * pi));
  const auto spec = constant_ensemble(50000, derive_seed(kSeed, 3), 8000.0, freqs, a_emp);
  std::vector<double> xf, yd;
  bool positive = true;
  for (const auto& m : estimate_spectral_moments(spec)) {
    const double d = m.var_re - m.var_im;
    if (d <= 0.0) positive = false;
    else {
      xf.push_back(m.f);
      yd.push_back(d);
    }
  }
  double emp = std::nan("");
  if (xf.size() >= 3) emp = convergence_slope(xf, yd).slope;
  o.pass = std::abs(s_an.slope + 2.0) <= kClosedSlopeTol && std::abs(s_c.slope + 1.0) <= kClosedSlopeTol && positive &&
           std::abs(emp + 2.0) <= kEmpSlopeTol;
  o.detail = fmt("closed-form slopes %.4f (aniso), %.4f (C); empirical aniso slope %.3f over x in [2,8]%s", s_an.slope,
                 s_c.slope, emp, positive ? "" : " (non-positive differences)");
  return o;
}

Outcome c4() {
  const double fs = 16000.0;
  const auto t0 = std::chrono::steady_clock::now();
  EnsembleSpec spec{10000, derive_seed(kSeed, 4),
                    SynthesisConfig{fig1_profile(fs), default_filter_bank(fs), fs, ModelKind::Auto, {}},
                    {10.0, 100.0, 1000.0}};
  const auto table = ensemble_coefficients(spec, spec.frequencies);
  const auto lo = table.column(0), hi = table.column(2);
  const auto c_lo = circularity_test(lo, kAlpha), c_hi = circularity_test(hi, kAlpha);
  const auto u_lo = phase_uniformity_test({10.0, phases_of(lo)}, kAlpha);
  const auto u_hi = phase_uniformity_test({1000.0, phases_of(hi)}, kAlpha);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  o.pass = c_lo.p_value < kAlpha && u_lo.p_value < kAlpha && c_hi.p_value > kAlpha && u_hi.p_value > kAlpha &&
           secs <= kFig1Seconds;
  o.detail = fmt("10 Hz: circ p=%.2e KS p=%.2e; 1000 Hz: circ p=%.3f KS p=%.3f; %.0f s", c_lo.p_value, u_lo.p_value,
                 c_hi.p_value, u_hi.p_value, secs);
  return o;
}

Outcome c5() {
  const double fs = 8000.0, alpha = 20.0, f = 1000.0;
  const auto spec = constant_ensemble(50000, derive_seed(kSeed, 5), fs, {}, alpha);
  const double bw = alpha / (2.0 * pi);
  const std::vector<double> xis{0.0, bw, 2.0 * bw, 5.0 * bw, 50.0 * bw};
  const auto res = cross_bin_sweep(spec, f, xis);
  Outcome o{true, ""};
  for (std::size_t i = 0; i + 1 < res.size(); ++i) {
    o.pass = o.pass && res[i].rel_error < kXcorrRel;
    o.detail += fmt("xi=%g bw: rel %.3f; ", xis[i] / bw, res[i].rel_error);
  }
  const double scale = 1.0 / fs / alpha;
  const double far = std::abs(res.back().empirical) / scale;
  o.pass = o.pass && far < kXcorrFar;
  o.detail += fmt("xi=50 bw: |emp| = %.4f B dt/alpha", far);
  return o;
}

Outcome c6() {
  const double fs = 16000.0;
  EnsembleSpec spec{2000, derive_seed(kSeed, 6),
                    SynthesisConfig{fig1_profile(fs), default_filter_bank(fs), fs, ModelKind::Auto, {}},
                    {1000.0}};
  StftConfig cfg;  // Hann 1024 / 256
  WhitenessOptions opts;
  opts.max_corr = kWhiteMaxCorr;
  opts.significance = kAlpha;
  const auto w = stft_phase_whiteness(spec, cfg, opts);
  Outcome o;
  o.pass = w.max_rho < kWhiteMaxCorr && w.uniformity_p >= kAlpha;
  o.detail = fmt("max rho %.4f, uniformity p %.3f, bins %zu..%zu, frames %zu..%zu", w.max_rho, w.uniformity_p,
                 w.first_bin, w.last_bin, w.first_frame, w.first_frame + opts.frames - 1);
  return o;
}

Spectrogram reverberant_spectrogram(std::uint64_t seed) {
  const double fs = 16000.0;
  const auto s = synth_test_signal(TestSignalKind::HarmonicChirp, 1.0, fs, derive_seed(seed, 0));
  const auto h = simple_polack(1.0, rt60_to_alpha(0.5), auto_duration(rt60_to_alpha(0.5)), fs, derive_seed(seed, 1));
  auto y = convolve(s, h).samples;
  y.resize(s.samples.size());
  auto Y = stft(y, StftConfig{});
  double p = 0.0;
  for (auto z : Y.data) p += std::norm(z);
  const double g = 1.0 / std::sqrt(p / static_cast<double>(Y.data.size()));
  for (auto& z : Y.data) z *= g;
  return Y;
}

Outcome c7() {
  const auto Y = reverberant_spectrogram(derive_seed(kSeed, 7));  // mean |Y|^2 = 1
  const std::size_t trials = 1000;
  std::array<SensitivityStats, 4> s;
  for (std::size_t i = 0; i < 4; ++i) s[i] = loss_phase_sensitivity(Y, kAllLossModes[i], trials, derive_seed(kSeed, 70 + i));
  // Per-trial losses are >= 0, so trials * mean bounds every one of them.
  const double max3 = s[2].mean * static_cast<double>(trials), max4 = s[3].mean * static_cast<double>(trials);
  const double clt = std::sqrt(s[0].variance_of_mean);
  Outcome o;
  o.pass = max3 <= kInvariance && max4 <= kInvariance && s[0].mean > 0.1 && s[1].mean > 0.1 &&
           std::abs(s[0].mean - 2.0) <= 3.0 * clt;
  o.detail = fmt("f3 max <= %.1e, f4 max <= %.1e; f1 mean %.5f (|d| %.1e, 3 SE %.1e), f2 mean %.4f", max3, max4,
                 s[0].mean, std::abs(s[0].mean - 2.0), 3.0 * clt, s[1].mean);
  return o;
}

Outcome c8() {
  const double fs = 16000.0;
  const SynthesisConfig synth{FrequencyProfile::constant(rt60_to_alpha(0.5), 1.0, fs / 2.0), default_filter_bank(fs),
                              fs, ModelKind::Auto, {}};
  double min_dry = 1e9, max_wet = -1e9, max_mag = 0.0;
  for (std::uint64_t j = 0; j < 20; ++j) {
    const auto s = synth_test_signal(TestSignalKind::HarmonicChirp, 2.0, fs, derive_seed(kSeed + 8, 2 * j));
    const auto h = synthesize(synth, derive_seed(kSeed + 8, 2 * j + 1));
    const auto r = phase_substitution_demo(s, h, StftConfig{});
    min_dry = std::min(min_dry, r.sisdr_dry);
    max_wet = std::max(max_wet, r.sisdr_wet);
    max_mag = std::max({max_mag, r.wet_loss[2], r.wet_loss[3]});
  }
  Outcome o;
  o.pass = min_dry > kSisdrDry && max_wet < kSisdrWet && max_mag < kMagLoss;
  o.detail = fmt("20 seeds: min SISDR dry %.1f dB, max SISDR wet %.2f dB, max f3/f4 loss %.1e", min_dry, max_wet,
                 max_mag);
  return o;
}

Outcome c9() {
  const std::size_t reps = 500, n = 1000;
  std::size_t rej_circ = 0, rej_ks = 0, rej_ray = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    auto rng = make_rng(derive_seed(kSeed, 9), r);
    std::normal_distribution<double> d;
    std::vector<std::complex<double>> z(n);
    for (auto& v : z) v = {d(rng), d(rng)};
    rej_circ += circularity_test(z, kAlpha).reject;
    const auto u = phase_uniformity_test({1.0, phases_of(z)}, kAlpha);
    rej_ks += u.reject;
    rej_ray += u.details["rayleigh_p"].get<double>() < kAlpha;
  }
  auto in = [](double x) { return x >= kCalLo && x <= kCalHi; };
  const double a = double(rej_circ) / reps, b = double(rej_ks) / reps, c = double(rej_ray) / reps;
  return {in(a) && in(b) && in(c), fmt("rejection rates at 0.01 over %zu nulls: circularity %.3f, KS %.3f, Rayleigh %.3f",
                                       reps, a, b, c)};
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) {
      std::ifstream in(e.path(), std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      files[std::filesystem::relative(e.path(), dir).string()] = ss.str();
    }
  return files;
}

Outcome c10() {
  const auto root = std::filesystem::temp_directory_path() / ("revphase_accept_" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  const std::vector<std::string> runs{
      "synth --n 2 --format wav,json,csv",
      "fig1 --n 40",
      "moments --n 300",
      "xcorr --n 300",
      "phase-test --n 40 --freqs 500,2000",
      "loss-demo --n 2 --trials 5 --format csv,json,wav",
  };
  std::size_t files = 0;
  for (int pass = 0; pass < 2; ++pass) {
    // Different thread counts must not change a byte.
    const std::string env = pass == 0 ? "OMP_NUM_THREADS=1 " : "OMP_NUM_THREADS=3 ";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto out = root / std::to_string(pass) / std::to_string(i);
      const std::string cmd = env + REVPHASE_CLI_PATH + std::string(" ") + runs[i] + " --seed 42 --out " +
                              out.string() + " > /dev/null";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + runs[i]};
    }
  }
  const auto a = snapshot(root / "0"), b = snapshot(root / "1");
  files = a.size();
  std::filesystem::remove_all(root);
  if (a.size() != b.size()) return {false, "different file sets"};
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) return {false, "differs: " + name};
  }
  return {files > 0, fmt("%zu files from %zu subcommand runs identical across two invocations", files, runs.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};
  // Optional: run a subset, e.g. `acceptance 3 5`.
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && std::find(pick.begin(), pick.end(), id) == pick.end()) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ++ran;
    failed += !o.pass;
    std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
