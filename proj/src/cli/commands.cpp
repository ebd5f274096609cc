#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "revphase/cli.hpp"
#include "revphase/ensemble.hpp"
#include "revphase/errors.hpp"
#include "revphase/io.hpp"
#include "revphase/losses.hpp"
#include "revphase/moments.hpp"
#include "revphase/seeding.hpp"
#include "revphase/stats.hpp"

namespace revphase::cli {

namespace {

using Paths = std::vector<std::filesystem::path>;

class Outputs {
 public:
  explicit Outputs(const RunConfig& cfg) : dir_(cfg.out) { ensure_directory(dir_); }
  std::filesystem::path operator()(const std::string& name) {
    written_.push_back(dir_ / name);
    return written_.back();
  }
  /// For writers producing <base>.json + <base>.f32.
  std::filesystem::path base(const std::string& name) {
    written_.push_back(dir_ / (name + ".json"));
    written_.push_back(dir_ / (name + ".f32"));
    return dir_ / name;
  }
  Paths done() const { return written_; }

 private:
  std::filesystem::path dir_;
  Paths written_;
};

std::string hz_tag(double f) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%ghz", f);
  return buf;
}

nlohmann::json metadata(const RunConfig& cfg, const FrequencyProfile& p) {
  nlohmann::json j;
  j["config"] = cfg.to_json();
  j["config_digest"] = config_digest(j["config"]);
  j["profile"] = p.to_json();
  j["profile_digest"] = config_digest(j["profile"]);
  return j;
}

ModelKind model_of(const RunConfig& cfg) {
  if (cfg.model == "simple") return ModelKind::Simple;
  if (cfg.model == "generalized") return ModelKind::Generalized;
  return ModelKind::Auto;
}

SynthesisConfig synthesis_of(const RunConfig& cfg, const FrequencyProfile& p) {
  SynthesisConfig s{p, make_bank(cfg), cfg.fs, model_of(cfg), {}};
  s.options.independent_noise = cfg.independent_noise;
  if (cfg.duration) {
    if (!(*cfg.duration > 0.0)) throw_config("--duration must be > 0");
    s.options.duration = *cfg.duration;
  }
  return s;
}

EnsembleSpec ensemble_of(const RunConfig& cfg, const FrequencyProfile& p, std::size_t default_n,
                         std::vector<double> default_freqs) {
  EnsembleSpec e{cfg.n.value_or(default_n), *cfg.seed, synthesis_of(cfg, p),
                 cfg.freqs.empty() ? std::move(default_freqs) : cfg.freqs};
  e.validate();
  return e;
}

std::string profile_or(const RunConfig& cfg, const std::string& fallback) {
  return cfg.profile.empty() ? fallback : cfg.profile;
}

double z_score(double emp, double theory, double se) {
  const double d = emp - theory;
  if (se > 0.0) return d / se;
  return d == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
}

TestSignalKind signal_kind(const std::string& s) {
  if (s == "am_tones") return TestSignalKind::AmTones;
  if (s == "white") return TestSignalKind::White;
  return TestSignalKind::HarmonicChirp;
}

}  // namespace

// ---------------------------------------------------------------------------

Paths cmd_synth(const RunConfig& cfg) {
  const auto profile =
      parse_profile(profile_or(cfg, cfg.rt60 ? "const:B=1" : "const:rt60=0.5,B=1"), cfg.fs, cfg.rt60);
  const auto synth = synthesis_of(cfg, profile);
  const std::size_t count = cfg.n.value_or(1);
  Outputs out(cfg);
  auto meta = metadata(cfg, profile);
  meta["items"] = nlohmann::json::array();
  for (std::size_t j = 0; j < count; ++j) {
    const std::uint64_t seed = derive_seed(*cfg.seed, j);
    const auto h = synthesize(synth, seed);
    char name[32];
    std::snprintf(name, sizeof name, "rir_%04zu", j);
    if (cfg.wants("wav")) write_wav(out(std::string(name) + ".wav"), h.samples, h.sample_rate);
    if (cfg.wants("json")) {
      nlohmann::json header;
      header["sample_rate"] = h.sample_rate;
      header["seed"] = seed;
      header["profile_digest"] = meta["profile_digest"];
      write_raw_f32(out.base(name), h.samples, header);
    }
    if (cfg.wants("csv")) {
      CsvWriter csv(out(std::string(name) + ".csv"), {"n", "t_s", "h"});
      for (std::size_t i = 0; i < h.samples.size(); ++i)
        csv.row({static_cast<double>(i), static_cast<double>(i) / h.sample_rate, h.samples[i]});
    }
    meta["items"].push_back({{"name", name}, {"seed", seed}, {"length", h.samples.size()}});
  }
  write_json(out("synth.json"), meta);
  return out.done();
}

Paths cmd_fig1(const RunConfig& cfg) {
  const auto profile = parse_profile(profile_or(cfg, "ar:order=8,seed=529"), cfg.fs, cfg.rt60);
  auto spec = ensemble_of(cfg, profile, 10000, {10.0, 100.0, 1000.0});
  if (spec.n_samples < 30) throw_config("fig1 needs --n >= 30 for its tests");
  const auto table = ensemble_coefficients(spec, spec.frequencies);
  Outputs out(cfg);
  auto summary = metadata(cfg, profile);
  summary["frequencies"] = nlohmann::json::array();
  for (std::size_t k = 0; k < spec.frequencies.size(); ++k) {
    const double f = spec.frequencies[k];
    const auto col = table.column(k);
    if (cfg.wants("csv")) {
      CsvWriter csv(out("fig1_" + hz_tag(f) + ".csv"), {"re", "im"});
      for (const auto& z : col) csv.row({z.real(), z.imag()});
    }
    const auto circ = circularity_test(col, cfg.significance);
    const auto unif = phase_uniformity_test({f, phases_of(col)}, cfg.significance);
    const auto mom = moments_of(f, col, derive_seed(*cfg.seed, 1000 + k));
    nlohmann::json row;
    row["f_hz"] = f;
    row["n"] = col.size();
    row["var_re"] = mom.var_re;
    row["var_im"] = mom.var_im;
    row["corr"] = mom.corr();
    row["circularity"] = circ.to_json();
    row["uniformity"] = unif.to_json();
    row["isotropic"] = !circ.reject && !unif.reject;
    row["x_4pi_f_over_alpha0"] = 4.0 * std::numbers::pi * f / profile.alpha(0.0);
    summary["frequencies"].push_back(row);
  }
  write_json(out("fig1_summary.json"), summary);
  return out.done();
}

Paths cmd_moments(const RunConfig& cfg) {
  const auto profile = parse_profile(profile_or(cfg, "const:alpha=20,B=1"), cfg.fs, cfg.rt60);
  auto spec = ensemble_of(cfg, profile, 10000, {0.0, 100.0, 200.0, 500.0, 1000.0, 2000.0});
  const double dt = 1.0 / cfg.fs;
  // Continuous-time theory with B_cont = B_disc dt.
  const auto theory_profile = profile.with_b_scaled(dt);
  const auto emp = estimate_spectral_moments(spec);

  Outputs out(cfg);
  auto doc = metadata(cfg, profile);
  doc["records"] = nlohmann::json::array();
  std::unique_ptr<CsvWriter> csv, quad;
  if (cfg.wants("csv")) {
    csv = std::make_unique<CsvWriter>(out("moments.csv"),
                                      std::initializer_list<std::string_view>{"f_hz", "sp2_theory", "sm2_theory",
                                                                              "c_theory", "sp2_emp", "sm2_emp",
                                                                              "c_emp", "z_sp2", "z_sm2", "z_c"});
    quad = std::make_unique<CsvWriter>(
        out("moments_quadrature.csv"),
        std::initializer_list<std::string_view>{"f_hz", "sp2_quad", "sm2_quad", "c_quad", "asymptotic_var",
                                                "band_limit_bound"});
  }
  for (const auto& m : emp) {
    const auto th = closed_form_sigma(theory_profile, m.f);
    const auto q = quadrature_moment(theory_profile, m.f);
    const double asym = asymptotic_variance(theory_profile, m.f);
    const double bound = band_limit_bound(theory_profile, m.f);
    // <h, s_f> = -Im H, so its covariance with <h, c_f> is -Cov(Re H, Im H).
    const double c_emp = -m.cov_re_im;
    const double z_sp = z_score(m.var_re, th.sigma_plus_sq, m.se_var_re);
    const double z_sm = z_score(m.var_im, th.sigma_minus_sq, m.se_var_im);
    const double z_c = z_score(c_emp, th.cross_cov, m.se_cov);
    if (csv) {
      csv->row({m.f, th.sigma_plus_sq, th.sigma_minus_sq, th.cross_cov, m.var_re, m.var_im, c_emp, z_sp, z_sm, z_c});
      quad->row({m.f, q.sigma_plus_sq, q.sigma_minus_sq, q.cross_cov, asym, bound});
    }
    doc["records"].push_back({{"f_hz", m.f},
                              {"closed_form", {th.sigma_plus_sq, th.sigma_minus_sq, th.cross_cov}},
                              {"quadrature", {q.sigma_plus_sq, q.sigma_minus_sq, q.cross_cov}},
                              {"asymptotic_var", asym},
                              {"band_limit_bound", bound},
                              {"empirical", {m.var_re, m.var_im, c_emp}},
                              {"standard_error", {m.se_var_re, m.se_var_im, m.se_cov}},
                              {"bootstrap_se", m.bootstrap},
                              {"z", {z_sp, z_sm, z_c}},
                              {"n", m.n}});
  }
  if (cfg.wants("json")) write_json(out("moments.json"), doc);
  return out.done();
}

Paths cmd_xcorr(const RunConfig& cfg) {
  const auto profile = parse_profile(profile_or(cfg, "const:alpha=20,B=1"), cfg.fs, cfg.rt60);
  auto spec = ensemble_of(cfg, profile, 20000, {});
  const double bw = profile.alpha(cfg.f) / (2.0 * std::numbers::pi);
  const std::vector<double> units =
      cfg.xi_bw.empty() ? std::vector<double>{0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0} : cfg.xi_bw;
  std::vector<double> xis;
  for (double u : units) xis.push_back(u * bw);
  const auto res = cross_bin_sweep(spec, cfg.f, xis);

  Outputs out(cfg);
  auto doc = metadata(cfg, profile);
  doc["f_hz"] = cfg.f;
  doc["bandwidth_hz"] = bw;
  doc["rows"] = nlohmann::json::array();
  std::unique_ptr<CsvWriter> csv;
  if (cfg.wants("csv"))
    csv = std::make_unique<CsvWriter>(
        out("xcorr.csv"), std::initializer_list<std::string_view>{"xi_hz", "xi_bw", "emp_re", "emp_im", "theo_re",
                                                                  "theo_im", "emp_abs", "theo_abs", "rel_error",
                                                                  "se_re", "se_im"});
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& r = res[i];
    if (csv)
      csv->row({r.xi, units[i], r.empirical.real(), r.empirical.imag(), r.theoretical.real(), r.theoretical.imag(),
                std::abs(r.empirical), std::abs(r.theoretical), r.rel_error, r.se_re, r.se_im});
    doc["rows"].push_back({{"xi_hz", r.xi},
                           {"xi_bw", units[i]},
                           {"empirical", {r.empirical.real(), r.empirical.imag()}},
                           {"theoretical", {r.theoretical.real(), r.theoretical.imag()}},
                           {"rel_error", r.rel_error},
                           {"se", {r.se_re, r.se_im}},
                           {"n", r.n}});
  }
  if (cfg.wants("json")) write_json(out("xcorr.json"), doc);
  return out.done();
}

Paths cmd_phase_test(const RunConfig& cfg) {
  const auto profile = parse_profile(profile_or(cfg, "ar:order=8,seed=529"), cfg.fs, cfg.rt60);
  auto spec = ensemble_of(cfg, profile, 2000, {10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 4000.0});
  if (spec.n_samples < 30) throw_config("phase-test needs --n >= 30");
  const double a0 = profile.alpha(0.0);
  const auto table = ensemble_coefficients(spec, spec.frequencies);

  Outputs out(cfg);
  auto doc = metadata(cfg, profile);
  doc["exclusion_rule"] = "4 pi f / alpha(0) < 10";
  doc["frequencies"] = nlohmann::json::array();
  std::unique_ptr<CsvWriter> csv;
  if (cfg.wants("csv"))
    csv = std::make_unique<CsvWriter>(out("phase_test.csv"),
                                      std::vector<std::string>{"f_hz", "status", "x_4pi_f_over_alpha0", "ks_d",
                                                               "ks_p", "rayleigh_p", "circ_p"});
  for (std::size_t k = 0; k < spec.frequencies.size(); ++k) {
    const double f = spec.frequencies[k];
    const auto col = table.column(k);
    const auto unif = phase_uniformity_test({f, phases_of(col)}, cfg.significance);
    const auto circ = circularity_test(col, cfg.significance);
    const double x = 4.0 * std::numbers::pi * f / a0;
    const std::string status = x < 10.0 ? "excluded" : unif.reject ? "fail" : "pass";
    if (csv)
      csv->raw_row({fmt9(f), status, fmt9(x), fmt9(unif.statistic), fmt9(unif.p_value),
                    fmt9(unif.details["rayleigh_p"].get<double>()), fmt9(circ.p_value)});
    doc["frequencies"].push_back(
        {{"f_hz", f}, {"status", status}, {"uniformity", unif.to_json()}, {"circularity", circ.to_json()}});
  }
  if (cfg.whiteness) {
    StftConfig st;
    st.window_length = cfg.window;
    st.hop = cfg.hop;
    st.sample_rate = cfg.fs;
    doc["whiteness"] = stft_phase_whiteness(spec, st).to_json();
  }
  if (cfg.wants("json")) write_json(out("phase_test.json"), doc);
  return out.done();
}

Paths cmd_loss_demo(const RunConfig& cfg) {
  const auto profile =
      parse_profile(profile_or(cfg, cfg.rt60 ? "const:B=1" : "const:rt60=0.5,B=1"), cfg.fs, cfg.rt60);
  auto synth = synthesis_of(cfg, profile);
  synth.options.duration = 0.0;  // --duration sets the dry signal length here
  const double dry_seconds = cfg.duration.value_or(2.0);
  StftConfig st;
  st.window_length = cfg.window;
  st.hop = cfg.hop;
  st.sample_rate = cfg.fs;
  const std::size_t runs = cfg.n.value_or(1);

  Outputs out(cfg);
  auto doc = metadata(cfg, profile);
  doc["runs"] = nlohmann::json::array();
  double mean_dry = 0.0, mean_wet = 0.0;
  LossReport first;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto s = synth_test_signal(signal_kind(cfg.signal), dry_seconds, cfg.fs, derive_seed(*cfg.seed, 2 * r));
    const auto h = synthesize(synth, derive_seed(*cfg.seed, 2 * r + 1));
    auto rep = phase_substitution_demo(s, h, st);
    mean_dry += rep.sisdr_dry / static_cast<double>(runs);
    mean_wet += rep.sisdr_wet / static_cast<double>(runs);
    doc["runs"].push_back(rep.to_json());
    if (r == 0) {
      if (cfg.wants("wav")) {
        write_wav(out("s.wav"), s.samples, cfg.fs);
        write_wav(out("y.wav"), rep.y, cfg.fs);
        write_wav(out("s_wet.wav"), rep.s_wet, cfg.fs);
      }
      first = std::move(rep);
    }
  }
  doc["mean_sisdr_dry_db"] = mean_dry;
  doc["mean_sisdr_wet_db"] = mean_wet;

  // Sensitivity of each loss to a re-randomized phase of the wet spectrogram.
  const auto Y = stft(first.y, st);
  doc["sensitivity"] = nlohmann::json::object();
  std::unique_ptr<CsvWriter> csv;
  if (cfg.wants("csv"))
    csv = std::make_unique<CsvWriter>(out("loss_demo.csv"),
                                      std::vector<std::string>{"mode", "wet_loss", "wet_loss_reanalysed",
                                                               "sensitivity_mean", "sensitivity_var"});
  for (std::size_t i = 0; i < kAllLossModes.size(); ++i) {
    const auto mode = kAllLossModes[i];
    const auto sens = loss_phase_sensitivity(Y, mode, cfg.trials, derive_seed(*cfg.seed, 1000003 + i));
    const std::string name(loss_mode_name(mode));
    doc["sensitivity"][name] = {{"mean", sens.mean}, {"variance", sens.variance}, {"trials", sens.trials}};
    if (csv)
      csv->raw_row({name, fmt9(first.wet_loss[i]), fmt9(first.wet_loss_reanalysed[i]), fmt9(sens.mean),
                    fmt9(sens.variance)});
  }
  if (cfg.wants("json")) write_json(out("loss_demo.json"), doc);
  return out.done();
}

}  // namespace revphase::cli
