#include "revphase/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "revphase/errors.hpp"
#include "revphase/seeding.hpp"

namespace revphase {

namespace {

using cplx = std::complex<double>;

double wrap_pm_pi(double x) { return std::remainder(x, 2.0 * std::numbers::pi); }

std::array<double, 4> all_losses(const Spectrogram& a, const Spectrogram& b) {
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < kAllLossModes.size(); ++i) out[i] = loss(a, b, kAllLossModes[i]);
  return out;
}

nlohmann::json losses_json(const std::array<double, 4>& v) {
  nlohmann::json j;
  for (std::size_t i = 0; i < kAllLossModes.size(); ++i) j[std::string(loss_mode_name(kAllLossModes[i]))] = v[i];
  return j;
}

}  // namespace

std::string_view loss_mode_name(LossMode mode) {
  switch (mode) {
    case LossMode::KeepPhaseNoCompress: return "f1";
    case LossMode::KeepPhaseLogCompress: return "f2";
    case LossMode::MagnitudeNoCompress: return "f3";
    case LossMode::MagnitudeLogCompress: return "f4";
  }
  return "?";
}

cplx post_process(cplx z, LossMode mode) {
  const double r = std::abs(z);
  switch (mode) {
    case LossMode::KeepPhaseNoCompress: return z;
    case LossMode::KeepPhaseLogCompress: return r > 0.0 ? std::log1p(r) * (z / r) : cplx(0.0);
    case LossMode::MagnitudeNoCompress: return r;
    case LossMode::MagnitudeLogCompress: return std::log1p(r);
  }
  return 0.0;
}

double loss(const Spectrogram& Y, const Spectrogram& Yhat, LossMode mode) {
  if (!Y.same_shape(Yhat) || Y.data.size() != Yhat.data.size()) throw_config("loss: spectrogram shapes differ");
  if (Y.data.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < Y.data.size(); ++i)
    sum += std::norm(post_process(Y.data[i], mode) - post_process(Yhat.data[i], mode));
  return sum / static_cast<double>(Y.data.size());
}

double sisdr(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size()) throw_config("sisdr: signals differ in length");
  double rr = 0.0, er = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    rr += reference[i] * reference[i];
    er += estimate[i] * reference[i];
  }
  if (!(rr > 0.0)) throw_domain("sisdr: reference is all zero");
  const double a = er / rr;
  double pp = 0.0, ee = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double p = a * reference[i];
    const double e = estimate[i] - p;
    pp += p * p;
    ee += e * e;
  }
  if (!(ee > 0.0)) return kSisdrCap;
  if (!(pp > 0.0)) return -kSisdrCap;
  return std::clamp(10.0 * std::log10(pp / ee), -kSisdrCap, kSisdrCap);
}

nlohmann::json LossReport::to_json() const {
  nlohmann::json j;
  j["dry_loss"] = losses_json(dry_loss);
  j["wet_loss"] = losses_json(wet_loss);
  j["wet_loss_reanalysed"] = losses_json(wet_loss_reanalysed);
  j["sisdr_dry_db"] = sisdr_dry;
  j["sisdr_wet_db"] = sisdr_wet;
  j["sisdr_reverberant_db"] = sisdr_reverberant;
  j["phase_additivity_residual"] = phase_additivity_residual;
  return j;
}

LossReport phase_substitution_demo(const Signal& s, const ImpulseResponse& h, const StftConfig& cfg) {
  if (s.sample_rate != h.sample_rate || s.sample_rate != cfg.sample_rate)
    throw_config("phase demo: sample rates differ");
  validate(cfg, true);
  LossReport rep;
  const auto y_full = convolve(s, h);
  rep.y.assign(y_full.samples.begin(), y_full.samples.begin() + static_cast<std::ptrdiff_t>(s.samples.size()));

  const auto S = stft(s.samples, cfg);
  const auto Y = stft(rep.y, cfg);
  Spectrogram W = S;
  for (std::size_t i = 0; i < W.data.size(); ++i) {
    const double r = std::abs(Y.data[i]);
    W.data[i] = r > 0.0 ? std::abs(S.data[i]) * (Y.data[i] / r) : cplx(std::abs(S.data[i]));
  }
  rep.dry_loss = all_losses(S, S);
  rep.wet_loss = all_losses(S, W);

  const auto s_dry = istft(S);
  rep.s_wet = istft(W);
  rep.sisdr_dry = sisdr(s_dry, s.samples);
  rep.sisdr_wet = sisdr(rep.s_wet, s.samples);
  rep.sisdr_reverberant = sisdr(rep.y, s.samples);
  rep.wet_loss_reanalysed = all_losses(S, stft(rep.s_wet, cfg));

  // angle Y = angle H + angle S holds exactly for full-length transforms.
  const std::size_t n = y_full.samples.size();
  std::vector<double> sp(n, 0.0), hp(n, 0.0);
  std::copy(s.samples.begin(), s.samples.end(), sp.begin());
  std::copy(h.samples.begin(), h.samples.end(), hp.begin());
  const auto FS = fft(sp), FH = fft(hp), FY = fft(y_full.samples);
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) peak = std::max(peak, std::abs(FS[k]) * std::abs(FH[k]));
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(FS[k]) * std::abs(FH[k]) < 1e-6 * peak) continue;
    const double d = wrap_pm_pi(std::arg(FY[k]) - std::arg(FH[k]) - std::arg(FS[k]));
    rep.phase_additivity_residual = std::max(rep.phase_additivity_residual, std::abs(d));
  }
  return rep;
}

SensitivityStats loss_phase_sensitivity(const Spectrogram& Y, LossMode mode, std::size_t n_trials,
                                        std::uint64_t seed) {
  if (n_trials < 2) throw_config("phase sensitivity needs at least 2 trials");
  std::vector<double> vals(n_trials);
  Spectrogram P = Y;
  for (std::size_t t = 0; t < n_trials; ++t) {
    auto rng = make_rng(seed, t);
    std::uniform_real_distribution<double> theta(0.0, 2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < Y.data.size(); ++i) P.data[i] = Y.data[i] * std::polar(1.0, theta(rng));
    vals[t] = loss(Y, P, mode);
  }
  SensitivityStats st;
  st.trials = n_trials;
  double m = 0.0;
  for (double v : vals) m += v;
  m /= static_cast<double>(n_trials);
  double ss = 0.0;
  for (double v : vals) ss += (v - m) * (v - m);
  st.mean = m;
  st.variance = ss / static_cast<double>(n_trials - 1);
  st.variance_of_mean = st.variance / static_cast<double>(n_trials);
  return st;
}

}  // namespace revphase
