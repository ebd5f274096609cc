#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string_view>

#include <json.hpp>

#include "revphase/rir.hpp"
#include "revphase/spectral.hpp"

namespace revphase {

enum class LossMode {
  KeepPhaseNoCompress,   // f1(z) = z
  KeepPhaseLogCompress,  // f2(z) = log(1 + |z|) z / |z|, f2(0) = 0
  MagnitudeNoCompress,   // f3(z) = |z|
  MagnitudeLogCompress,  // f4(z) = log(1 + |z|)
};

inline constexpr std::array<LossMode, 4> kAllLossModes{LossMode::KeepPhaseNoCompress, LossMode::KeepPhaseLogCompress,
                                                       LossMode::MagnitudeNoCompress,
                                                       LossMode::MagnitudeLogCompress};

std::string_view loss_mode_name(LossMode mode);  // "f1" ... "f4"

std::complex<double> post_process(std::complex<double> z, LossMode mode);

/// Mean over bins of |f(Y) - f(Yhat)|^2. Throws ConfigError on shape mismatch.
double loss(const Spectrogram& Y, const Spectrogram& Yhat, LossMode mode);

/// 10 log10(|P|^2 / |e|^2), P the projection of the estimate on the
/// reference, e = estimate - P; capped at 100 dB. Throws DomainError for a
/// zero reference, ConfigError for unequal lengths.
double sisdr(std::span<const double> estimate, std::span<const double> reference);
inline constexpr double kSisdrCap = 100.0;

struct LossReport {
  /// Losses of the constructed spectrograms against |S|e^{i angle S}:
  /// dry (S itself) and wet (|S| e^{i angle Y}).
  std::array<double, 4> dry_loss{};
  std::array<double, 4> wet_loss{};
  /// Same after re-analysis, stft(istft(.)). A phase-modified STFT is not
  /// a consistent spectrogram, so the magnitude losses here are not zero.
  std::array<double, 4> wet_loss_reanalysed{};
  double sisdr_dry = 0.0;
  double sisdr_wet = 0.0;
  double sisdr_reverberant = 0.0;  // y trimmed to |s| against s
  /// max |wrap(angle Y - angle H - angle S)| over full-length DFT bins with
  /// non-negligible |H S|.
  double phase_additivity_residual = 0.0;
  std::vector<double> s_wet;  // for optional listening output
  std::vector<double> y;

  nlohmann::json to_json() const;
};

LossReport phase_substitution_demo(const Signal& s, const ImpulseResponse& h, const StftConfig& cfg);

struct SensitivityStats {
  double mean = 0.0;
  double variance = 0.0;  // sample variance of the per-trial losses
  double variance_of_mean = 0.0;  // variance / trials
  std::size_t trials = 0;
};

/// loss(Y, Y e^{i Theta_k}, mode) over i.i.d. uniform phase fields Theta_k
/// (trial k drawn from derive_seed(seed, k)). Throws ConfigError for
/// n_trials < 2.
SensitivityStats loss_phase_sensitivity(const Spectrogram& Y, LossMode mode, std::size_t n_trials,
                                        std::uint64_t seed);

}  // namespace revphase
