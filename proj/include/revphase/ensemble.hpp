#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "revphase/profiles.hpp"
#include "revphase/rir.hpp"
#include "revphase/spectral.hpp"
#include "revphase/stats.hpp"

namespace revphase {

enum class ModelKind {
  Auto,         // Simple for constant profiles, Generalized otherwise
  Simple,       // requires a constant profile
  Generalized,
};

struct SynthesisConfig {
  FrequencyProfile profile;
  FilterBank bank;
  double sample_rate = 16000.0;
  ModelKind model = ModelKind::Auto;
  GeneralizedOptions options;  // duration <= 0 means automatic
};

ImpulseResponse synthesize(const SynthesisConfig& cfg, std::uint64_t seed);
/// Length every synthesize() call for this config returns.
std::size_t synthesized_length(const SynthesisConfig& cfg);

struct EnsembleSpec {
  std::size_t n_samples = 1000;
  std::uint64_t master_seed = 0;
  SynthesisConfig synthesis;
  std::vector<double> frequencies;  // [Hz]

  /// n >= 2, frequencies in [0, fs/2) (f = 0 is allowed for the DC row).
  void validate() const;
  /// Seed of ensemble member j.
  std::uint64_t member_seed(std::size_t j) const;
};

/// H_est(f_k) for every member j, row-major n x K.
struct CoefficientTable {
  std::vector<double> frequencies;
  std::size_t n = 0;
  std::vector<std::complex<double>> data;

  std::complex<double> at(std::size_t j, std::size_t k) const { return data[j * frequencies.size() + k]; }
  std::vector<std::complex<double>> column(std::size_t k) const;
};

/// Members are synthesized in parallel (OpenMP) into per-member slots.
CoefficientTable ensemble_coefficients(const EnsembleSpec& spec, std::span<const double> frequencies);
/// Reference implementation: same arithmetic, one thread, in member order.
CoefficientTable ensemble_coefficients_serial(const EnsembleSpec& spec, std::span<const double> frequencies);

struct EmpiricalMoment {
  double f = 0.0;
  double var_re = 0.0;
  double var_im = 0.0;
  double cov_re_im = 0.0;  // Cov(Re H, Im H) = -Cov(<h,c_f>, <h,s_f>)
  std::size_t n = 0;
  double se_var_re = 0.0;
  double se_var_im = 0.0;
  double se_cov = 0.0;
  bool bootstrap = false;  // standard errors from 200 resamples (n < 1000)

  double corr() const;
};

/// Sample moments of one column. Gaussian standard errors, or the
/// bootstrap when n < 1000 (resample seeds derived from `seed`).
EmpiricalMoment moments_of(double f, std::span<const std::complex<double>> h, std::uint64_t seed);
std::vector<EmpiricalMoment> estimate_spectral_moments(const EnsembleSpec& spec);
std::vector<EmpiricalMoment> estimate_spectral_moments(const EnsembleSpec& spec, const CoefficientTable& table);

struct CrossBinResult {
  double f = 0.0;
  double xi = 0.0;
  std::complex<double> empirical;
  std::complex<double> theoretical;  // continuous closed form times dt
  double rel_error = 0.0;
  double se_re = 0.0;
  double se_im = 0.0;
  std::size_t n = 0;
};

/// (1/n) sum_j H_j(f + xi/2) conj(H_j(f - xi/2)) against the closed form.
/// Throws DomainError unless f +- xi/2 lies in (0, fs/2).
CrossBinResult cross_bin_correlation(const EnsembleSpec& spec, double f, double xi);
/// Sweep sharing one ensemble across all xi.
std::vector<CrossBinResult> cross_bin_sweep(const EnsembleSpec& spec, double f, std::span<const double> xis);

struct WhitenessOptions {
  std::vector<int> bin_lags{3, 4, 6, 8};
  std::vector<int> frame_lags{1, 2};
  std::size_t frames = 2;  // frames whose phases are paired, starting at the first full one
  double min_hz = 100.0;   // bins closer than this to DC or Nyquist are excluded
  // ... as are bins with 4 pi d / alpha < ratio, d = distance to DC (alpha(0))
  // or to Nyquist (alpha(fs/2)); the sampled spectrum folds there.
  double cutoff_ratio = 10.0;
  double max_corr = 0.05;
  double significance = 0.01;
};

struct LagCorrelation {
  int bin_lag = 0;
  int frame_lag = 0;
  double rho = 0.0;  // debiased RMS circular association over positions
  std::size_t positions = 0;
};

struct WhitenessReport {
  TestReport summary;  // statistic = max lag rho, p = aggregate uniformity p
  std::vector<LagCorrelation> lags;
  double max_rho = 0.0;
  double max_pair_raw = 0.0;  // advisory, not debiased
  double cutoff_hz = 0.0;
  double upper_cutoff_hz = 0.0;
  std::size_t first_bin = 0;
  std::size_t last_bin = 0;
  std::size_t first_frame = 0;
  std::size_t bins_used = 0;
  std::size_t bins_excluded = 0;
  double uniformity_p = 1.0;
  double excluded_uniformity_p = 1.0;  // reported only
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Phase whiteness of the first STFT frames lying wholly inside each member
/// (a centered frame straddling the onset sees a truncated window). Only the
/// samples needed are synthesized.
WhitenessReport stft_phase_whiteness(const EnsembleSpec& spec, const StftConfig& cfg,
                                     const WhitenessOptions& opts = {});

}  // namespace revphase
