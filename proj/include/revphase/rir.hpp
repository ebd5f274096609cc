#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "revphase/butterworth.hpp"
#include "revphase/profiles.hpp"

namespace revphase {

struct Signal {
  std::vector<double> samples;
  double sample_rate = 16000.0;
};

struct ImpulseResponse {
  std::vector<double> samples;
  double sample_rate = 16000.0;
  std::string provenance;  // free-form: profile digest, seed
};

/// Band i covers (edges[i-1], edges[i]); band 0 starts at DC and the last
/// band ends at fs/2. Each band is a zero-phase highpass/lowpass Butterworth
/// cascade, so its effective (real, non-negative) response is
///   gains[i] * |HP_i(f)|^2 |LP_i(f)|^2.
/// The gains flatten the composite sum over [edges.front(), edges.back()].
/// With no edges the bank is a single all-pass band.
class FilterBank {
 public:
  std::size_t bands() const noexcept { return edges_.size() + 1; }
  const std::vector<double>& edges() const noexcept { return edges_; }
  const std::vector<double>& gains() const noexcept { return gains_; }
  int order() const noexcept { return order_; }
  double sample_rate() const noexcept { return fs_; }

  /// Arithmetic mean of (0, f1) for band 0, geometric mean of the edges
  /// otherwise (fs/2 closes the top band).
  double center(std::size_t band) const;
  std::vector<double> centers() const;

  /// Effective response of one band (gain included).
  double band_response(std::size_t band, double f) const;
  /// Sum of band responses.
  double composite(double f) const;

  /// In-place zero-phase filtering by band `band`, gain included. No edge
  /// handling; callers pad.
  void apply(std::size_t band, std::span<double> x) const;

  /// Samples of warm-up needed on each side of a segment so the zero-phase
  /// output is stationary there (20 time constants of the slowest pole).
  std::size_t padding() const noexcept { return padding_; }

 private:
  friend FilterBank design_filter_bank(std::vector<double> edges, int order, double sample_rate);

  std::vector<double> edges_;
  std::vector<double> gains_;
  std::vector<SosFilter> cascade_;  // highpass then lowpass sections of each band
  int order_ = 4;
  double fs_ = 16000.0;
  std::size_t padding_ = 0;
};

/// Throws DomainError for non-ascending edges, edges outside (0, fs/2) or
/// order < 1.
FilterBank design_filter_bank(std::vector<double> edges, int order, double sample_rate);

/// `bands` bands with log-spaced edges from 50 Hz to 0.45 fs.
FilterBank default_filter_bank(double sample_rate, std::size_t bands = 16, int order = 4);

/// Duration [s] at which e^{-alpha t / 2} drops below 1e-4, capped at 10 s.
double auto_duration(double alpha);
constexpr double kMaxRirSeconds = 10.0;
/// ceil(seconds * fs), at least 1.
std::size_t samples_for_duration(double seconds, double sample_rate);

/// h[n] = sqrt(b) eps[n] exp(-alpha n dt / 2), n < ceil(duration fs).
ImpulseResponse simple_polack(double b, double alpha, double duration, double sample_rate,
                              std::uint64_t seed);

struct GeneralizedOptions {
  /// <= 0: auto_duration(alpha_min), with each band additionally cut where
  /// its own envelope falls below 1e-4.
  double duration = 0.0;
  /// One noise stream per band (derived seeds) instead of the shared one.
  bool independent_noise = false;
};

/// h[t] = sum_i sqrt(B(f_i)) (eps * phi_i)[t] exp(-alpha(f_i) t / 2) with a
/// single white noise eps shared by all bands.
ImpulseResponse generalized_polack(const FrequencyProfile& profile, const FilterBank& bank,
                                   double sample_rate, std::uint64_t seed,
                                   const GeneralizedOptions& opts = {});

/// Length of the response generalized_polack returns (seed independent).
std::size_t generalized_length(const FrequencyProfile& profile, const FilterBank& bank, double sample_rate,
                               const GeneralizedOptions& opts = {});

/// Full linear convolution (length |s| + |h| - 1) through FFTs of that
/// exact length.
Signal convolve(const Signal& s, const ImpulseResponse& h);
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

enum class TestSignalKind { HarmonicChirp, AmTones, White };

/// Unit-RMS deterministic dry signal.
Signal synth_test_signal(TestSignalKind kind, double duration, double sample_rate, std::uint64_t seed);

}  // namespace revphase
