#pragma once

#include <span>
#include <vector>

namespace revphase {

/// One second-order section, transposed direct form II, a0 = 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

enum class ButterworthKind { Lowpass, Highpass };

/// Cascade of biquads (first-order sections have b2 = a2 = 0).
struct SosFilter {
  std::vector<Biquad> sections;

  /// Power response |H(e^{i 2 pi f / fs})|^2.
  double power_response(double f, double fs) const;
  void apply(std::span<double> x) const;
  /// Forward pass, then a pass over the reversed signal: zero phase,
  /// power response |H|^2. No edge padding; callers pad.
  void apply_zero_phase(std::span<double> x) const;
};

/// Bilinear-transform Butterworth design with cutoff prewarping. The
/// digital response equals the analog prototype at the warped frequency:
///   lowpass  |H|^2 = 1 / (1 + (tan(pi f/fs) / tan(pi fc/fs))^(2N))
///   highpass |H|^2 = 1 / (1 + (tan(pi fc/fs) / tan(pi f/fs))^(2N))
/// Throws DomainError for order < 1 or fc outside (0, fs/2).
SosFilter design_butterworth(ButterworthKind kind, int order, double cutoff, double fs);

/// Closed-form power response of the design above.
double butterworth_power(ButterworthKind kind, int order, double cutoff, double fs, double f);

/// Slowest pole decay rate [1/s] of an order-N Butterworth section at
/// `cutoff`; used to size filter warm-up padding.
double butterworth_slowest_decay(int order, double cutoff, double fs);

}  // namespace revphase
