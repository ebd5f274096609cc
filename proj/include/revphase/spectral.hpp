#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace revphase {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// FFT
//
// Forward:  X[k] = sum_n x[n] e^{-2 i pi k n / N}
// Inverse:  x[n] = (1/N) sum_k X[k] e^{+2 i pi k n / N}
// Any length >= 1. Backed by FFTW (estimate plans, cached per length).

std::vector<cplx> fft(std::span<const cplx> x);
std::vector<cplx> fft(std::span<const double> x);
std::vector<cplx> ifft(std::span<const cplx> X);
/// Real part of the inverse transform.
std::vector<double> ifft_real(std::span<const cplx> X);

// ---------------------------------------------------------------------------
// Single-frequency transforms, under the dt convention
//   H(f) = dt * sum_n h[n] e^{-2 i pi f n dt}.

/// Direct evaluation at an arbitrary f, |f| <= fs/2 (DomainError otherwise).
cplx goertzel_at(std::span<const double> h, double sample_rate, double f);

/// Precomputed phasor table for repeated evaluation of H(f) at a fixed f
/// on signals up to `max_length` samples. Immutable after construction.
class SingleFrequencyTransform {
 public:
  SingleFrequencyTransform(double f, double sample_rate, std::size_t max_length);
  cplx operator()(std::span<const double> h) const;
  double frequency() const noexcept { return f_; }

 private:
  double f_;
  double dt_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

// ---------------------------------------------------------------------------
// STFT

enum class WindowKind { Hann };

struct StftConfig {
  WindowKind window = WindowKind::Hann;
  std::size_t window_length = 1024;
  std::size_t hop = 256;
  double sample_rate = 16000.0;
  /// Pad window_length/2 zeros on both sides so frame m is centered on
  /// sample m*hop and the whole signal is reconstructable.
  bool center = true;

  std::size_t bins() const noexcept { return window_length / 2 + 1; }
  double bin_hz() const noexcept { return sample_rate / static_cast<double>(window_length); }
};

/// Throws ConfigError for hop == 0, hop > window, window < 2, and, when
/// `for_inverse`, if the squared window does not overlap-add to a constant.
void validate(const StftConfig& cfg, bool for_inverse);

/// Periodic Hann window.
std::vector<double> make_window(const StftConfig& cfg);

/// Complex frames x bins matrix (row-major).
struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t signal_length = 0;
  StftConfig config;
  std::vector<cplx> data;

  cplx& at(std::size_t frame, std::size_t bin) { return data[frame * bins + bin]; }
  const cplx& at(std::size_t frame, std::size_t bin) const { return data[frame * bins + bin]; }
  bool same_shape(const Spectrogram& o) const noexcept { return frames == o.frames && bins == o.bins; }
};

/// X[m][k] = sum_n w[n] x[m hop + n - off] e^{-2 i pi k n / N}, off = N/2 if
/// centered. Trailing partial frames are zero-padded.
Spectrogram stft(std::span<const double> x, const StftConfig& cfg);
/// Only the first `max_frames` frames.
Spectrogram stft(std::span<const double> x, const StftConfig& cfg, std::size_t max_frames);
/// Weighted overlap-add with the analysis window, normalized by the
/// overlap-added squared window. Returns spec.signal_length samples.
std::vector<double> istft(const Spectrogram& spec);

// ---------------------------------------------------------------------------
// IIR band filtering

/// Causal Butterworth band filter: highpass at `low` cascaded with lowpass
/// at `high`, each of the given order (bilinear, prewarped).
std::vector<double> iir_bandpass(std::span<const double> x, double sample_rate, double low, double high,
                                 int order);
/// Analytic power response of iir_bandpass.
double iir_bandpass_power(double sample_rate, double low, double high, int order, double f);

}  // namespace revphase
