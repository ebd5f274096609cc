#include "revphase/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "revphase/butterworth.hpp"
#include "revphase/errors.hpp"

namespace revphase {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per (length, direction) and never destroyed.
fftw_plan plan_for(std::size_t n, int sign) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, int>, fftw_plan> plans;
  std::lock_guard lock(mu);
  auto key = std::make_pair(n, sign);
  if (auto it = plans.find(key); it != plans.end()) return it->second;
  std::vector<cplx> in(n), out(n);
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(key, p);
  return p;
}

void transform(std::vector<cplx>& in, std::vector<cplx>& out, int sign) {
  fftw_execute_dft(plan_for(in.size(), sign), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

std::vector<cplx> fft(std::span<const cplx> x) {
  std::vector<cplx> in(x.begin(), x.end()), out(x.size());
  if (x.empty()) return out;
  transform(in, out, FFTW_FORWARD);
  return out;
}

std::vector<cplx> fft(std::span<const double> x) {
  std::vector<cplx> in(x.begin(), x.end()), out(x.size());
  if (x.empty()) return out;
  transform(in, out, FFTW_FORWARD);
  return out;
}

std::vector<cplx> ifft(std::span<const cplx> X) {
  std::vector<cplx> in(X.begin(), X.end()), out(X.size());
  if (X.empty()) return out;
  transform(in, out, FFTW_BACKWARD);
  const double inv = 1.0 / static_cast<double>(X.size());
  for (auto& v : out) v *= inv;
  return out;
}

std::vector<double> ifft_real(std::span<const cplx> X) {
  const auto z = ifft(X);
  std::vector<double> out(z.size());
  std::transform(z.begin(), z.end(), out.begin(), [](cplx c) { return c.real(); });
  return out;
}

cplx goertzel_at(std::span<const double> h, double sample_rate, double f) {
  if (!(sample_rate > 0.0)) throw_domain("sample rate must be > 0");
  if (!(std::abs(f) <= 0.5 * sample_rate)) throw_domain("frequency outside [-fs/2, fs/2]");
  const double w = 2.0 * std::numbers::pi * f / sample_rate;
  // Phasor recurrence, re-anchored exactly every block to bound drift.
  constexpr std::size_t kBlock = 256;
  const cplx step = std::polar(1.0, -w);
  cplx acc = 0.0;
  for (std::size_t start = 0; start < h.size(); start += kBlock) {
    cplx ph = std::polar(1.0, -w * static_cast<double>(start));
    const std::size_t stop = std::min(h.size(), start + kBlock);
    for (std::size_t n = start; n < stop; ++n) {
      acc += h[n] * ph;
      ph *= step;
    }
  }
  return acc / sample_rate;
}

SingleFrequencyTransform::SingleFrequencyTransform(double f, double sample_rate, std::size_t max_length)
    : f_(f), dt_(1.0 / sample_rate), cos_(max_length), sin_(max_length) {
  if (!(sample_rate > 0.0)) throw_domain("sample rate must be > 0");
  if (!(std::abs(f) <= 0.5 * sample_rate)) throw_domain("frequency outside [-fs/2, fs/2]");
  const double w = 2.0 * std::numbers::pi * f / sample_rate;
  for (std::size_t n = 0; n < max_length; ++n) {
    const double arg = w * static_cast<double>(n);
    cos_[n] = std::cos(arg);
    sin_[n] = -std::sin(arg);
  }
}

cplx SingleFrequencyTransform::operator()(std::span<const double> h) const {
  if (h.size() > cos_.size()) throw_config("signal longer than the transform table");
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) {
    re += h[n] * cos_[n];
    im += h[n] * sin_[n];
  }
  return {re * dt_, im * dt_};
}

// ---------------------------------------------------------------------------

void validate(const StftConfig& cfg, bool for_inverse) {
  if (cfg.window_length < 2) throw_config("STFT window length must be >= 2");
  if (cfg.hop == 0 || cfg.hop > cfg.window_length) throw_config("STFT hop must lie in [1, window length]");
  if (!(cfg.sample_rate > 0.0)) throw_config("STFT sample rate must be > 0");
  if (!for_inverse) return;
  const auto w = make_window(cfg);
  std::vector<double> ola(cfg.hop, 0.0);
  for (std::size_t n = 0; n < w.size(); ++n) ola[n % cfg.hop] += w[n] * w[n];
  const auto [lo, hi] = std::minmax_element(ola.begin(), ola.end());
  if (!(*lo > 0.0) || (*hi - *lo) > 1e-9 * *hi)
    throw_config("STFT window/hop pair violates the overlap-add condition for the squared window");
}

std::vector<double> make_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.window_length);
  const double n = static_cast<double>(cfg.window_length);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
  return w;
}

namespace {

std::size_t frame_count(std::size_t length, const StftConfig& cfg) {
  const std::size_t padded = length + (cfg.center ? cfg.window_length : 0);
  if (padded <= cfg.window_length) return 1;
  return 1 + (padded - cfg.window_length + cfg.hop - 1) / cfg.hop;
}

}  // namespace

Spectrogram stft(std::span<const double> x, const StftConfig& cfg) {
  return stft(x, cfg, static_cast<std::size_t>(-1));
}

Spectrogram stft(std::span<const double> x, const StftConfig& cfg, std::size_t max_frames) {
  validate(cfg, false);
  const std::size_t N = cfg.window_length;
  const auto w = make_window(cfg);
  Spectrogram S;
  S.config = cfg;
  S.signal_length = x.size();
  S.bins = cfg.bins();
  S.frames = std::min(frame_count(x.size(), cfg), max_frames);
  S.data.assign(S.frames * S.bins, cplx(0.0));
  const std::ptrdiff_t off = cfg.center ? static_cast<std::ptrdiff_t>(N / 2) : 0;
  std::vector<cplx> buf(N), out(N);
  for (std::size_t m = 0; m < S.frames; ++m) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(m * cfg.hop) - off;
    for (std::size_t n = 0; n < N; ++n) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(n);
      const double v = (idx >= 0 && idx < static_cast<std::ptrdiff_t>(x.size())) ? x[idx] : 0.0;
      buf[n] = w[n] * v;
    }
    transform(buf, out, FFTW_FORWARD);
    std::copy_n(out.begin(), S.bins, S.data.begin() + static_cast<std::ptrdiff_t>(m * S.bins));
  }
  return S;
}

std::vector<double> istft(const Spectrogram& spec) {
  const auto& cfg = spec.config;
  validate(cfg, true);
  const std::size_t N = cfg.window_length;
  if (spec.bins != cfg.bins()) throw_config("spectrogram bin count does not match its config");
  const auto w = make_window(cfg);
  const std::ptrdiff_t off = cfg.center ? static_cast<std::ptrdiff_t>(N / 2) : 0;
  const std::size_t L = spec.signal_length;
  std::vector<double> acc(L, 0.0), norm(L, 0.0);
  std::vector<cplx> full(N), time(N);
  for (std::size_t m = 0; m < spec.frames; ++m) {
    // Hermitian completion of the half spectrum.
    for (std::size_t k = 0; k < spec.bins; ++k) full[k] = spec.at(m, k);
    for (std::size_t k = spec.bins; k < N; ++k) full[k] = std::conj(full[N - k]);
    full[0] = full[0].real();
    if (N % 2 == 0) full[N / 2] = full[N / 2].real();
    transform(full, time, FFTW_BACKWARD);
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(m * cfg.hop) - off;
    for (std::size_t n = 0; n < N; ++n) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(n);
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(L)) continue;
      acc[idx] += w[n] * time[n].real() / static_cast<double>(N);
      norm[idx] += w[n] * w[n];
    }
  }
  for (std::size_t i = 0; i < L; ++i) acc[i] = norm[i] > 1e-12 ? acc[i] / norm[i] : 0.0;
  return acc;
}

// ---------------------------------------------------------------------------

std::vector<double> iir_bandpass(std::span<const double> x, double sample_rate, double low, double high,
                                 int order) {
  if (!(low > 0.0 && low < high && high < 0.5 * sample_rate))
    throw_domain("band must satisfy 0 < low < high < fs/2");
  std::vector<double> y(x.begin(), x.end());
  design_butterworth(ButterworthKind::Highpass, order, low, sample_rate).apply(y);
  design_butterworth(ButterworthKind::Lowpass, order, high, sample_rate).apply(y);
  return y;
}

double iir_bandpass_power(double sample_rate, double low, double high, int order, double f) {
  return butterworth_power(ButterworthKind::Highpass, order, low, sample_rate, f) *
         butterworth_power(ButterworthKind::Lowpass, order, high, sample_rate, f);
}

}  // namespace revphase
