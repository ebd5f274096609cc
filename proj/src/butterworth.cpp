#include "revphase/butterworth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "revphase/errors.hpp"

namespace revphase {

namespace {

using cplx = std::complex<double>;

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

// Response of one section at z = e^{i w}.
cplx section_response(const Biquad& q, double w) {
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  return (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
}

}  // namespace

double SosFilter::power_response(double f, double fs) const {
  const double w = 2.0 * std::numbers::pi * f / fs;
  cplx h = 1.0;
  for (const auto& q : sections) h *= section_response(q, w);
  return std::norm(h);
}

namespace {

// Sample-major over the whole cascade: the per-section recurrences are
// independent chains, so consecutive sections overlap in the pipeline.
// A fixed section count keeps the state in registers.
template <std::size_t S>
void run_cascade(const Biquad* q, double* x, std::size_t n, bool reverse) {
  double s1[S] = {}, s2[S] = {};
  for (std::size_t i = 0; i < n; ++i) {
    double& v = reverse ? x[n - 1 - i] : x[i];
    double in = v;
    for (std::size_t k = 0; k < S; ++k) {
      const double out = q[k].b0 * in + s1[k];
      s1[k] = q[k].b1 * in - q[k].a1 * out + s2[k];
      s2[k] = q[k].b2 * in - q[k].a2 * out;
      in = out;
    }
    v = in;
  }
}

void run(const std::vector<Biquad>& secs, std::span<double> x, bool reverse) {
  constexpr std::size_t kChunk = 8;
  for (std::size_t first = 0; first < secs.size(); first += kChunk) {
    const Biquad* q = secs.data() + first;
    const std::size_t S = std::min(kChunk, secs.size() - first);
    switch (S) {
      case 1: run_cascade<1>(q, x.data(), x.size(), reverse); break;
      case 2: run_cascade<2>(q, x.data(), x.size(), reverse); break;
      case 3: run_cascade<3>(q, x.data(), x.size(), reverse); break;
      case 4: run_cascade<4>(q, x.data(), x.size(), reverse); break;
      case 5: run_cascade<5>(q, x.data(), x.size(), reverse); break;
      case 6: run_cascade<6>(q, x.data(), x.size(), reverse); break;
      case 7: run_cascade<7>(q, x.data(), x.size(), reverse); break;
      default: run_cascade<8>(q, x.data(), x.size(), reverse); break;
    }
  }
}

}  // namespace

void SosFilter::apply(std::span<double> x) const { run(sections, x, false); }

void SosFilter::apply_zero_phase(std::span<double> x) const {
  run(sections, x, false);
  run(sections, x, true);
}

SosFilter design_butterworth(ButterworthKind kind, int order, double cutoff, double fs) {
  if (order < 1) throw_domain("Butterworth order must be >= 1");
  if (!(fs > 0.0)) throw_domain("sample rate must be > 0");
  if (!(cutoff > 0.0 && cutoff < 0.5 * fs)) throw_domain("Butterworth cutoff must lie in (0, fs/2)");

  const double wc = 2.0 * fs * std::tan(std::numbers::pi * cutoff / fs);
  const bool low = kind == ButterworthKind::Lowpass;
  // Zeros of the digital filter: all at z = -1 (lowpass) or z = +1 (highpass).
  const double zero = low ? -1.0 : 1.0;
  // Normalization point: DC for lowpass, Nyquist for highpass.
  const double w_norm = low ? 0.0 : std::numbers::pi;

  SosFilter filt;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    cplx s = wc * std::polar(1.0, theta);
    if (!low) s = wc * wc / s;
    const cplx p = bilinear(s, fs);
    Biquad q;
    q.b0 = 1.0;
    q.b1 = -2.0 * zero;
    q.b2 = 1.0;
    q.a1 = -2.0 * p.real();
    q.a2 = std::norm(p);
    const double g = 1.0 / std::abs(section_response(q, w_norm));
    q.b0 *= g;
    q.b1 *= g;
    q.b2 *= g;
    filt.sections.push_back(q);
  }
  if (order % 2 == 1) {
    const cplx s = low ? cplx(-wc, 0.0) : cplx(-wc, 0.0);
    const double p = bilinear(s, fs).real();
    Biquad q;
    q.b0 = 1.0;
    q.b1 = -zero;
    q.a1 = -p;
    const double g = 1.0 / std::abs(section_response(q, w_norm));
    q.b0 *= g;
    q.b1 *= g;
    filt.sections.push_back(q);
  }
  return filt;
}

double butterworth_power(ButterworthKind kind, int order, double cutoff, double fs, double f) {
  const double tc = std::tan(std::numbers::pi * cutoff / fs);
  const double tf = std::tan(std::numbers::pi * std::abs(f) / fs);
  const double ratio = kind == ButterworthKind::Lowpass ? tf / tc : tc / tf;
  return 1.0 / (1.0 + std::pow(ratio, 2.0 * order));
}

double butterworth_slowest_decay(int order, double cutoff, double fs) {
  const double wc = 2.0 * fs * std::tan(std::numbers::pi * cutoff / fs);
  return wc * std::sin(std::numbers::pi / (2.0 * order));
}

}  // namespace revphase
