#include "revphase/rir.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "revphase/errors.hpp"
#include "revphase/seeding.hpp"
#include "revphase/spectral.hpp"

namespace revphase {

namespace {

constexpr double kLowestEdge = 50.0;
constexpr double kTopEdgeFraction = 0.45;
constexpr std::size_t kGainGrid = 2048;
constexpr double kEnvelopeFloor = 1e-4;  // -80 dB amplitude

std::size_t samples_for(double seconds, double fs) {
  return static_cast<std::size_t>(std::ceil(seconds * fs - 1e-9));
}

// Adds scale * src[n] * exp(-alpha n / (2 fs)) to dst[n]. The envelope runs
// as a recurrence re-anchored every block.
void add_decaying(std::span<double> dst, std::span<const double> src, double scale, double alpha,
                  double fs) {
  constexpr std::size_t kBlock = 1024;
  const double step = std::exp(-alpha / (2.0 * fs));
  for (std::size_t start = 0; start < dst.size(); start += kBlock) {
    double env = scale * std::exp(-alpha * static_cast<double>(start) / (2.0 * fs));
    const std::size_t stop = std::min(dst.size(), start + kBlock);
    for (std::size_t n = start; n < stop; ++n) {
      dst[n] += src[n] * env;
      env *= step;
    }
  }
}

std::vector<double> normal_noise(Rng& rng, std::size_t n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

void normalize_rms(std::vector<double>& x) {
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double rms = std::sqrt(ss / static_cast<double>(x.size()));
  if (rms > 0.0)
    for (auto& v : x) v /= rms;
}

}  // namespace

// ---------------------------------------------------------------------------
// FilterBank

double FilterBank::center(std::size_t band) const {
  if (band >= bands()) throw_domain("band index out of range");
  const double nyq = 0.5 * fs_;
  if (edges_.empty()) return 0.5 * nyq;
  if (band == 0) return 0.5 * edges_.front();
  const double lo = edges_[band - 1];
  const double hi = band < edges_.size() ? edges_[band] : nyq;
  return std::sqrt(lo * hi);
}

std::vector<double> FilterBank::centers() const {
  std::vector<double> c(bands());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = center(i);
  return c;
}

double FilterBank::band_response(std::size_t band, double f) const {
  if (band >= bands()) throw_domain("band index out of range");
  double p = gains_[band];
  if (band >= 1) p *= butterworth_power(ButterworthKind::Highpass, order_, edges_[band - 1], fs_, f);
  if (band < edges_.size()) p *= butterworth_power(ButterworthKind::Lowpass, order_, edges_[band], fs_, f);
  return p;
}

double FilterBank::composite(double f) const {
  double c = 0.0;
  for (std::size_t i = 0; i < bands(); ++i) c += band_response(i, f);
  return c;
}

void FilterBank::apply(std::size_t band, std::span<double> x) const {
  if (band >= bands()) throw_domain("band index out of range");
  if (!cascade_[band].sections.empty()) cascade_[band].apply_zero_phase(x);
  if (gains_[band] != 1.0)
    for (auto& v : x) v *= gains_[band];
}

FilterBank design_filter_bank(std::vector<double> edges, int order, double sample_rate) {
  if (!(sample_rate > 0.0)) throw_domain("sample rate must be > 0");
  if (order < 1) throw_domain("filter order must be >= 1");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!(edges[i] > 0.0 && edges[i] < 0.5 * sample_rate)) throw_domain("filter-bank edges must lie in (0, fs/2)");
    if (i > 0 && !(edges[i] > edges[i - 1])) throw_domain("filter-bank edges must be strictly ascending");
  }
  FilterBank bank;
  bank.edges_ = std::move(edges);
  bank.order_ = order;
  bank.fs_ = sample_rate;
  bank.gains_.assign(bank.bands(), 1.0);

  double slowest = std::numeric_limits<double>::infinity();
  for (double e : bank.edges_) slowest = std::min(slowest, butterworth_slowest_decay(order, e, sample_rate));
  bank.cascade_.resize(bank.bands());
  for (std::size_t i = 0; i < bank.bands(); ++i) {
    auto& secs = bank.cascade_[i].sections;
    if (i >= 1) {
      const auto hp = design_butterworth(ButterworthKind::Highpass, order, bank.edges_[i - 1], sample_rate);
      secs.insert(secs.end(), hp.sections.begin(), hp.sections.end());
    }
    if (i < bank.edges_.size()) {
      const auto lp = design_butterworth(ButterworthKind::Lowpass, order, bank.edges_[i], sample_rate);
      secs.insert(secs.end(), lp.sections.begin(), lp.sections.end());
    }
  }
  if (!bank.edges_.empty()) bank.padding_ = static_cast<std::size_t>(std::ceil(20.0 * sample_rate / slowest));
  if (bank.edges_.empty()) return bank;

  // Fit gains so the composite is flat on a log grid over [f1, f_{N-1}]:
  // each gain is divided by the response-weighted geometric mean of the
  // composite, repeated until the log composite is flat.
  const double f1 = bank.edges_.front(), fn = bank.edges_.back();
  const std::size_t K = fn > f1 ? kGainGrid : 1;
  const std::size_t N = bank.bands();
  std::vector<double> resp(N * K);
  for (std::size_t k = 0; k < K; ++k) {
    const double f = K == 1 ? f1 : f1 * std::pow(fn / f1, static_cast<double>(k) / static_cast<double>(K - 1));
    for (std::size_t i = 0; i < N; ++i) resp[i * K + k] = bank.band_response(i, f);
  }
  std::vector<double> logc(K);
  for (int iter = 0; iter < 1000; ++iter) {
    double worst = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double c = 0.0;
      for (std::size_t i = 0; i < N; ++i) c += bank.gains_[i] * resp[i * K + k];
      logc[k] = std::log(c);
      worst = std::max(worst, std::abs(logc[k]));
    }
    if (worst < 1e-12) break;
    for (std::size_t i = 0; i < N; ++i) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        num += resp[i * K + k] * logc[k];
        den += resp[i * K + k];
      }
      if (den > 0.0) bank.gains_[i] *= std::exp(-num / den);
    }
  }
  return bank;
}

FilterBank default_filter_bank(double sample_rate, std::size_t bands, int order) {
  if (bands < 1) throw_domain("filter bank needs at least one band");
  const double lo = kLowestEdge, hi = kTopEdgeFraction * sample_rate;
  if (!(hi > lo)) throw_domain("sample rate too low for the default filter bank");
  std::vector<double> edges;
  const std::size_t ne = bands - 1;
  if (ne == 1) edges.push_back(std::sqrt(lo * hi));
  for (std::size_t i = 0; ne > 1 && i < ne; ++i)
    edges.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(ne - 1)));
  return design_filter_bank(std::move(edges), order, sample_rate);
}

// ---------------------------------------------------------------------------
// Synthesis

std::size_t samples_for_duration(double seconds, double sample_rate) {
  return std::max<std::size_t>(1, samples_for(seconds, sample_rate));
}

double auto_duration(double alpha) {
  if (!(alpha > 0.0)) throw_domain("alpha must be > 0");
  return std::min(kMaxRirSeconds, -2.0 * std::log(kEnvelopeFloor) / alpha);
}

ImpulseResponse simple_polack(double b, double alpha, double duration, double sample_rate,
                              std::uint64_t seed) {
  if (!(b >= 0.0) || !std::isfinite(b)) throw_domain("B must be >= 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw_domain("alpha must be > 0");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw_domain("duration must be > 0");
  if (!(sample_rate > 0.0)) throw_domain("sample rate must be > 0");
  ImpulseResponse h;
  h.sample_rate = sample_rate;
  const std::size_t L = std::max<std::size_t>(1, samples_for(duration, sample_rate));
  Rng rng(seed);
  const auto eps = normal_noise(rng, L);
  h.samples.assign(L, 0.0);
  add_decaying(h.samples, eps, std::sqrt(b), alpha, sample_rate);
  return h;
}

namespace {

struct BandPlan {
  std::vector<double> alpha, b;
  std::vector<std::size_t> len;
  std::size_t length = 0;  // of the response
  std::size_t noise = 0;   // longest band segment
};

BandPlan plan_bands(const FrequencyProfile& profile, const FilterBank& bank, double sample_rate,
                    const GeneralizedOptions& opts) {
  if (bank.sample_rate() != sample_rate) throw_config("filter bank and synthesis sample rates differ");
  if (std::abs(profile.nyquist() - 0.5 * sample_rate) > 1e-9 * sample_rate)
    throw_config("profile nyquist does not match fs/2");
  const std::size_t N = bank.bands();
  BandPlan plan;
  plan.alpha.resize(N);
  plan.b.resize(N);
  plan.len.resize(N);
  double alpha_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) {
    const double fc = bank.center(i);
    plan.alpha[i] = profile.alpha(fc);
    plan.b[i] = profile.b(fc);
    alpha_min = std::min(alpha_min, plan.alpha[i]);
  }
  plan.length = std::max<std::size_t>(
      1, samples_for(opts.duration > 0.0 ? opts.duration : auto_duration(alpha_min), sample_rate));
  for (std::size_t i = 0; i < N; ++i) {
    plan.len[i] = opts.duration > 0.0 ? plan.length
                                      : std::min(plan.length, samples_for(auto_duration(plan.alpha[i]), sample_rate));
    if (plan.b[i] > 0.0) plan.noise = std::max(plan.noise, plan.len[i]);
  }
  return plan;
}

}  // namespace

std::size_t generalized_length(const FrequencyProfile& profile, const FilterBank& bank, double sample_rate,
                               const GeneralizedOptions& opts) {
  return plan_bands(profile, bank, sample_rate, opts).length;
}

ImpulseResponse generalized_polack(const FrequencyProfile& profile, const FilterBank& bank,
                                   double sample_rate, std::uint64_t seed, const GeneralizedOptions& opts) {
  const auto plan = plan_bands(profile, bank, sample_rate, opts);
  ImpulseResponse h;
  h.sample_rate = sample_rate;
  h.samples.assign(plan.length, 0.0);
  const std::size_t P = bank.padding();

  std::vector<double> shared;
  if (!opts.independent_noise) {
    Rng rng(seed);
    shared = normal_noise(rng, P + plan.noise + P);
  }
  std::vector<double> buf;
  for (std::size_t i = 0; i < bank.bands(); ++i) {
    if (!(plan.b[i] > 0.0)) continue;
    const std::size_t Li = plan.len[i];
    if (opts.independent_noise) {
      Rng rng(derive_seed(seed, i + 1));
      buf = normal_noise(rng, P + Li + P);
    } else {
      buf.assign(shared.begin(), shared.begin() + static_cast<std::ptrdiff_t>(P + Li + P));
    }
    bank.apply(i, buf);
    add_decaying(std::span(h.samples).first(Li), std::span<const double>(buf).subspan(P, Li),
                 std::sqrt(plan.b[i]), plan.alpha[i], sample_rate);
  }
  return h;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t n = a.size() + b.size() - 1;
  std::vector<cplx> A(n, 0.0), B(n, 0.0);
  std::copy(a.begin(), a.end(), A.begin());
  std::copy(b.begin(), b.end(), B.begin());
  auto FA = fft(std::span<const cplx>(A));
  const auto FB = fft(std::span<const cplx>(B));
  for (std::size_t k = 0; k < n; ++k) FA[k] *= FB[k];
  return ifft_real(FA);
}

Signal convolve(const Signal& s, const ImpulseResponse& h) {
  if (s.sample_rate != h.sample_rate) throw_config("signal and impulse response sample rates differ");
  return {convolve(s.samples, h.samples), s.sample_rate};
}

Signal synth_test_signal(TestSignalKind kind, double duration, double sample_rate, std::uint64_t seed) {
  if (!(duration > 0.0)) throw_domain("duration must be > 0");
  if (!(sample_rate > 0.0)) throw_domain("sample rate must be > 0");
  const std::size_t n = std::max<std::size_t>(2, samples_for(duration, sample_rate));
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const double dt = 1.0 / sample_rate;
  Signal s{std::vector<double>(n, 0.0), sample_rate};

  switch (kind) {
    case TestSignalKind::White:
      s.samples = normal_noise(rng, n);
      break;
    case TestSignalKind::HarmonicChirp: {
      // Fundamental sweeps 110 -> 330 Hz linearly; harmonics 1/k up to 0.45 fs.
      const double f_start = 110.0, f_end = 330.0, T = static_cast<double>(n) * dt;
      std::vector<double> phase0(8);
      for (auto& p : phase0) p = two_pi * unit(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double base = two_pi * (f_start * t + 0.5 * (f_end - f_start) * t * t / T);
        const double f_inst = f_start + (f_end - f_start) * t / T;
        double v = 0.0;
        for (std::size_t k = 1; k <= phase0.size(); ++k) {
          if (static_cast<double>(k) * f_inst > kTopEdgeFraction * sample_rate) break;
          v += std::sin(static_cast<double>(k) * base + phase0[k - 1]) / static_cast<double>(k);
        }
        s.samples[i] = v;
      }
      break;
    }
    case TestSignalKind::AmTones: {
      struct Tone {
        double f, rate, phase, mod_phase;
      };
      std::vector<Tone> tones(4);
      for (auto& t : tones)
        t = {200.0 + unit(rng) * (0.3 * sample_rate - 200.0), 2.0 + 6.0 * unit(rng), two_pi * unit(rng),
             two_pi * unit(rng)};
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        double v = 0.0;
        for (const auto& tone : tones)
          v += (1.0 + 0.8 * std::sin(two_pi * tone.rate * t + tone.mod_phase)) *
               std::sin(two_pi * tone.f * t + tone.phase);
        s.samples[i] = v;
      }
      break;
    }
  }
  normalize_rms(s.samples);
  return s;
}

}  // namespace revphase
