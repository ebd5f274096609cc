#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <json.hpp>

namespace revphase {

/// 6 ln(10) / rt60. Throws DomainError for rt60 <= 0.
double rt60_to_alpha(double rt60);
/// Inverse of rt60_to_alpha. Throws DomainError for alpha <= 0.
double alpha_to_rt60(double alpha);

enum class ProfileKind { Constant, Tabulated, AutoRegressive };

/// A knot (frequency [Hz], value) of a tabulated profile.
struct Knot {
  double f;
  double value;
};

/// All-pole power spectrum scale / |A(e^{i pi f / nyquist})|^2 with
/// A(z) = prod_k (1 - p_k z^-1). An empty pole list is the flat spectrum.
struct ArSpectrum {
  std::vector<std::complex<double>> poles;
  double scale = 1.0;

  double operator()(double f, double nyquist) const;
};

struct ProfileSample {
  double alpha;  // [1/s]
  double b;
};

/// The pair (alpha(f), B(f)) of the generalized Polack model. Both maps
/// are even in f; evaluation goes through |f| so the symmetry is exact.
class FrequencyProfile {
 public:
  static FrequencyProfile constant(double alpha, double b, double nyquist);
  /// Knots are (f >= 0, value); linear interpolation, clamped outside.
  static FrequencyProfile tabulated(std::vector<Knot> alpha, std::vector<Knot> b, double nyquist);
  static FrequencyProfile autoregressive(ArSpectrum alpha, ArSpectrum b, double nyquist);

  ProfileKind kind() const noexcept { return kind_; }
  double nyquist() const noexcept { return nyquist_; }

  /// Throws DomainError when |f| > nyquist.
  double alpha(double f) const;
  double b(double f) const;
  ProfileSample eval(double f) const { return {alpha(f), b(f)}; }

  /// Minimum of alpha over a dense grid of [0, nyquist] (exact for
  /// Constant and Tabulated).
  double alpha_min() const;

  /// Copy with B multiplied by `factor` (used for the B_cont = B_disc dt
  /// convention).
  FrequencyProfile with_b_scaled(double factor) const;
  /// Copy with a different nyquist; Constant profiles only.
  FrequencyProfile with_nyquist(double nyquist) const;

  const std::vector<Knot>& alpha_knots() const noexcept { return alpha_knots_; }
  const std::vector<Knot>& b_knots() const noexcept { return b_knots_; }
  const ArSpectrum& alpha_ar() const noexcept { return alpha_ar_; }
  const ArSpectrum& b_ar() const noexcept { return b_ar_; }

  nlohmann::json to_json() const;
  static FrequencyProfile from_json(const nlohmann::json& j);

 private:
  FrequencyProfile() = default;
  void check_frequency(double f) const;
  void validate() const;

  ProfileKind kind_ = ProfileKind::Constant;
  double nyquist_ = 0.0;
  double alpha_const_ = 0.0;
  double b_const_ = 0.0;
  std::vector<Knot> alpha_knots_;
  std::vector<Knot> b_knots_;
  ArSpectrum alpha_ar_;
  ArSpectrum b_ar_;
};

struct ArProfileSpec {
  int order = 8;
  double pole_radius_max = 0.95;
  double target_mean_alpha = 168.48;  // [1/s]
  double target_mean_b = 0.0029;
  std::uint64_t seed = 0;
};

/// Draws `order` poles uniformly in the disk of radius pole_radius_max
/// (conjugate pairs, one real pole for odd orders) independently for alpha
/// and B, then rescales each spectrum so its mean over [0, nyquist] hits
/// the target.
FrequencyProfile sample_ar_profile(const ArProfileSpec& spec, double nyquist);

ProfileSample eval_profile(const FrequencyProfile& p, double f);

/// Pole set drawn for one AR spectrum. Exposed for tests.
std::vector<std::complex<double>> draw_ar_poles(int order, double radius_max, std::uint64_t seed);

/// Mean of the spectrum over [0, nyquist] (256 Gauss–Legendre panels).
double ar_spectrum_mean(const ArSpectrum& s, double nyquist);

}  // namespace revphase
