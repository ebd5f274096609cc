#include "revphase/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "revphase/errors.hpp"
#include "revphase/quadrature.hpp"
#include "revphase/seeding.hpp"

namespace revphase {

namespace {

const double kSixLn10 = 6.0 * std::numbers::ln10;

double interpolate(const std::vector<Knot>& knots, double f) {
  if (f <= knots.front().f) return knots.front().value;
  if (f >= knots.back().f) return knots.back().value;
  auto hi = std::upper_bound(knots.begin(), knots.end(), f,
                             [](double x, const Knot& k) { return x < k.f; });
  auto lo = hi - 1;
  const double w = (f - lo->f) / (hi->f - lo->f);
  return lo->value + w * (hi->value - lo->value);
}

void check_knots(const std::vector<Knot>& knots, const char* name) {
  if (knots.empty()) throw_domain(std::string("tabulated profile: no knots for ") + name);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].f) || !std::isfinite(knots[i].value) || knots[i].f < 0.0)
      throw_domain(std::string("tabulated profile: invalid knot for ") + name);
    if (i > 0 && !(knots[i].f > knots[i - 1].f))
      throw_domain(std::string("tabulated profile: knots must be strictly ascending for ") + name);
  }
}

nlohmann::json knots_json(const std::vector<Knot>& knots) {
  auto arr = nlohmann::json::array();
  for (const auto& k : knots) arr.push_back({k.f, k.value});
  return arr;
}

std::vector<Knot> knots_from_json(const nlohmann::json& j) {
  std::vector<Knot> out;
  for (const auto& e : j) out.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return out;
}

nlohmann::json ar_json(const ArSpectrum& s) {
  auto poles = nlohmann::json::array();
  for (const auto& p : s.poles) poles.push_back({p.real(), p.imag()});
  return {{"poles", poles}, {"scale", s.scale}};
}

ArSpectrum ar_from_json(const nlohmann::json& j) {
  ArSpectrum s;
  s.scale = j.at("scale").get<double>();
  for (const auto& p : j.at("poles")) s.poles.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return s;
}

}  // namespace

double rt60_to_alpha(double rt60) {
  if (!(rt60 > 0.0) || !std::isfinite(rt60)) throw_domain("rt60 must be positive and finite");
  return kSixLn10 / rt60;
}

double alpha_to_rt60(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw_domain("alpha must be positive and finite");
  return kSixLn10 / alpha;
}

double ArSpectrum::operator()(double f, double nyquist) const {
  const double theta = std::numbers::pi * std::abs(f) / nyquist;
  const std::complex<double> z = std::polar(1.0, theta);
  double denom = 1.0;
  for (const auto& p : poles) denom *= std::norm(z - p);
  return scale / denom;
}

FrequencyProfile FrequencyProfile::constant(double alpha, double b, double nyquist) {
  FrequencyProfile p;
  p.kind_ = ProfileKind::Constant;
  p.alpha_const_ = alpha;
  p.b_const_ = b;
  p.nyquist_ = nyquist;
  p.validate();
  return p;
}

FrequencyProfile FrequencyProfile::tabulated(std::vector<Knot> alpha, std::vector<Knot> b,
                                             double nyquist) {
  FrequencyProfile p;
  p.kind_ = ProfileKind::Tabulated;
  p.alpha_knots_ = std::move(alpha);
  p.b_knots_ = std::move(b);
  p.nyquist_ = nyquist;
  p.validate();
  return p;
}

FrequencyProfile FrequencyProfile::autoregressive(ArSpectrum alpha, ArSpectrum b, double nyquist) {
  FrequencyProfile p;
  p.kind_ = ProfileKind::AutoRegressive;
  p.alpha_ar_ = std::move(alpha);
  p.b_ar_ = std::move(b);
  p.nyquist_ = nyquist;
  p.validate();
  return p;
}

void FrequencyProfile::validate() const {
  if (!(nyquist_ > 0.0) || !std::isfinite(nyquist_)) throw_domain("profile nyquist must be positive");
  switch (kind_) {
    case ProfileKind::Constant:
      if (!(alpha_const_ > 0.0) || !std::isfinite(alpha_const_)) throw_domain("profile alpha must be > 0");
      if (!(b_const_ >= 0.0) || !std::isfinite(b_const_)) throw_domain("profile B must be >= 0");
      break;
    case ProfileKind::Tabulated:
      check_knots(alpha_knots_, "alpha");
      check_knots(b_knots_, "B");
      for (const auto& k : alpha_knots_)
        if (!(k.value > 0.0)) throw_domain("tabulated alpha must be > 0");
      for (const auto& k : b_knots_)
        if (!(k.value >= 0.0)) throw_domain("tabulated B must be >= 0");
      break;
    case ProfileKind::AutoRegressive:
      if (!(alpha_ar_.scale > 0.0)) throw_domain("AR alpha scale must be > 0");
      if (!(b_ar_.scale >= 0.0)) throw_domain("AR B scale must be >= 0");
      for (const auto* s : {&alpha_ar_, &b_ar_})
        for (const auto& pole : s->poles)
          if (!(std::abs(pole) < 1.0)) throw_domain("AR poles must lie inside the unit disk");
      break;
  }
}

void FrequencyProfile::check_frequency(double f) const {
  if (!(std::abs(f) <= nyquist_)) throw_domain("frequency outside [-nyquist, nyquist]");
}

double FrequencyProfile::alpha(double f) const {
  check_frequency(f);
  const double af = std::abs(f);
  switch (kind_) {
    case ProfileKind::Constant: return alpha_const_;
    case ProfileKind::Tabulated: return interpolate(alpha_knots_, af);
    case ProfileKind::AutoRegressive: return alpha_ar_(af, nyquist_);
  }
  return 0.0;
}

double FrequencyProfile::b(double f) const {
  check_frequency(f);
  const double af = std::abs(f);
  switch (kind_) {
    case ProfileKind::Constant: return b_const_;
    case ProfileKind::Tabulated: return interpolate(b_knots_, af);
    case ProfileKind::AutoRegressive: return b_ar_(af, nyquist_);
  }
  return 0.0;
}

double FrequencyProfile::alpha_min() const {
  switch (kind_) {
    case ProfileKind::Constant: return alpha_const_;
    case ProfileKind::Tabulated: {
      double m = alpha_knots_.front().value;
      for (const auto& k : alpha_knots_) m = std::min(m, k.value);
      return m;
    }
    case ProfileKind::AutoRegressive: {
      constexpr int kGrid = 8192;
      double m = alpha_ar_(0.0, nyquist_);
      for (int i = 1; i <= kGrid; ++i) m = std::min(m, alpha_ar_(nyquist_ * i / kGrid, nyquist_));
      return m;
    }
  }
  return 0.0;
}

FrequencyProfile FrequencyProfile::with_b_scaled(double factor) const {
  FrequencyProfile p = *this;
  p.b_const_ *= factor;
  for (auto& k : p.b_knots_) k.value *= factor;
  p.b_ar_.scale *= factor;
  p.validate();
  return p;
}

FrequencyProfile FrequencyProfile::with_nyquist(double nyquist) const {
  if (kind_ != ProfileKind::Constant) throw_config("only constant profiles can change nyquist");
  return constant(alpha_const_, b_const_, nyquist);
}

nlohmann::json FrequencyProfile::to_json() const {
  nlohmann::json j;
  j["nyquist_hz"] = nyquist_;
  switch (kind_) {
    case ProfileKind::Constant:
      j["kind"] = "constant";
      j["alpha"] = alpha_const_;
      j["b"] = b_const_;
      break;
    case ProfileKind::Tabulated:
      j["kind"] = "tabulated";
      j["alpha"] = knots_json(alpha_knots_);
      j["b"] = knots_json(b_knots_);
      break;
    case ProfileKind::AutoRegressive:
      j["kind"] = "ar";
      j["alpha"] = ar_json(alpha_ar_);
      j["b"] = ar_json(b_ar_);
      break;
  }
  return j;
}

FrequencyProfile FrequencyProfile::from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  const double nyq = j.at("nyquist_hz").get<double>();
  if (kind == "constant") return constant(j.at("alpha").get<double>(), j.at("b").get<double>(), nyq);
  if (kind == "tabulated") return tabulated(knots_from_json(j.at("alpha")), knots_from_json(j.at("b")), nyq);
  if (kind == "ar") return autoregressive(ar_from_json(j.at("alpha")), ar_from_json(j.at("b")), nyq);
  throw_config("unknown profile kind '" + kind + "'");
}

ProfileSample eval_profile(const FrequencyProfile& p, double f) { return p.eval(f); }

std::vector<std::complex<double>> draw_ar_poles(int order, double radius_max, std::uint64_t seed) {
  if (order < 0) throw_domain("AR order must be >= 0");
  if (!(radius_max > 0.0 && radius_max < 1.0)) throw_domain("pole radius must lie in (0, 1)");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::complex<double>> poles;
  poles.reserve(static_cast<std::size_t>(order));
  for (int k = 0; k < order / 2; ++k) {
    const double r = radius_max * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const auto p = std::polar(r, theta);
    poles.push_back(p);
    poles.push_back(std::conj(p));
  }
  if (order % 2 == 1) poles.emplace_back(radius_max * (2.0 * unit(rng) - 1.0), 0.0);
  return poles;
}

double ar_spectrum_mean(const ArSpectrum& s, double nyquist) {
  const double integral = quad::gauss_panels([&](double f) { return s(f, nyquist); }, 0.0, nyquist, 256);
  return integral / nyquist;
}

FrequencyProfile sample_ar_profile(const ArProfileSpec& spec, double nyquist) {
  if (!(spec.target_mean_alpha > 0.0)) throw_domain("target mean alpha must be > 0");
  if (!(spec.target_mean_b >= 0.0)) throw_domain("target mean B must be >= 0");
  if (!(nyquist > 0.0)) throw_domain("nyquist must be > 0");
  auto build = [&](std::uint64_t sub, double target) {
    ArSpectrum s;
    s.poles = draw_ar_poles(spec.order, spec.pole_radius_max, derive_seed(spec.seed, sub));
    s.scale = 1.0;
    s.scale = target / ar_spectrum_mean(s, nyquist);
    return s;
  };
  return FrequencyProfile::autoregressive(build(0, spec.target_mean_alpha), build(1, spec.target_mean_b),
                                          nyquist);
}

}  // namespace revphase
