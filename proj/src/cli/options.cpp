#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "revphase/cli.hpp"
#include "revphase/errors.hpp"
#include "revphase/io.hpp"

namespace revphase::cli {

namespace {

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_kv(const std::string& body, const std::string& what) {
  KeyValues kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw_config(what + ": expected key=value, got '" + item + "'");
    auto key = item.substr(0, eq);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!kv.emplace(key, item.substr(eq + 1)).second) throw_config(what + ": duplicate key '" + key + "'");
  }
  return kv;
}

double number(const KeyValues& kv, const std::string& key, const std::string& what) {
  const auto& s = kv.at(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw_config(what + ": '" + key + "' is not a number: '" + s + "'");
  }
}

void only_keys(const KeyValues& kv, std::initializer_list<const char*> allowed, const std::string& what) {
  for (const auto& [k, v] : kv)
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw_config(what + ": unknown key '" + k + "'");
}

const std::vector<std::string> kDefaultFormats{"csv", "json"};
const std::vector<std::string> kSynthFormats{"wav", "json"};

}  // namespace

std::vector<std::string> RunConfig::effective_formats() const {
  if (!formats.empty()) return formats;
  return command == "synth" ? kSynthFormats : kDefaultFormats;
}

bool RunConfig::wants(const std::string& format) const {
  const auto f = effective_formats();
  return std::find(f.begin(), f.end(), format) != f.end();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  j["fs"] = fs;
  j["n"] = n ? nlohmann::json(*n) : nlohmann::json(nullptr);
  j["profile"] = profile;
  j["rt60"] = rt60 ? nlohmann::json(*rt60) : nlohmann::json(nullptr);
  j["bands"] = bands;
  j["order"] = order;
  j["model"] = model;
  j["independent_noise"] = independent_noise;
  j["duration"] = duration ? nlohmann::json(*duration) : nlohmann::json(nullptr);
  j["formats"] = effective_formats();
  j["freqs"] = freqs;
  j["f"] = f;
  j["xi_bw"] = xi_bw;
  j["significance"] = significance;
  j["window"] = window;
  j["hop"] = hop;
  j["signal"] = signal;
  j["trials"] = trials;
  j["whiteness"] = whiteness;
  // The output directory is deliberately left out so that runs into
  // different directories produce identical files.
  return j;
}

FrequencyProfile parse_profile(const std::string& spec, double fs, std::optional<double> rt60) {
  const double nyq = 0.5 * fs;
  if (spec.rfind("const:", 0) == 0) {
    const std::string what = "profile '" + spec + "'";
    const auto kv = parse_kv(spec.substr(6), what);
    only_keys(kv, {"alpha", "rt60", "b"}, what);
    const bool has_alpha = kv.count("alpha") > 0, has_rt60 = kv.count("rt60") > 0;
    if (has_alpha + has_rt60 + rt60.has_value() > 1)
      throw_config(what + ": alpha and RT60 specified together; give exactly one");
    double alpha;
    if (has_alpha) alpha = number(kv, "alpha", what);
    else if (has_rt60) alpha = rt60_to_alpha(number(kv, "rt60", what));
    else if (rt60) alpha = rt60_to_alpha(*rt60);
    else throw_config(what + ": needs alpha or rt60");
    const double b = kv.count("b") ? number(kv, "b", what) : 1.0;
    return FrequencyProfile::constant(alpha, b, nyq);
  }
  if (spec.rfind("ar:", 0) == 0) {
    const std::string what = "profile '" + spec + "'";
    const auto kv = parse_kv(spec.substr(3), what);
    only_keys(kv, {"order", "seed", "radius", "alpha_mean", "rt60", "b_mean"}, what);
    ArProfileSpec ar;
    ar.seed = 1;
    if (kv.count("order")) ar.order = static_cast<int>(number(kv, "order", what));
    if (kv.count("seed")) {
      try {
        ar.seed = std::stoull(kv.at("seed"));
      } catch (const std::exception&) {
        throw_config(what + ": seed must be an unsigned integer");
      }
    }
    if (kv.count("radius")) ar.pole_radius_max = number(kv, "radius", what);
    const int alpha_specs = static_cast<int>(kv.count("alpha_mean") + kv.count("rt60")) + (rt60 ? 1 : 0);
    if (alpha_specs > 1) throw_config(what + ": mean alpha and RT60 specified together; give exactly one");
    if (kv.count("alpha_mean")) ar.target_mean_alpha = number(kv, "alpha_mean", what);
    if (kv.count("rt60")) ar.target_mean_alpha = rt60_to_alpha(number(kv, "rt60", what));
    if (rt60) ar.target_mean_alpha = rt60_to_alpha(*rt60);
    if (kv.count("b_mean")) ar.target_mean_b = number(kv, "b_mean", what);
    return sample_ar_profile(ar, nyq);
  }
  if (!std::filesystem::exists(spec))
    throw_config("profile '" + spec + "' is neither const:..., ar:... nor an existing JSON file");
  if (rt60) throw_config("--rt60 cannot be combined with a profile file");
  FrequencyProfile p = [&] {
    try {
      return FrequencyProfile::from_json(read_json(spec));
    } catch (const nlohmann::json::exception& e) {
      throw_config("profile file " + spec + ": " + e.what());
    }
  }();
  if (std::abs(p.nyquist() - nyq) > 1e-9 * nyq)
    throw_config("profile file " + spec + ": nyquist_hz does not match fs/2");
  return p;
}

FilterBank make_bank(const RunConfig& cfg) { return default_filter_bank(cfg.fs, cfg.bands, cfg.order); }

namespace {

void print_error(const std::string& kind, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Generalized Polack reverberation: synthesis, moment checks, phase statistics"};
  app.set_config("--config", "", "TOML/INI file with option values (flags override it)");
  app.require_subcommand(1, 1);
  app.option_defaults()->always_capture_default();

  RunConfig cfg;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double rt60 = 0.0, duration = 0.0;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (required)");
  app.add_option("--fs", cfg.fs, "Sample rate [Hz]")->check(CLI::PositiveNumber);
  auto* n_opt = app.add_option("--n", n, "Ensemble size / number of items");
  app.add_option("--profile", cfg.profile, "const:alpha=..,B=.. | const:rt60=..,B=.. | ar:order=8,seed=.. | file.json");
  auto* rt60_opt = app.add_option("--rt60", rt60, "Reverberation time [s] (exclusive with an explicit alpha)");
  app.add_option("--bands", cfg.bands, "Filter-bank bands")->check(CLI::Range(1, 256));
  app.add_option("--order", cfg.order, "Butterworth order per band edge")->check(CLI::Range(1, 16));
  app.add_option("--model", cfg.model, "auto | simple | generalized")
      ->check(CLI::IsMember({"auto", "simple", "generalized"}));
  app.add_flag("--independent-noise", cfg.independent_noise, "One noise stream per band");
  auto* dur_opt = app.add_option("--duration", duration, "RIR duration [s] (synth) / dry signal length (loss-demo)");
  app.add_option("--out", cfg.out, "Output directory");
  app.add_option("--format", cfg.formats, "Comma-separated subset of csv,json,wav")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "wav"}));
  app.add_option("--freqs", cfg.freqs, "Comma-separated frequency grid [Hz]")->delimiter(',');
  app.add_option("--significance", cfg.significance, "Test significance level")->check(CLI::Range(0.0, 1.0));

  auto* synth = app.add_subcommand("synth", "Sample RIR(s) to WAV / raw float32 + metadata");
  auto* fig1 = app.add_subcommand("fig1", "Fourier-coefficient scatter at 10/100/1000 Hz with AR(8) profiles");
  auto* moments = app.add_subcommand("moments", "Closed-form, quadrature and empirical spectral moments");
  auto* xcorr = app.add_subcommand("xcorr", "Cross-bin autocorrelation sweep over xi");
  xcorr->add_option("--f", cfg.f, "Center frequency [Hz]");
  xcorr->add_option("--xi", cfg.xi_bw, "Lags in units of alpha(f)/2pi")->delimiter(',');
  auto* phase = app.add_subcommand("phase-test", "Phase uniformity per frequency and STFT whiteness");
  phase->add_option("--window", cfg.window, "STFT window length");
  phase->add_option("--hop", cfg.hop, "STFT hop");
  bool no_white = false;
  phase->add_flag("--no-whiteness", no_white, "Skip the STFT whiteness report");
  auto* loss = app.add_subcommand("loss-demo", "Phase substitution and loss sensitivity demo");
  loss->add_option("--signal", cfg.signal, "harmonic_chirp | am_tones | white")
      ->check(CLI::IsMember({"harmonic_chirp", "am_tones", "white"}));
  loss->add_option("--trials", cfg.trials, "Phase randomization trials")->check(CLI::Range(2, 1000000));
  loss->add_option("--window", cfg.window, "STFT window length");
  loss->add_option("--hop", cfg.hop, "STFT hop");
  for (auto* sub : {synth, fig1, moments, xcorr, phase, loss}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  if (seed_opt->count()) cfg.seed = seed;
  if (n_opt->count()) cfg.n = n;
  if (rt60_opt->count()) cfg.rt60 = rt60;
  if (dur_opt->count()) cfg.duration = duration;
  cfg.whiteness = !no_white;

  try {
    if (!cfg.seed) throw_config("--seed is required for '" + cfg.command + "'");
    if (cfg.n && *cfg.n == 0) throw_config("--n must be positive");
    std::vector<std::filesystem::path> written;
    if (cfg.command == "synth") written = cmd_synth(cfg);
    else if (cfg.command == "fig1") written = cmd_fig1(cfg);
    else if (cfg.command == "moments") written = cmd_moments(cfg);
    else if (cfg.command == "xcorr") written = cmd_xcorr(cfg);
    else if (cfg.command == "phase-test") written = cmd_phase_test(cfg);
    else written = cmd_loss_demo(cfg);
    for (const auto& p : written) std::cout << p.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    print_error("config", e.what());
    return 2;
  } catch (const IoError& e) {
    print_error("io", e.what());
    return 3;
  } catch (const DomainError& e) {
    print_error("domain", e.what());
    return 4;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
}

}  // namespace revphase::cli
