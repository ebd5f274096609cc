#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "revphase/profiles.hpp"
#include "revphase/rir.hpp"

namespace revphase::cli {

/// Effective configuration of one invocation: flags > config file >
/// defaults. Echoed into every output's metadata.
struct RunConfig {
  std::string command;
  std::optional<std::uint64_t> seed;
  double fs = 16000.0;
  std::optional<std::size_t> n;
  std::string profile;  // "" = command default
  std::optional<double> rt60;
  std::size_t bands = 16;
  int order = 4;
  std::string model = "auto";  // auto | simple | generalized
  bool independent_noise = false;
  std::optional<double> duration;  // [s]
  std::filesystem::path out = "out";
  std::vector<std::string> formats;  // empty = command default
  std::vector<double> freqs;  // "" = command default
  double f = 1000.0;          // xcorr center
  std::vector<double> xi_bw;  // xcorr lags in units of alpha(f)/2pi
  double significance = 0.01;
  std::size_t window = 1024;
  std::size_t hop = 256;
  std::string signal = "harmonic_chirp";
  std::size_t trials = 200;
  bool whiteness = true;  // phase-test: also run the STFT whiteness report

  /// Formats in effect: the --format list, or the command default.
  std::vector<std::string> effective_formats() const;
  bool wants(const std::string& format) const;
  nlohmann::json to_json() const;
};

/// Parses "const:alpha=..,B=..", "const:rt60=..,B=..", "ar:order=..,seed=..,..."
/// or a JSON file path. `rt60` (the --rt60 flag) conflicts with an explicit
/// alpha. Throws ConfigError.
FrequencyProfile parse_profile(const std::string& spec, double fs, std::optional<double> rt60);

FilterBank make_bank(const RunConfig& cfg);

/// Exit codes: 0 ok, 2 usage/config, 3 I/O, 4 domain, 1 anything else.
/// Errors go to stderr as one JSON object.
int run(int argc, char** argv);

// Subcommands; each returns the files it wrote.
std::vector<std::filesystem::path> cmd_synth(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_fig1(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_moments(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_xcorr(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_phase_test(const RunConfig& cfg);
std::vector<std::filesystem::path> cmd_loss_demo(const RunConfig& cfg);

}  // namespace revphase::cli
