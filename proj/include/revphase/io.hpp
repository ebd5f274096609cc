#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "revphase/spectral.hpp"

namespace revphase {

namespace fs = std::filesystem;

/// Mono 32-bit IEEE float WAV. Throws IoError with the path on failure.
void write_wav(const fs::path& path, std::span<const double> samples, double sample_rate);

struct WavData {
  std::vector<double> samples;
  double sample_rate = 0.0;
};
/// Reads what write_wav writes (mono float32; 16-bit PCM also accepted).
WavData read_wav(const fs::path& path);

/// `<base>.json` (header, plus payload file name and sample count) and
/// `<base>.f32` (little-endian float32).
void write_raw_f32(const fs::path& base, std::span<const double> samples, nlohmann::json header);
std::vector<float> read_raw_f32(const fs::path& payload);
/// Interleaved (re, im) payload, header carries frames/bins/STFT config.
void write_spectrogram(const fs::path& base, const Spectrogram& spec, nlohmann::json header = {});

/// "%.9g".
std::string fmt9(double v);

/// Header row, then rows of numbers formatted with fmt9 (strings verbatim).
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, std::initializer_list<std::string_view> header);
  CsvWriter(const fs::path& path, const std::vector<std::string>& header);
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  /// Mixed row: every cell already formatted.
  void raw_row(const std::vector<std::string>& cells);

 private:
  fs::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

/// Pretty-printed with a trailing newline.
void write_json(const fs::path& path, const nlohmann::json& j);
nlohmann::json read_json(const fs::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
/// 16 hex digits of fnv1a64 over the compact dump (keys sorted).
std::string config_digest(const nlohmann::json& config);

void ensure_directory(const fs::path& dir);

}  // namespace revphase
