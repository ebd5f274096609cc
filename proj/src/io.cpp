#include "revphase/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>

#include "revphase/errors.hpp"

namespace revphase {

namespace {

static_assert(std::endian::native == std::endian::little, "payload writers assume a little-endian host");

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
  throw IoError(what + ": " + path.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) io_fail(path, "cannot open for writing");
  return out;
}

template <class T>
void put(std::ostream& o, T v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(const std::vector<char>& buf, std::size_t at) {
  T v;
  std::memcpy(&v, buf.data() + at, sizeof v);
  return v;
}

}  // namespace

void write_wav(const fs::path& path, std::span<const double> samples, double sample_rate) {
  auto out = open_out(path);
  const auto n = static_cast<std::uint32_t>(samples.size());
  const std::uint32_t data_bytes = n * 4;
  const auto rate = static_cast<std::uint32_t>(std::lround(sample_rate));
  out.write("RIFF", 4);
  put<std::uint32_t>(out, 4 + (8 + 18) + (8 + 12) + (8 + data_bytes));
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put<std::uint32_t>(out, 18);
  put<std::uint16_t>(out, 3);  // IEEE float
  put<std::uint16_t>(out, 1);
  put<std::uint32_t>(out, rate);
  put<std::uint32_t>(out, rate * 4);
  put<std::uint16_t>(out, 4);
  put<std::uint16_t>(out, 32);
  put<std::uint16_t>(out, 0);
  // non-PCM formats carry a fact chunk
  out.write("fact", 4);
  put<std::uint32_t>(out, 4);
  put<std::uint32_t>(out, n);
  put<std::uint32_t>(out, 0);
  put<std::uint32_t>(out, 0);
  out.write("data", 4);
  put<std::uint32_t>(out, data_bytes);
  for (double v : samples) put<float>(out, static_cast<float>(v));
  if (!out) io_fail(path, "write failed");
}

WavData read_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    io_fail(path, "not a RIFF/WAVE file");
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  WavData w;
  bool have_fmt = false;
  std::size_t at = 12;
  while (at + 8 <= buf.size()) {
    const std::string id(buf.data() + at, 4);
    const auto size = get<std::uint32_t>(buf, at + 4);
    const std::size_t body = at + 8;
    if (body + size > buf.size()) io_fail(path, "truncated chunk '" + id + "'");
    if (id == "fmt ") {
      format = get<std::uint16_t>(buf, body);
      channels = get<std::uint16_t>(buf, body + 2);
      rate = get<std::uint32_t>(buf, body + 4);
      bits = get<std::uint16_t>(buf, body + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) io_fail(path, "data chunk before fmt chunk");
      if (channels != 1) io_fail(path, "only mono WAV is supported");
      if (format == 3 && bits == 32) {
        w.samples.resize(size / 4);
        for (std::size_t i = 0; i < w.samples.size(); ++i) w.samples[i] = get<float>(buf, body + 4 * i);
      } else if (format == 1 && bits == 16) {
        w.samples.resize(size / 2);
        for (std::size_t i = 0; i < w.samples.size(); ++i)
          w.samples[i] = get<std::int16_t>(buf, body + 2 * i) / 32768.0;
      } else {
        io_fail(path, "unsupported WAV sample format");
      }
      w.sample_rate = rate;
      return w;
    }
    at = body + size + (size & 1);
  }
  io_fail(path, "no data chunk");
}

void write_raw_f32(const fs::path& base, std::span<const double> samples, nlohmann::json header) {
  fs::path payload = base;
  payload += ".f32";
  fs::path meta = base;
  meta += ".json";
  header["payload"] = payload.filename().string();
  header["encoding"] = "float32-le";
  header["count"] = samples.size();
  auto out = open_out(payload);
  for (double v : samples) put<float>(out, static_cast<float>(v));
  if (!out) io_fail(payload, "write failed");
  write_json(meta, header);
}

std::vector<float> read_raw_f32(const fs::path& payload) {
  std::ifstream in(payload, std::ios::binary);
  if (!in) io_fail(payload, "cannot open for reading");
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() % 4 != 0) io_fail(payload, "payload size is not a multiple of 4");
  std::vector<float> out(buf.size() / 4);
  std::memcpy(out.data(), buf.data(), buf.size());
  return out;
}

void write_spectrogram(const fs::path& base, const Spectrogram& spec, nlohmann::json header) {
  std::vector<double> inter;
  inter.reserve(spec.data.size() * 2);
  for (const auto& z : spec.data) {
    inter.push_back(z.real());
    inter.push_back(z.imag());
  }
  header["frames"] = spec.frames;
  header["bins"] = spec.bins;
  header["layout"] = "frames x bins, interleaved re/im";
  header["window_length"] = spec.config.window_length;
  header["hop"] = spec.config.hop;
  header["sample_rate"] = spec.config.sample_rate;
  header["center"] = spec.config.center;
  header["signal_length"] = spec.signal_length;
  write_raw_f32(base, inter, std::move(header));
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

CsvWriter::CsvWriter(const fs::path& path, std::initializer_list<std::string_view> header)
    : CsvWriter(path, std::vector<std::string>(header.begin(), header.end())) {}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), out_(open_out(path)), columns_(header.size()) {
  raw_row(header);
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw_config("CSV row width differs from header: " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
  if (!out_) io_fail(path_, "write failed");
}

void CsvWriter::row(std::span<const double> values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(fmt9(v));
  raw_row(cells);
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) io_fail(path, "write failed");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    io_fail(path, std::string("invalid JSON (") + e.what() + ")");
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_digest(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) io_fail(dir, "cannot create directory (" + ec.message() + ")");
}

}  // namespace revphase
