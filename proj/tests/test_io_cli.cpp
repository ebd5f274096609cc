#include <doctest.h>

#include <fstream>
#include <sstream>
#include <unistd.h>

#include "revphase/cli.hpp"
#include "revphase/errors.hpp"
#include "revphase/io.hpp"

using namespace revphase;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("revphase_unit_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "revphase");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("WAV round trip is exact at float32 precision") {
  const auto d = scratch("wav");
  std::vector<double> x{0.0, 0.25, -1.0, 1e-3, 0.123456789};
  write_wav(d / "a.wav", x, 16000.0);
  const auto w = read_wav(d / "a.wav");
  CHECK(w.sample_rate == 16000.0);
  REQUIRE(w.samples.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(w.samples[i] == static_cast<double>(static_cast<float>(x[i])));
  const auto bytes = slurp(d / "a.wav");
  CHECK(bytes.substr(0, 4) == "RIFF");
  CHECK(bytes.substr(8, 4) == "WAVE");
  CHECK_THROWS_AS(read_wav(d / "missing.wav"), IoError);
  std::ofstream(d / "junk.wav") << "not a wav";
  CHECK_THROWS_AS(read_wav(d / "junk.wav"), IoError);
}

TEST_CASE("raw float32 with JSON header") {
  const auto d = scratch("raw");
  std::vector<double> x{1.0, -2.5, 3.25};
  write_raw_f32(d / "h", x, {{"seed", 4}});
  const auto v = read_raw_f32(d / "h.f32");
  REQUIRE(v.size() == 3);
  CHECK(v[1] == -2.5f);
  const auto j = read_json(d / "h.json");
  CHECK(j["seed"] == 4);
  CHECK(fs::file_size(d / "h.f32") == 12);
}

TEST_CASE("CSV uses %.9g and checks the column count") {
  const auto d = scratch("csv");
  {
    CsvWriter w(d / "t.csv", {"a", "b"});
    w.row({1.0 / 3.0, 1e-20});
    w.raw_row({"x", fmt9(2.0)});
    CHECK_THROWS(w.row({1.0}));
  }
  CHECK(slurp(d / "t.csv").substr(0, 36) == "a,b\n0.333333333,1e-20\nx,2\n");
  CHECK(fmt9(123456789.123) == "123456789");
}

TEST_CASE("config digest ignores key order and is 16 hex digits") {
  const nlohmann::json a = {{"x", 1}, {"y", {1, 2}}};
  const nlohmann::json b = nlohmann::json::parse(R"({"y":[1,2],"x":1})");
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a).size() == 16);
  CHECK(config_digest(a) != config_digest({{"x", 2}, {"y", {1, 2}}}));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("profile strings") {
  const auto c = cli::parse_profile("const:alpha=20,B=2", 16000.0, std::nullopt);
  CHECK(c.alpha(5.0) == 20.0);
  CHECK(c.b(5.0) == 2.0);
  CHECK(cli::parse_profile("const:rt60=0.5", 16000.0, std::nullopt).alpha(0.0) ==
        doctest::Approx(rt60_to_alpha(0.5)));
  CHECK(cli::parse_profile("const:B=1", 16000.0, 0.25).alpha(0.0) == doctest::Approx(rt60_to_alpha(0.25)));
  CHECK_THROWS_AS(cli::parse_profile("const:alpha=20,rt60=0.5", 16000.0, std::nullopt), ConfigError);
  CHECK_THROWS_AS(cli::parse_profile("const:alpha=20", 16000.0, 0.5), ConfigError);
  CHECK_THROWS_AS(cli::parse_profile("const:alpha=x", 16000.0, std::nullopt), ConfigError);
  CHECK_THROWS_AS(cli::parse_profile("const:gamma=1", 16000.0, std::nullopt), ConfigError);
  CHECK_THROWS_AS(cli::parse_profile("nonsense", 16000.0, std::nullopt), ConfigError);
  const auto a = cli::parse_profile("ar:order=8,seed=529", 16000.0, std::nullopt);
  CHECK(a.kind() == ProfileKind::AutoRegressive);
  CHECK(a.nyquist() == 8000.0);

  const auto d = scratch("profile");
  write_json(d / "p.json", a.to_json());
  CHECK(cli::parse_profile((d / "p.json").string(), 16000.0, std::nullopt).alpha(100.0) == a.alpha(100.0));
  CHECK_THROWS_AS(cli::parse_profile((d / "p.json").string(), 8000.0, std::nullopt), ConfigError);
}

TEST_CASE("CLI exit codes and outputs") {
  const auto d = scratch("cli");
  CHECK(run_cli({"synth", "--out", d.string()}) == 2);  // missing seed
  CHECK(run_cli({"synth", "--seed", "1", "--bogus"}) == 2);
  CHECK(run_cli({"moments", "--seed", "1", "--profile", "const:alpha=-1", "--out", d.string()}) != 0);
  CHECK(run_cli({"moments", "--seed", "1", "--freqs", "9000", "--out", d.string()}) == 4);
  CHECK(run_cli({"synth", "--seed", "1", "--out", "/proc/forbidden/x"}) == 3);

  REQUIRE(run_cli({"moments", "--seed", "3", "--n", "50", "--freqs", "0,500", "--out", (d / "m").string()}) == 0);
  std::ifstream in(d / "m" / "moments.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "f_hz,sp2_theory,sm2_theory,c_theory,sp2_emp,sm2_emp,c_emp,z_sp2,z_sm2,z_c");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 2);
  const auto meta = read_json(d / "m" / "moments.json");
  CHECK(meta["config"]["seed"] == 3);
  CHECK(meta["config_digest"].get<std::string>().size() == 16);

  REQUIRE(run_cli({"synth", "--seed", "3", "--n", "2", "--format", "wav", "--out", (d / "s").string()}) == 0);
  CHECK(fs::exists(d / "s" / "rir_0001.wav"));
  CHECK(fs::exists(d / "s" / "synth.json"));
  CHECK_FALSE(fs::exists(d / "s" / "rir_0000.csv"));
}
