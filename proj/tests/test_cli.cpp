#include <doctest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("nhtopo_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const auto err_path = scratch() / "stderr.txt";
  const std::string cmd = std::string(NHTOPO_CLI) + " " + args + " 2>" + err_path.string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

json last_json_line(const std::string& s) {
  auto end = s.find_last_not_of('\n');
  auto start = s.rfind('\n', end);
  return json::parse(s.substr(start == std::string::npos ? 0 : start + 1, end + 1 - (start == std::string::npos ? 0 : start + 1)));
}

}  // namespace

TEST_CASE("bands writes one row per k point and branch") {
  auto r = run("bands --model ssh --t 1 --tp 1 --delta 0.3 --n 64");
  REQUIRE(r.code == 0);
  CHECK(lines(r.out) == 1 + 2 * 64);
  CHECK(r.out.rfind("k,eR,eI,sigma,branch\n", 0) == 0);

  r = run("bands --model chern --t 1 --m 1 --gamma 0.5 --n 16");
  REQUIRE(r.code == 0);
  CHECK(lines(r.out) == 1 + 2 * 16 * 16);
  CHECK(r.out.rfind("kx,ky,eR,eI,sigma,branch\n", 0) == 0);

  r = run("bands --model ssh --t 1 --tp 1 --delta 0.3 --n 16 --format json");
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["rows"].size() == 32);
  CHECK(doc["columns"].size() == 5);
}

TEST_CASE("output is byte-identical across runs and thread counts") {
  const auto a = run("bands --model chern --t 1 --m 2 --gamma 0.7 --n 32");
  const auto b = run("bands --model chern --t 1 --m 2 --gamma 0.7 --n 32");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);

  const std::string scan = "scan --model ssh --tp 1 --axis1 t:-2:2:17 --axis2 delta:-1:1:17 --n 256 --format json";
  const auto p = scratch();
  CHECK(run(scan + " --threads 1 -o " + (p / "s1.json").string()).code == 0);
  CHECK(run(scan + " --threads 3 -o " + (p / "s3.json").string()).code == 0);
  CHECK(slurp(p / "s1.json") == slurp(p / "s3.json"));
}

TEST_CASE("usage errors exit 2 with a JSON message") {
  for (const char* args : {"bands --model ssh --t 1 --tp 1",                    // missing delta
                           "bands --model ssh --t 1 --tp 1 --delta 0 --gamma 1",  // foreign parameter
                           "bands --model kagome --t 1",                          // unknown model
                           "bands --model ssh --t 1 --tp 1 --delta 0 --n 8",      // grid too small
                           "bands --model ssh --t 1 --tp 1 --delta 0 --format xml",
                           "length --model chern --t 1 --m 1",
                           "scan --model ssh --axis1 t:1:0:20",
                           "scan --model ssh --axis1 t:0:1:20 --axis2 t:0:1:20",
                           "scan --model chern --axis1 tp:0:1:20",
                           "bands --model ssh --t abc --tp 1 --delta 0",
                           "frobnicate"}) {
    CAPTURE(args);
    const auto r = run(args);
    CHECK(r.code == 2);
    if (r.err.find('{') != std::string::npos) {
      const auto j = last_json_line(r.err);
      CHECK(j["exit_code"] == 2);
      CHECK(j["error"] == "usage");
    }
  }
}

TEST_CASE("domain errors exit 3") {
  // Gap closes at (pi, pi): the Chern number is undefined.
  auto r = run("invariants --model chern --t 1 --m 2 --gamma 0");
  CHECK(r.code == 3);
  CHECK(last_json_line(r.err)["error"] == "domain");

  // Winding at an exceptional point.
  r = run("invariants --model ssh --t 1 --tp 1 --delta 0");
  CHECK(r.code == 3);
}

TEST_CASE("I/O errors exit 4") {
  auto r = run("bands --model ssh --t 1 --tp 1 --delta 0 --n 16 -o /nonexistent/dir/x.csv");
  CHECK(r.code == 4);
  CHECK(last_json_line(r.err)["error"] == "io");

  r = run("invariants --model chern --t 1 --m 3 --gamma 0.5 --loop /nonexistent/loop.txt");
  CHECK(r.code == 4);

  r = run("bands --config /nonexistent/cfg.txt");
  CHECK(r.code == 4);
}

TEST_CASE("config file values are overridden by flags") {
  const auto cfg = scratch() / "cfg.txt";
  {
    std::ofstream os(cfg);
    os << "# ssh point\nmodel = ssh\nt = 1\ntp = 1\ndelta = 0.3\nn = 64\n";
  }
  auto from_file = run("length --config " + cfg.string());
  REQUIRE(from_file.code == 0);
  auto flagged = run("length --config " + cfg.string() + " --delta 0");
  REQUIRE(flagged.code == 0);
  const auto a = json::parse(from_file.out), b = json::parse(flagged.out);
  CHECK(a["params"]["delta"] == 0.3);
  CHECK(b["params"]["delta"] == 0.0);
  CHECK(b["length"].get<double>() == doctest::Approx(4.0).epsilon(1e-9));

  {
    std::ofstream os(cfg);
    os << "model = ssh\ncolour = blue\n";
  }
  CHECK(run("length --config " + cfg.string()).code == 2);
}

TEST_CASE("length reports the analytic SSH value and 2D structure") {
  // Real spectrum |t + t' e^{ik}| traced out and back: 2 (t + t' - |t - t'|).
  auto r = run("length --model ssh --t 2.5 --tp 1 --delta 0");
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["length"].get<double>() == doctest::Approx(4.0).epsilon(1e-9));
  r = run("length --model ssh --t 0.5 --tp 2 --delta 0");
  CHECK(json::parse(r.out)["length"].get<double>() == doctest::Approx(2.0).epsilon(1e-9));

  r = run("length --model chern --t 1 --m 3 --gamma 0 --n 64");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["degenerate_1d"] == true);
  CHECK(j["regions"] == 2);
  CHECK(j["length"].get<double>() == doctest::Approx(16.0).epsilon(1e-3));

  const auto out = scratch() / "boundary.csv";
  r = run("length --model chern --t 1 --m 3 --gamma 0.5 --n 64 -o " + out.string());
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["regions"] == 2);
  CHECK(lines(slurp(out)) > 10);
}

TEST_CASE("invariants and jacobian subcommands") {
  auto r = run("invariants --model ssh --t 1.5 --tp 1 --delta 0.2");
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["winding"].get<double>() == doctest::Approx(0.0));
  CHECK(j["reference_phase"].is_string());

  r = run("invariants --model chern --t 1 --m 1 --gamma 0 --n 32");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(std::abs(j["chern"].get<int>()) == 1);

  const auto loop = scratch() / "loop.txt";
  {
    std::ofstream os(loop);
    for (int i = 0; i < 64; ++i) {
      const double a = 2.0 * 3.141592653589793 * i / 64;
      os << 0.3 * std::cos(a) << "," << 0.3 * std::sin(a) << "\n";
    }
  }
  r = run("invariants --model chern --t 1 --m 3 --gamma 0.5 --loop " + loop.string());
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["loop_points"] == 64);

  const auto locus = scratch() / "locus.csv";
  r = run("jacobian --model chern --t 1 --m 0 --gamma 1 --n 128 -o " + locus.string());
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["zero_points"].get<int>() > 0);
  CHECK(slurp(locus).rfind("kx,ky,det,eR,eI\n", 0) == 0);
}

TEST_CASE("scan summary and JSON document") {
  const auto out = scratch() / "scan.json";
  auto r = run("scan --model ssh --tp 1 --axis1 t:-2:2:21 --axis2 delta:-1:1:1 --n 256 --format json -o " +
               out.string());
  REQUIRE(r.code == 0);
  const auto summary = last_json_line(r.out);
  CHECK(summary["schema_version"] == 1);
  CHECK(summary["missed"] == 0);
  const auto doc = json::parse(slurp(out));
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["values"].size() == 21);
  CHECK(doc["comparison"].contains("max_distance"));

  r = run("scan --model ssh --tp 1 --axis1 t:-2:2:21 --axis2 delta:0:0:1 --n 256");
  REQUIRE(r.code == 0);
  CHECK(lines(r.out) == 1 + 21);
  CHECK(r.out.rfind("t,delta,length,flag,class\n", 0) == 0);
}
