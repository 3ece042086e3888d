#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result nsbf_run(std::vector<std::string> args) {
  args.insert(args.begin(), "nsbf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = nsbf::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "nsbf_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  const auto p = scratch_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

const std::string kZero = "potential = \"0\"\nb = \"pi\"\n[grid]\nn = 2001\n[coefficients]\nN = 20\n[search]\ncount = 6\n";

}  // namespace

TEST_CASE("solve prints the spectrum") {
  const auto cfg = write("zero.toml", kZero);
  const auto r = nsbf_run({"solve", cfg});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["N_star"] == 0);
  REQUIRE(j["eigenvalues"].size() == 6);
  for (int n = 0; n < 6; ++n) {
    CHECK(j["eigenvalues"][n]["index"] == n);
    CHECK(std::abs(j["eigenvalues"][n]["lambda_re"].get<double>() - (n + 1) * (n + 1)) < 1e-10);
  }
  // stage timings go to stderr
  CHECK(r.err.find("nsbf: ") != std::string::npos);

  SUBCASE("csv and file output") {
    const auto c = nsbf_run({"--csv", "solve", cfg});
    REQUIRE(c.code == 0);
    CHECK(c.out.rfind("index,lambda_re,lambda_im,omega_re,omega_im,residual\n", 0) == 0);
    const auto path = (scratch_dir() / "spectrum.csv").string();
    fs::remove(path);
    REQUIRE(nsbf_run({"--csv", "-o", path, "solve", cfg}).code == 0);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == c.out);
  }

  SUBCASE("repeat runs agree byte for byte") {
    CHECK(nsbf_run({"solve", cfg}).out == r.out);
  }
}

TEST_CASE("check prints the residual table") {
  const auto r = nsbf_run({"check", write("zero.toml", kZero)});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("N,eps1,eps2,d1,d2\n", 0) == 0);
  const auto j = json::parse(nsbf_run({"--json", "check", write("zero.toml", kZero)}).out);
  CHECK(j["N_star"] == 0);
  CHECK(j["rows"].size() == 21);
}

TEST_CASE("evaluate reproduces trigonometric solutions for q = 0") {
  const auto cfg = write("zero.toml", kZero);
  char x[32];
  std::snprintf(x, sizeof x, "%.17g", std::numbers::pi * 1000 / 2000);  // node 1000 of 2001
  const auto r = nsbf_run({"--json", "evaluate", cfg, "--omega", "2.5", "--x", x});
  REQUIRE(r.code == 0);
  const auto row = json::parse(r.out)[0];
  const double xn = row["x"].get<double>();
  CHECK(std::abs(row["c_re"].get<double>() - std::cos(2.5 * xn)) < 1e-12);
  CHECK(std::abs(row["s_re"].get<double>() - std::sin(2.5 * xn)) < 1e-12);
  CHECK(std::abs(row["s_prime_re"].get<double>() - 2.5 * std::cos(2.5 * xn)) < 1e-11);
  CHECK(std::abs(row["dc_domega_re"].get<double>() + xn * std::sin(2.5 * xn)) < 1e-10);

  const auto csv = nsbf_run({"evaluate", cfg, "--omega", "1,2", "--x", "0,3.14159265358979"});
  REQUIRE(csv.code == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 5);

  CHECK(nsbf_run({"evaluate", cfg, "--omega", "1", "--x", "1.0"}).code == 2);  // not a node
  CHECK(nsbf_run({"evaluate", cfg, "--omega", "x", "--x", "0"}).code == 2);
}

TEST_CASE("exit codes") {
  CHECK(nsbf_run({}).code == 2);
  CHECK(nsbf_run({"--help"}).code == 0);
  CHECK(nsbf_run({"solve", (scratch_dir() / "absent.toml").string()}).code == 2);
  CHECK(nsbf_run({"solve", write("bad.toml", "potential = \"exp(\"\nb = 1\n[search]\ncount = 1\n")}).code == 2);
  CHECK(nsbf_run({"solve", write("bad2.toml", "b = 1\n[search]\ncount = 1\n")}).code == 2);
  CHECK(nsbf_run({"--json", "--csv", "solve", write("zero.toml", kZero)}).code == 2);
  CHECK(nsbf_run({"benchmark", "no_such_benchmark"}).code == 2);

  // more zeros in the rectangle than allowed
  const auto crowded = write("crowded.toml", "potential = \"0\"\nb = \"pi\"\n[grid]\nn = 401\n[coefficients]\nN = 8\n"
                                             "[search]\nmode = \"complex\"\nrectangle = [0.5, 10.5, -0.3, 0.4]\n"
                                             "max_zeros = 3\n");
  CHECK(nsbf_run({"solve", crowded}).code == 3);
}

TEST_CASE("benchmark verification") {
  const auto dir = scratch_dir() / "bench";
  fs::create_directories(dir);
  auto store = [&](double lambda0) {
    const json doc = {
        {"version", 1},
        {"benchmarks",
         {{"free",
           {{"description", "q = 0"},
            {"config", {{"potential", "0"}, {"b", "pi"}, {"grid", {{"n", 2001}}}, {"coefficients", {{"N", 20}}},
                        {"search", {{"count", 4}}}}},
            {"references",
             {{{"index", 0}, {"lambda_re", lambda0}, {"lambda_im", 0.0}, {"tolerance", 1e-9},
               {"tolerance_kind", "absolute"}, {"source", "analytic"}},
              {{"index", 3}, {"lambda_re", 16.0}, {"lambda_im", 0.0}, {"tolerance", 1e-9},
               {"tolerance_kind", "absolute"}, {"source", "analytic"}}}}}}}}};
    std::ofstream(dir / "benchmarks.json") << doc.dump(1);
  };
  store(1.0);
  const auto ok = nsbf_run({"benchmark", "free", "--data-dir", dir.string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("PASS") != std::string::npos);
  const auto list = nsbf_run({"benchmark", "--list", "--data-dir", dir.string()});
  CHECK(list.code == 0);
  CHECK(list.out.find("free") != std::string::npos);

  store(1.001);
  const auto bad = nsbf_run({"benchmark", "free", "--data-dir", dir.string()});
  CHECK(bad.code == 4);
  CHECK(bad.out.find("FAIL") != std::string::npos);
  const auto bad_json = nsbf_run({"--json", "benchmark", "free", "--data-dir", dir.string()});
  CHECK(bad_json.code == 4);
  CHECK(json::parse(bad_json.out)["pass"] == false);
}
