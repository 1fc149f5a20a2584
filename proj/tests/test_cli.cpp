#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

// SNIFTLE_CLI_PATH is injected by the build as the path to the built binary.

namespace {

const std::string kWorkDir = "/tmp/sniftle_cli_test";

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  const std::string out = kWorkDir + "/stdout.txt";
  const std::string err = kWorkDir + "/stderr.txt";
  const std::string cmd =
      std::string(SNIFTLE_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

std::string write_config(const std::string& name, const std::string& body) {
  const std::string path = kWorkDir + "/" + name;
  std::ofstream(path) << body;
  return path;
}

double value_of(const std::string& text, const std::string& key) {
  const std::string needle = key + " = ";
  const auto pos = text.find(needle);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + needle.size()));
}

const char* kSaddle =
    "[model]\n"
    "type = linear_saddle\n"
    "rate = 1.0\n";

}  // namespace

TEST_CASE("workdir setup") {
  REQUIRE(std::system(("mkdir -p " + kWorkDir).c_str()) == 0);
}

TEST_CASE("point on the linear saddle prints the closed-form measures") {
  const auto cfg = write_config("saddle.ini", kSaddle);
  const auto r = run_cli("point --config " + cfg + " --xi0 1 1 --t 1");
  REQUIRE(r.exit_code == 0);
  CHECK(std::abs(value_of(r.out, "ftle") - 1.0) < 1e-8);
  CHECK(std::abs(value_of(r.out, "sniftle") - 1.0) < 1e-8);
  CHECK(std::abs(value_of(r.out, "s2") - (std::exp(2.0) - 1.0) / 2.0) < 1e-5);
  CHECK(std::abs(value_of(r.out, "q2") - std::exp(2.0)) < 1e-5);
  CHECK(r.out.find("covariance_total =") != std::string::npos);
  CHECK(r.out.find("config_hash") != std::string::npos);
}

TEST_CASE("point on the zero model is exactly quiescent") {
  const auto cfg = write_config("zero.ini", "[model]\ntype = zero\n");
  const auto r = run_cli("point --config " + cfg + " --xi0 0.3 0.7 --t 2");
  REQUIRE(r.exit_code == 0);
  CHECK(value_of(r.out, "ftle") == 0.0);
  CHECK(value_of(r.out, "sniftle") == 0.0);
  CHECK(std::abs(value_of(r.out, "s2") - 2.0) < 1e-10);
}

TEST_CASE("config errors exit 2") {
  const auto bad_key = write_config("bad_key.ini", "[model]\ntype = zero\nepz = 1\n");
  CHECK(run_cli("point --config " + bad_key + " --xi0 0 0 --t 1").exit_code == 2);

  const auto bad_cov = write_config(
      "bad_cov.ini",
      "[model]\ntype = zero\n[scales]\nxi0_row_1 = 1 0\nxi0_row_2 = 0 -1\n");
  const auto r = run_cli("point --config " + bad_cov + " --xi0 0 0 --t 1");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("xi0_row") != std::string::npos);

  CHECK(run_cli("point --config /nope.ini --xi0 0 0 --t 1").exit_code == 2);

  const auto zero = write_config("zero.ini", "[model]\ntype = zero\n");
  CHECK(run_cli("point --config " + zero + " --xi0 1 2 3 --t 1").exit_code == 2);
}

TEST_CASE("scan of a 1x1 grid writes exactly one data row") {
  const auto cfg = write_config("scan1.ini",
                                std::string(kSaddle) +
                                    "[scan]\naxis_1 = 1 1 1\naxis_2 = 1 1 1\ntimes = 1\n");
  const std::string out = kWorkDir + "/scan1.txt";
  const auto r = run_cli("scan --config " + cfg + " --output " + out);
  REQUIRE(r.exit_code == 0);
  const std::string text = slurp(out);
  std::istringstream in(text);
  std::string line;
  std::size_t header = 0, columns = 0, data = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') ++header;
    else if (line[0] == 'x') ++columns;
    else ++data;
  }
  CHECK(header == 6);
  CHECK(columns == 1);
  CHECK(data == 1);
  CHECK(text.find(" ok") != std::string::npos);
}

TEST_CASE("binary scan output carries the magic bytes") {
  const auto cfg = write_config("scanb.ini",
                                std::string(kSaddle) +
                                    "[scan]\naxis_1 = 1 1 1\naxis_2 = 1 1 1\ntimes = 1\n"
                                    "[output]\nformat = binary\n");
  const std::string out = kWorkDir + "/scan1.bin";
  REQUIRE(run_cli("scan --config " + cfg + " --output " + out).exit_code == 0);
  const std::string bytes = slurp(out);
  REQUIRE(bytes.size() > 13);
  CHECK(bytes.compare(0, 5, "SNFK1") == 0);
}

TEST_CASE("unwritable output path exits 4") {
  const auto cfg = write_config("scan2.ini",
                                std::string(kSaddle) +
                                    "[scan]\naxis_1 = 1 1 1\naxis_2 = 1 1 1\ntimes = 1\n");
  const auto r = run_cli("scan --config " + cfg + " --output /nonexistent/dir/out.txt");
  CHECK(r.exit_code == 4);
  CHECK(r.err.find("cannot open output path") != std::string::npos);
}

TEST_CASE("scan output is byte-identical across worker counts") {
  const auto cfg = write_config(
      "scanw.ini",
      "[model]\ntype = double_gyre\n"
      "[integrator]\nstep = 0.005\n"
      "[scan]\naxis_1 = 0 2 5\naxis_2 = 0 1 3\ntimes = 1 2\n");
  const std::string o1 = kWorkDir + "/w1.txt", o8 = kWorkDir + "/w8.txt";
  REQUIRE(run_cli("scan --config " + cfg + " --workers 1 --output " + o1).exit_code == 0);
  REQUIRE(run_cli("scan --config " + cfg + " --workers 8 --output " + o8).exit_code == 0);
  CHECK(slurp(o1) == slurp(o8));
}

TEST_CASE("validate passes on the saddle and is bit-reproducible") {
  const auto cfg = write_config("val.ini",
                                std::string(kSaddle) +
                                    "[scales]\neps = 1e-3\ndelta = 1e-3\n"
                                    "[montecarlo]\nsamples = 5000\nem_step = 0.01\n");
  const auto r1 = run_cli("validate --config " + cfg + " --xi0 1 1 --t 1 --seed 11");
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.out.find("PASS") != std::string::npos);
  CHECK(r1.out.find("FAIL") == std::string::npos);
  CHECK(r1.out.find("# seed 11") != std::string::npos);

  const auto r2 = run_cli(
      "validate --config " + cfg + " --xi0 1 1 --t 1 --seed 11 --workers 3");
  CHECK(r2.out == r1.out);

  const auto r3 = run_cli("validate --config " + cfg + " --xi0 1 1 --t 1 --seed 12");
  CHECK(r3.out != r1.out);
}

TEST_CASE("bound-study rejects thin level sweeps with exit 2") {
  const auto cfg = write_config("study_thin.ini",
                                std::string(kSaddle) +
                                    "[study]\naxis = eps_only\nlevels = 0.1 0.01\n"
                                    "r_orders = 1\n"
                                    "[montecarlo]\nsamples = 100\n");
  const auto r = run_cli("bound-study --config " + cfg + " --xi0 1 1 --t 1");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("insufficient levels") != std::string::npos);
}

TEST_CASE("bound-study writes a slope table") {
  const auto cfg = write_config(
      "study.ini",
      "[model]\ntype = double_gyre\n"
      "[study]\naxis = eps_only\nlevels = 0.1 0.03 0.01 0.003 0.001\nr_orders = 1\n"
      "[montecarlo]\nsamples = 400\nem_step = 0.01\n"
      "[run]\nseed = 5\n");
  const std::string out = kWorkDir + "/study.txt";
  const auto r = run_cli("bound-study --config " + cfg + " --xi0 1 0.5 --t 1 --output " + out);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("r=1 slope") != std::string::npos);
  const std::string table = slurp(out);
  CHECK(table.find("scale r moment stderr") != std::string::npos);
  CHECK(table.find("# slope r=1") != std::string::npos);
}
