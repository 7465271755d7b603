#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run hypclass(const std::string& args) {
  std::string cmd = std::string(HYPCLASS_EXE) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("hypclass_cli_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("transition prints kappa") {
  Run r = hypclass("transition rei3 --k 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("kappa") != std::string::npos);
}

TEST_CASE("json output parses as a document") {
  Run r = hypclass("classify rei2 k=3 --json --seed 5");
  CHECK(r.code == 0);
  CHECK(r.out.front() == '{');
  CHECK(r.out.find("\"seed\": 5") != std::string::npos);
}

TEST_CASE("out directory and CSV") {
  fs::path d = scratch("flow");
  Run r = hypclass("flow rei3 k=1 --csv --out " + d.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(d / "report.json"));
  CHECK(fs::exists(d / "report.txt"));
  CHECK(slurp(d / "trajectory.csv").rfind("s,t,", 0) == 0);
  fs::remove_all(d);
}

TEST_CASE("file input") {
  Run r = hypclass("transition --file " FIXTURE_DIR "/rei3_k1.sym");
  CHECK(r.code == 0);
  CHECK(r.out.find("input_digest") != std::string::npos);
}

TEST_CASE("failed check exits 1") {
  CHECK(hypclass("factorize rei3 k=1").code == 0);
  CHECK(hypclass("factorize rei3 k=1 --tol 1e-30").code == 1);
}

TEST_CASE("errors exit 2 with a kind") {
  Run bad = hypclass("--file " FIXTURE_DIR "/bad_line.sym classify");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("parse error") != std::string::npos);
  CHECK(hypclass("classify nosuch").code == 2);
  CHECK(hypclass("frobnicate rei1").code == 2);
  CHECK(hypclass("classify rei1 nokey").code == 2);
  CHECK(hypclass("classify").code == 2);
}

TEST_CASE("identical runs give identical bytes") {
  Run a = hypclass("sweep rei2 k=2 --json --seed 9");
  Run b = hypclass("sweep rei2 k=2 --json --seed 9");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}
