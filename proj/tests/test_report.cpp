#include <doctest.h>

#include "hypclass/builtins.hpp"
#include "hypclass/error.hpp"
#include "hypclass/report.hpp"

using namespace hypclass;

TEST_CASE("digest is FNV-1a") {
  CHECK(digest("") == "cbf29ce484222325");
  CHECK(digest("a") == "af63dc4c8601ec8c");
  CHECK(digest("foobar") == "85944171f73967e8");
}

TEST_CASE("tolerance pairs") {
  Json j = tv(0.5, 1e-6);
  CHECK(j["value"] == 0.5);
  CHECK(j["tol"] == 1e-6);
  CHECK(tv(1.0 / 0.0, 0.0)["value"] == "inf");
}

TEST_CASE("classify report") {
  Problem pb = builtin("rei2", {{"k", "3"}});
  Report r = run("classify", pb, RunOptions{});
  CHECK(r.ok);
  CHECK(r.doc["command"] == "classify");
  CHECK(r.doc["region"]["rng"] == "splitmix64-counter");
  CHECK(r.doc["status"] == "ok");
  CHECK(r.text().find("status") != std::string::npos);
}

TEST_CASE("reports are deterministic and seed sensitive") {
  Problem pb = builtin("rei1");
  RunOptions a;
  a.seed = 3;
  RunOptions b;
  b.seed = 4;
  CHECK(run("classify", pb, a).json() == run("classify", pb, a).json());
  CHECK(run("classify", pb, a).json() != run("classify", pb, b).json());
}

TEST_CASE("transition report of rei3") {
  Problem pb = builtin("rei3", {{"k", "1"}});
  Report r = run("transition", pb);
  CHECK(r.ok);
  CHECK(r.json().find("kappa") != std::string::npos);
}

TEST_CASE("flow report with CSV") {
  Problem pb = builtin("rei3", {{"k", "1"}});
  RunOptions o;
  o.csv = true;
  Report r = run("flow", pb, o);
  CHECK(r.ok);
  REQUIRE(r.files.size() == 1);
  CHECK(r.files[0].first == "trajectory.csv");
  CHECK(r.files[0].second.rfind("s,t,x0", 0) == 0);
}

TEST_CASE("factorize reports both outcomes") {
  Report good = run("factorize", builtin("rei3", {{"k", "2"}, {"nu", "x2^2"}}));
  CHECK(good.ok);
  CHECK(good.doc["defn_one"]["pass"] == true);
  // A failed bracket bound is a finding, not a failed run.
  Report bad = run("factorize", builtin("rei3", {{"k", "1"}}));
  CHECK(bad.ok);
  CHECK(bad.doc["defn_one"]["pass"] == false);
  RunOptions strict;
  strict.tol = 1e-30;
  CHECK_FALSE(run("factorize", builtin("rei3", {{"k", "1"}}), strict).ok);
}

TEST_CASE("unknown command") { CHECK_THROWS_AS(run("nope", builtin("rei1")), Error); }
