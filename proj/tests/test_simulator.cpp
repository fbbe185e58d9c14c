#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gridmc/parser.hpp"
#include "gridmc/simulator.hpp"

using namespace gridmc;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(GRIDMC_MODELS_DIR) + "/" + name);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("absorbing single state yields one segment of the full horizon") {
  StateSpace sp = build(parse_model("ctmc module m x:[0..0] init 0; endmodule"));
  Path p = sample_path(sp, 42.0, 7);
  REQUIRE(p.steps.size() == 1);
  CHECK(p.steps[0].sojourn == 42.0);
  CHECK(p.steps[0].transition == -1);
  CHECK(p.elapsed == 42.0);
}

TEST_CASE("same seed gives the identical path") {
  StateSpace sp = build(parse_model(slurp("tower.sm")));
  Path a = sample_path(sp, 50.0, 123);
  Path b = sample_path(sp, 50.0, 123);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].state == b.steps[i].state);
    CHECK(a.steps[i].sojourn == b.steps[i].sojourn);
    CHECK(a.steps[i].transition == b.steps[i].transition);
  }
  Path c = sample_path(sp, 50.0, 124);
  bool differs = a.steps.size() != c.steps.size();
  for (std::size_t i = 0; !differs && i < a.steps.size(); ++i)
    differs = a.steps[i].sojourn != c.steps[i].sojourn;
  CHECK(differs);
}

TEST_CASE("mean sojourn matches the exponential mean") {
  // two-state rate-1 flip chain: mean sojourn 1.0
  StateSpace sp = build(parse_model(
      "ctmc module m x:bool init true; [] x -> 1: (x'=false); [] !x -> 1: (x'=true); "
      "endmodule"));
  double total = 0;
  std::uint64_t n = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    Path p = sample_path(sp, 30.0, seed);
    for (std::size_t i = 0; i + 1 < p.steps.size(); ++i) {  // skip truncated last segment
      total += p.steps[i].sojourn;
      ++n;
    }
  }
  REQUIRE(n > 10000);
  CHECK(std::fabs(total / static_cast<double>(n) - 1.0) < 0.03);
}

TEST_CASE("sojourn times pass a KS test against Exponential(E(s))") {
  StateSpace sp = build(parse_model(slurp("tower.sm")));
  double e0 = sp.exit_rates()[sp.initial()];
  std::vector<double> sample;
  for (std::uint64_t seed = 0; sample.size() < 10000; ++seed) {
    Path p = sample_path(sp, 1.0, seed);
    if (p.steps.size() >= 2 && p.steps[0].state == sp.initial())
      sample.push_back(p.steps[0].sojourn);
  }
  std::sort(sample.begin(), sample.end());
  double dmax = 0;
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double cdf = 1.0 - std::exp(-e0 * sample[i]);
    dmax = std::max(dmax, std::fabs(cdf - static_cast<double>(i + 1) / n));
    dmax = std::max(dmax, std::fabs(cdf - static_cast<double>(i) / n));
  }
  // alpha = 0.01 critical value
  CHECK(dmax < 1.628 / std::sqrt(n));
}

TEST_CASE("self-loops are real jumps in sampled paths") {
  // single state with a self-loop: path consists of self-jumps
  StateSpace sp = build(parse_model(
      "ctmc module m x:[0..0] init 0; [ping] true -> 2: true; endmodule"));
  Path p = sample_path(sp, 10.0, 3);
  REQUIRE(p.steps.size() > 5);
  for (std::size_t i = 0; i + 1 < p.steps.size(); ++i) {
    CHECK(p.steps[i].state == 0);
    CHECK(p.steps[i].transition == 0);
  }
}

TEST_CASE("estimates are reproducible from (seed, n)") {
  ModelIR m = parse_model(slurp("tower.sm"));
  StateSpace sp = build(m);
  Property prop = parse_property("P=?[F<=2000 failure=1]", m);
  Estimate a = estimate(sp, prop, 500, 99);
  Estimate b = estimate(sp, prop, 500, 99);
  CHECK(a.value == b.value);
  REQUIRE(a.std_error.has_value());
  CHECK(*a.std_error == *b.std_error);
}

TEST_CASE("n=1 reports no standard error and an indicator value") {
  ModelIR m = parse_model(slurp("tower.sm"));
  StateSpace sp = build(m);
  Property prop = parse_property("P=?[F<=1000 failure=1]", m);
  Estimate e = estimate(sp, prop, 1, 4);
  CHECK((e.value == 0.0 || e.value == 1.0));
  CHECK_FALSE(e.std_error.has_value());
}

TEST_CASE("bounded estimates agree with numerics within 3 standard errors") {
  ModelIR m = parse_model(slurp("tower.sm"));
  StateSpace sp = build(m);
  SolverOptions opts;

  // M9-style query, scaled down so the unit test stays fast
  Property f = parse_property("P=?[F<=20000 failure=1]", m);
  double exact = evaluate(sp, f, opts).value;
  Estimate est = estimate(sp, f, 4000, 7);
  REQUIRE(est.std_error.has_value());
  CHECK(std::fabs(est.value - exact) <= 3 * *est.std_error);

  Property u = parse_property(
      "P=?[ s1&s2&s3&s4&s5&s6&s7&s8&s9&s10 U<=30000 !s1|!s2|!s3|!s4|!s5|!s6|!s7|!s8|!s9|!s10 ]",
      m);
  exact = evaluate(sp, u, opts).value;
  est = estimate(sp, u, 4000, 11);
  CHECK(std::fabs(est.value - exact) <= 3 * *est.std_error);
}

TEST_CASE("cumulative reward estimate agrees with numerics within 3 standard errors") {
  ModelIR m = parse_model(slurp("compact.sm"));
  StateSpace sp = build(m);
  Property p = parse_property("R{\"AvgEnergySN\"}=?[C<=168]", m);
  double exact = evaluate(sp, p).value;  // 1343.16...
  Estimate est = estimate(sp, p, 2000, 21);
  REQUIRE(est.std_error.has_value());
  CHECK(std::fabs(est.value - exact) <= 3 * *est.std_error);
  // sanity: the estimator has real spread but is in the right ballpark
  CHECK(*est.std_error < exact * 0.05);
}

TEST_CASE("steady estimates agree with numerics within 3 standard errors") {
  ModelIR m = parse_model(slurp("compact.sm"));
  StateSpace sp = build(m);
  SolverOptions opts;
  opts.max_iters = 100000;
  Property p = parse_property("S=?[failedSN>0 | failedBN>0]", m);
  double exact = evaluate(sp, p, opts).value;  // ~0.003
  SimOptions sim;
  sim.horizon_for_steady = 1e6;
  Estimate est = estimate(sp, p, 1000, 5, sim);
  REQUIRE(est.std_error.has_value());
  CHECK(std::fabs(est.value - exact) <= 3 * *est.std_error);
  CHECK(*est.std_error > 0.0);
}

TEST_CASE("steady reward estimate on the tower") {
  ModelIR m = parse_model(slurp("tower.sm"));
  StateSpace sp = build(m);
  Property p = parse_property("R{\"TotalNumberOfSensorsFailures\"}=?[S]", m);
  double exact = evaluate(sp, p).value;  // ~1e-5 failures/hour
  SimOptions sim;
  sim.horizon_for_steady = 4e6;  // ~40 expected failures
  Estimate est = estimate(sp, p, 500, 17, sim);
  REQUIRE(est.std_error.has_value());
  CHECK(std::fabs(est.value - exact) <= 3 * *est.std_error);
}

TEST_CASE("steady estimation refuses a chain with several bottom components") {
  ModelIR m = parse_model(
      "ctmc module m x:[0..2] init 0; [] x=0 -> 2: (x'=1); [] x=0 -> 3: (x'=2); endmodule "
      "rewards \"r\" true : 1; endrewards");
  StateSpace sp = build(m);
  Property p = parse_property("S=?[x=1]", m);
  CHECK_THROWS_AS(estimate(sp, p, 100, 1), SolverError);
}
