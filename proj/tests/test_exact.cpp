#include <doctest.h>

#include <cmath>
#include <map>

#include "stlrisk/exact.hpp"
#include "stlrisk/risk.hpp"
#include "stlrisk/scenarios.hpp"
#include "support/corpus.hpp"

using namespace stlrisk;

namespace {

PredicateTable sign_pred() {
  PredicateTable t;
  t.emplace("mu", PredicateDef::affine({1.0}, 0.0));
  return t;
}

VectorPmf coin(double p0 = 0.5) {
  VectorPmf v;
  v.support = {{0.0}, {1.0}};
  v.probs = {p0, 1.0 - p0};
  return v;
}

} // namespace

TEST_SUITE_BEGIN("exact");

TEST_CASE("window from the formula horizon") {
  CHECK(window(*parse_formula("G[0,3](!c & !d) & F[1,2](a & F[0,1] b)"), 0).begin == 0);
  CHECK(window(*parse_formula("G[0,3](!c & !d) & F[1,2](a & F[0,1] b)"), 0).end == 3);
  const TimeWindow w = window(*parse_formula("mu"), 5);
  CHECK(w.begin == 5);
  CHECK(w.end == 5);
  const TimeWindow p = window(*parse_formula("a PU[0,2] b"), 4);
  CHECK(p.begin == 2);
  CHECK(p.end == 4);
  CHECK_THROWS_AS(window(*parse_formula("G[0,inf] mu"), 0), ValidationError);
}

TEST_CASE("iid enumeration: 2^3 signals with product probabilities") {
  IidProcess p{coin(0.25)};
  const TimeWindow w{0, 2};
  CHECK(support_count(p, w) == 8);
  std::size_t count = 0;
  double mass = 0.0;
  std::map<std::vector<double>, double> seen;
  enumerate_signals(p, w, [&](const Trace& x, double prob) {
    ++count;
    mass += prob;
    CHECK(x.size() == 3);
    CHECK(seen.emplace(x.data, prob).second); // each signal exactly once
  });
  CHECK(count == 8);
  CHECK(mass == doctest::Approx(1.0));
  CHECK(seen.at({0, 0, 0}) == doctest::Approx(0.25 * 0.25 * 0.25));
  CHECK(seen.at({1, 1, 0}) == doctest::Approx(0.75 * 0.75 * 0.25));
}

TEST_CASE("explicit singleton enumerates once with probability 1") {
  ExplicitProcess p;
  p.signals.emplace_back(Trace(0, 1.0, 1, {1, 2, 3}), 1.0);
  std::size_t count = 0;
  enumerate_signals(p, TimeWindow{0, 2}, [&](const Trace& x, double prob) {
    ++count;
    CHECK(prob == 1.0);
    CHECK(x.data == std::vector<double>{1, 2, 3});
  });
  CHECK(count == 1);
  CHECK_THROWS_AS(
      enumerate_signals(p, TimeWindow{0, 5}, [](const Trace&, double) {}),
      ValidationError); // signal does not cover the window
}

TEST_CASE("static-params: paper-sized parameter grids multiply") {
  DeliveryRobotSpec spec;
  const FiniteProcess proc = robot_finite_process(spec);
  const TimeWindow w{0, 3};
  // two 2-D parameters, each (M+1)^2 = 33^2 combinations
  CHECK(support_count(proc, w) == 1185921ULL); // 33^4
  CHECK_THROWS_AS(
      enumerate_signals(proc, w, [](const Trace&, double) {}, 1000),
      EnumerationCapError);
  try {
    enumerate_signals(proc, w, [](const Trace&, double) {}, 1000);
  } catch (const EnumerationCapError& e) {
    CHECK(e.count() == 1185921ULL);
    CHECK(e.cap() == 1000);
  }
}

TEST_CASE("static-params enumeration assembles states and marginals") {
  StaticParamsProcess p;
  p.base = Trace(0, 1.0, 1, {10.0, 20.0});
  VectorPmf a;
  a.support = {{-1.0}, {1.0}, {2.0}};
  a.probs = {0.2, 0.5, 0.3};
  p.params = {a, coin(0.5)};
  const TimeWindow w{0, 1};
  CHECK(support_count(p, w) == 6);

  std::map<double, double> marginal_a;
  double mass = 0.0;
  std::size_t count = 0;
  enumerate_signals(p, w, [&](const Trace& x, double prob) {
    ++count;
    mass += prob;
    CHECK(x.dim == 3);
    CHECK(x.state(0)[0] == 10.0);
    CHECK(x.state(1)[0] == 20.0);
    CHECK(x.state(0)[1] == x.state(1)[1]); // params constant over time
    marginal_a[x.state(0)[1]] += prob;
  });
  CHECK(count == 6);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(marginal_a.at(-1.0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(marginal_a.at(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(marginal_a.at(2.0) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("markov paths carry initial times transition mass") {
  MarkovProcess p;
  p.states = {{0.0}, {1.0}};
  p.initial = {1.0, 0.0};
  p.transition = {{0.5, 0.5}, {0.0, 1.0}};
  const TimeWindow w{0, 2};
  // nonzero paths: 000 001 011 = wait: from 0 -> {0,1}; from 1 -> {1}
  // 0-0-0 (.25), 0-0-1 (.25), 0-1-1 (.5)
  CHECK(support_count(p, w) == 3);
  std::map<std::vector<double>, double> seen;
  enumerate_signals(p, w, [&](const Trace& x, double prob) {
    seen.emplace(x.data, prob);
  });
  REQUIRE(seen.size() == 3);
  CHECK(seen.at({0, 0, 0}) == doctest::Approx(0.25));
  CHECK(seen.at({0, 0, 1}) == doctest::Approx(0.25));
  CHECK(seen.at({0, 1, 1}) == doctest::Approx(0.5));
}

TEST_CASE("robustness pmf: deterministic process gives a point mass") {
  ExplicitProcess p;
  p.signals.emplace_back(Trace(0, 1.0, 1, {2.0, 3.0}), 1.0);
  const DiscretePmf pmf =
      robustness_pmf(parse_formula("G[0,1] mu"), sign_pred(), p, 0);
  REQUIRE(pmf.size() == 1);
  CHECK(pmf.values()[0] == -2.0); // Z = -rho
  CHECK(pmf.probs()[0] == 1.0);
}

TEST_CASE("robustness pmf aggregates equal values") {
  ExplicitProcess p;
  p.signals.emplace_back(Trace(0, 1.0, 1, {1.0}), 0.3);
  p.signals.emplace_back(Trace(0, 1.0, 1, {-2.0}), 0.7);
  const DiscretePmf pmf = robustness_pmf(parse_formula("mu"), sign_pred(), p, 0);
  REQUIRE(pmf.size() == 2);
  CHECK(pmf.values()[0] == -1.0);
  CHECK(pmf.probs()[0] == doctest::Approx(0.3));
  CHECK(pmf.values()[1] == 2.0);
  CHECK(pmf.probs()[1] == doctest::Approx(0.7));

  // same robustness from different signals lands on one support point
  ExplicitProcess q;
  q.signals.emplace_back(Trace(0, 1.0, 1, {5.0, 1.0}), 0.4);
  q.signals.emplace_back(Trace(0, 1.0, 1, {1.0, 5.0}), 0.6);
  const DiscretePmf merged =
      robustness_pmf(parse_formula("G[0,1] mu"), sign_pred(), q, 0);
  REQUIRE(merged.size() == 1);
  CHECK(merged.values()[0] == -1.0);
}

TEST_CASE("robustness pmf rejects unbounded formulas") {
  IidProcess p{coin()};
  CHECK_THROWS_AS(robustness_pmf(parse_formula("G[0,inf] mu"), sign_pred(), p, 0),
                  ValidationError);
}

TEST_CASE("window soundness: enumerating a wider window changes nothing") {
  corpus::Rng rng(83);
  for (int iter = 0; iter < 20; ++iter) {
    corpus::FormulaOptions opt;
    opt.max_depth = 2;
    opt.max_interval = 2;
    opt.predicate_count = 2;
    const FormulaPtr phi = corpus::make_formula(rng, opt);
    const auto preds = corpus::make_predicates(rng, 1, 2);
    IidProcess p{coin(0.3)};
    const TimeWindow w = window(*phi, 0);
    if (w.length() > 6) continue;
    const DiscretePmf tight = robustness_pmf(phi, preds, p, 0);
    // widen by hand: enumerate over a larger window and rebuild
    const TimeWindow wide{w.begin - 2, w.end + 2};
    Monitor monitor(phi, preds);
    std::vector<std::pair<double, double>> mass;
    enumerate_signals(p, wide, [&](const Trace& x, double prob) {
      mass.emplace_back(-monitor.robustness(x, 0).value, prob);
    });
    const DiscretePmf rebuilt = DiscretePmf::aggregate(std::move(mass));
    REQUIRE(rebuilt.size() == tight.size());
    for (std::size_t i = 0; i < tight.size(); ++i) {
      CHECK(rebuilt.values()[i] == doctest::Approx(tight.values()[i]));
      CHECK(rebuilt.probs()[i] == doctest::Approx(tight.probs()[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("sampling a process converges to the exact VaR") {
  StaticParamsProcess p;
  p.base = Trace(0, 1.0, 1, {0.0, 0.0, 0.0});
  VectorPmf levels;
  levels.support = {{-1.0}, {0.5}, {2.0}, {4.0}};
  levels.probs = {0.4, 0.3, 0.2, 0.1};
  p.params = {levels};
  // state = (0, level); predicate reads the level coordinate
  PredicateTable preds;
  preds.emplace("lvl", PredicateDef::affine({0.0, 1.0}, 0.0));
  const FormulaPtr phi = parse_formula("G[0,2] lvl");
  const DiscretePmf pmf = robustness_pmf(phi, preds, p, 0);

  const TimeWindow w = window(*phi, 0);
  const auto samples = sample_process(p, w, 100000, 99);
  Monitor monitor(phi, preds);
  std::vector<double> zs;
  zs.reserve(samples.size());
  for (const Trace& x : samples) zs.push_back(-monitor.robustness(x, 0).value);
  const SampleSet set(std::move(zs));
  for (const double beta : {0.3, 0.55, 0.8, 0.95}) {
    // away from atom boundaries the empirical VaR hits the exact support
    CHECK(var_empirical(set, beta) == doctest::Approx(exact_var(pmf, beta)));
  }
}

TEST_CASE("gaussian discretization: partition of unity and symmetry") {
  const DiscretePmf pmf = discretize_gaussian(std::sqrt(0.2), 32, 0.55);
  CHECK(pmf.size() == 33);
  CHECK(std::abs(stable_sum(pmf.probs()) - 1.0) <= 1e-12);
  // paired non-boundary points mirror each other
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const std::size_t j = pmf.size() - 1 - i;
    CHECK(pmf.values()[i] == doctest::Approx(-pmf.values()[j]));
    CHECK(pmf.probs()[i] == doctest::Approx(pmf.probs()[j]).epsilon(1e-12));
  }
  // center point exists
  CHECK(pmf.values()[16] == 0.0);

  // other shapes keep the partition property
  for (const int m : {2, 4, 10, 64}) {
    const DiscretePmf q = discretize_gaussian(1.0, m, 1.3);
    CHECK(q.size() == static_cast<std::size_t>(m + 1));
    CHECK(std::abs(stable_sum(q.probs()) - 1.0) <= 1e-12);
  }
}

TEST_CASE("gaussian discretization rejects grids containing zero") {
  CHECK_THROWS_AS(discretize_gaussian(1.0, 33, 0.55), ValidationError);
  CHECK_THROWS_AS(discretize_gaussian(1.0, 3, 1.0), ValidationError);
  CHECK_THROWS_AS(discretize_gaussian(-1.0, 32, 0.55), ValidationError);
  CHECK_THROWS_AS(discretize_gaussian(1.0, 1, 0.55), ValidationError);
  CHECK_THROWS_AS(discretize_gaussian(1.0, 32, 0.0), ValidationError);
}

TEST_CASE("pmf type invariants") {
  CHECK_THROWS_AS(DiscretePmf({1.0, 1.0}, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(DiscretePmf({1.0, 2.0}, {0.6, 0.6}), ValidationError);
  CHECK_THROWS_AS(DiscretePmf({1.0}, {-1.0}), ValidationError);
  const DiscretePmf ok({0.0, 1.0}, {0.25, 0.75});
  CHECK(ok.cdf(0.0) == 0.25);
  CHECK(ok.cdf(0.5) == 0.25);
  CHECK(ok.cdf(1.0) == 1.0);
  CHECK(ok.cdf(-1.0) == 0.0);
}

TEST_SUITE_END();
