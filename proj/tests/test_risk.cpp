#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "stlrisk/risk.hpp"
#include "stlrisk/rng.hpp"
#include "support/corpus.hpp"

using namespace stlrisk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SampleSet iota10() {
  std::vector<double> v(10);
  std::iota(v.begin(), v.end(), 1.0);
  return SampleSet(std::move(v));
}

} // namespace

TEST_SUITE_BEGIN("risk");

TEST_CASE("sample set invariants") {
  CHECK_THROWS_AS(SampleSet({}), ValidationError);
  CHECK_THROWS_AS(SampleSet({1.0, kInf}), ValidationError);
  CHECK_THROWS_AS(SampleSet({std::nan("")}), ValidationError);
  CHECK_THROWS_AS(SampleSet({0.5}, ClipBounds{0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(SampleSet({2.5}, ClipBounds{0.0, 1.0}), ValidationError);
  const SampleSet ok({0.5, 0.1}, ClipBounds{0.0, 1.0});
  CHECK(ok.sorted().front() == 0.1);
}

TEST_CASE("empirical cdf is inclusive") {
  const SampleSet zs({1, 2, 3, 4});
  CHECK(empirical_cdf(zs, 2.0) == 0.5);
  CHECK(empirical_cdf(SampleSet({1}), 0.0) == 0.0);
  CHECK(empirical_cdf(SampleSet({1}), 1.0) == 1.0);
  CHECK(empirical_cdf(zs, 10.0) == 1.0);
}

TEST_CASE("empirical VaR is the ceil(beta N)-th order statistic") {
  CHECK(var_empirical(iota10(), 0.5) == 5.0);
  CHECK(var_empirical(iota10(), 0.91) == 10.0);
  CHECK(var_empirical(iota10(), 0.05) == 1.0);
  CHECK(var_empirical(SampleSet({7.5}), 0.2) == 7.5);
  CHECK(var_empirical(SampleSet({7.5}), 0.99) == 7.5);
  CHECK_THROWS_AS(var_empirical(iota10(), 0.0), ValidationError);
  CHECK_THROWS_AS(var_empirical(iota10(), 1.0), ValidationError);
}

TEST_CASE("VaR bounds: epsilon arithmetic and the empty constraint set") {
  // N=1000, delta=0.05 -> eps = sqrt(ln 40 / 2000)
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 0.0);
  const SampleSet zs(std::move(v));
  const double eps = std::sqrt(std::log(2.0 / 0.05) / 2000.0);
  CHECK(eps == doctest::Approx(0.042946).epsilon(1e-4));
  const auto b = var_bounds(zs, 0.9, 0.05);
  // order statistics at ceil(1000 * (0.9 +/- eps))
  CHECK(b.upper == zs.sorted()[static_cast<std::size_t>(
                       std::ceil(1000 * (0.9 + eps))) - 1]);
  CHECK(b.lower == zs.sorted()[static_cast<std::size_t>(
                       std::ceil(1000 * (0.9 - eps))) - 1]);
  CHECK(b.lower <= var_empirical(zs, 0.9));
  CHECK(var_empirical(zs, 0.9) <= b.upper);

  // beta + eps > 1: inf over the empty set
  std::vector<double> small(100);
  std::iota(small.begin(), small.end(), 0.0);
  const auto b2 = var_bounds(SampleSet(std::move(small)), 0.99, 0.05);
  CHECK(b2.upper == kInf);
  CHECK(std::isfinite(b2.lower));

  // beta <= eps: lower bound saturates at the minimum sample
  const auto b3 = var_bounds(iota10(), 0.05, 0.5);
  CHECK(b3.lower == 1.0);
}

TEST_CASE("empirical CVaR") {
  CHECK(cvar_empirical(SampleSet({0, 0, 1, 1}), 0.5) == 1.0);
  CHECK(cvar_empirical(SampleSet({3.25}), 0.7) == 3.25);
  CHECK(cvar_empirical(iota10(), 0.9) == 10.0);
  CHECK(cvar_empirical(iota10(), 0.8) == doctest::Approx(9.5));
}

TEST_CASE("CVaR bounds use the stated widths exactly") {
  corpus::Rng rng(11);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t n = 5 + rng.pick_index(200);
    const double a = rng.uniform(-3.0, 0.0);
    const double b = a + rng.uniform(0.5, 4.0);
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(rng.uniform(a, b));
    const SampleSet zs(std::move(v), ClipBounds{a, b});
    const double beta = rng.uniform(0.5, 0.95);
    const double delta = rng.uniform(0.01, 0.2);
    const auto bounds = cvar_bounds(zs, beta, delta);
    const double est = cvar_empirical(zs, beta);
    const double up =
        std::sqrt(5.0 * std::log(3.0 / delta) / (n * (1.0 - beta))) * (b - a);
    const double low =
        std::sqrt(11.0 * std::log(3.0 / delta) / (n * (1.0 - beta))) * (b - a);
    CHECK(bounds.upper - est == doctest::Approx(up).epsilon(1e-12));
    CHECK(est - bounds.lower == doctest::Approx(low).epsilon(1e-12));
  }
  CHECK_THROWS_AS(cvar_bounds(iota10(), 0.9, 0.05), ValidationError);
}

TEST_CASE("doubling the clip width doubles the CVaR margins") {
  const SampleSet narrow({0.2, 0.4, 0.6}, ClipBounds{0.0, 1.0});
  const SampleSet wide({0.2, 0.4, 0.6}, ClipBounds{-0.5, 1.5});
  const auto bn = cvar_bounds(narrow, 0.8, 0.1);
  const auto bw = cvar_bounds(wide, 0.8, 0.1);
  const double est = cvar_empirical(narrow, 0.8);
  CHECK(bw.upper - est == doctest::Approx(2.0 * (bn.upper - est)));
  CHECK(est - bw.lower == doctest::Approx(2.0 * (est - bn.lower)));
}

TEST_CASE("mean bounds") {
  const SampleSet zs({0.5}, ClipBounds{0.0, 1.0});
  const auto b = mean_bounds(zs, 0.05);
  const double margin = std::sqrt(std::log(2.0 / 0.05) / 2.0);
  CHECK(margin == doctest::Approx(1.358).epsilon(1e-3));
  CHECK(b.upper - 0.5 == doctest::Approx(margin));
  CHECK(0.5 - b.lower == doctest::Approx(margin));

  const SampleSet same({0.3, 0.3, 0.3}, ClipBounds{0.0, 1.0});
  CHECK(mean_empirical(same) == doctest::Approx(0.3));

  // the sqrt(N) law: margin halves when N quadruples
  std::vector<double> n1(50, 0.5), n4(200, 0.5);
  const auto m1 = mean_bounds(SampleSet(std::move(n1), ClipBounds{0, 1}), 0.05);
  const auto m4 = mean_bounds(SampleSet(std::move(n4), ClipBounds{0, 1}), 0.05);
  CHECK((m1.upper - 0.5) == doctest::Approx(2.0 * (m4.upper - 0.5)));
  CHECK_THROWS_AS(mean_bounds(iota10(), 0.05), ValidationError);
}

TEST_CASE("exact risk over a discrete pmf") {
  const DiscretePmf half({0.0, 1.0}, {0.5, 0.5});
  CHECK(exact_var(half, 0.5) == 0.0);
  CHECK(exact_var(half, 0.51) == 1.0);
  CHECK(exact_cvar(half, 0.5) == doctest::Approx(1.0));
  CHECK(exact_mean(half) == doctest::Approx(0.5));

  const DiscretePmf point({3.5}, {1.0});
  CHECK(exact_var(point, 0.1) == 3.5);
  CHECK(exact_var(point, 0.99) == 3.5);
  CHECK(exact_cvar(point, 0.6) == doctest::Approx(3.5));
  CHECK(exact_mean(point) == 3.5);

  const DiscretePmf skew({-1.0, 2.0}, {0.8, 0.2});
  CHECK(exact_var(skew, 0.9) == 2.0);
  CHECK(exact_var(skew, 0.8) == -1.0);
  CHECK(exact_mean(skew) == doctest::Approx(-0.4));
}

TEST_CASE("exact CVaR dominates exact VaR on random pmfs") {
  corpus::Rng rng(17);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 1 + rng.pick_index(12);
    std::vector<double> values;
    std::vector<double> weights;
    double v = rng.uniform(-5.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      values.push_back(v);
      v += 0.1 + rng.uniform(0.0, 2.0);
      weights.push_back(rng.uniform(0.01, 1.0));
    }
    const double total = stable_sum(weights);
    for (double& w : weights) w /= total;
    // renormalize the largest weight so the mass check passes exactly
    const double mass = stable_sum(weights);
    weights.back() += 1.0 - mass;
    const DiscretePmf pmf(values, weights);
    const double beta = rng.uniform(0.05, 0.95);
    CHECK(exact_cvar(pmf, beta) >= exact_var(pmf, beta) - 1e-12);
  }
}

TEST_CASE("risk measure properties on random sample pairs") {
  corpus::Rng rng(29);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = 1 + rng.pick_index(40);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-5.0, 5.0);
      b[i] = a[i] + rng.uniform(0.0, 3.0); // pointwise dominates
    }
    const SampleSet za(a), zb(b);
    const double beta = rng.uniform(0.05, 0.95);
    CHECK(var_empirical(za, beta) <= var_empirical(zb, beta));
    CHECK(cvar_empirical(za, beta) <= cvar_empirical(zb, beta) + 1e-12);
    CHECK(mean_empirical(za) <= mean_empirical(zb) + 1e-12);
    CHECK(cvar_empirical(za, beta) >= var_empirical(za, beta) - 1e-12);

    // translation equivariance
    const double c = rng.uniform(-2.0, 2.0);
    std::vector<double> shifted(a);
    for (double& x : shifted) x += c;
    const SampleSet zc(shifted);
    CHECK(var_empirical(zc, beta) == doctest::Approx(var_empirical(za, beta) + c));
    CHECK(cvar_empirical(zc, beta) ==
          doctest::Approx(cvar_empirical(za, beta) + c));

    // beta monotonicity
    const double beta2 = beta + rng.uniform(0.0, 0.95 - beta);
    CHECK(var_empirical(za, beta) <= var_empirical(za, beta2));
    CHECK(cvar_empirical(za, beta) <= cvar_empirical(za, beta2) + 1e-12);
  }
}

TEST_CASE("ordering lower <= empirical <= upper") {
  corpus::Rng rng(47);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 2 + rng.pick_index(100);
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(rng.uniform(-1.0, 2.0));
    const SampleSet zs(std::move(v), ClipBounds{-1.0, 2.0});
    const double beta = rng.uniform(0.1, 0.9);
    const double delta = rng.uniform(0.01, 0.3);
    for (const RiskMeasure m :
         {RiskMeasure::VaR, RiskMeasure::CVaR, RiskMeasure::Mean}) {
      const RiskReport r = make_report(zs, m, beta, delta);
      CHECK(r.lower <= r.empirical + 1e-12);
      if (std::isfinite(r.upper)) CHECK(r.empirical <= r.upper + 1e-12);
    }
  }
}

TEST_CASE("satisfaction rate") {
  PredicateTable preds;
  preds.emplace("mu", PredicateDef::affine({1.0}, 0.0));
  const FormulaPtr phi = parse_formula("G[0,1] mu");
  auto make = [](double a, double b) { return Trace(0, 1.0, 1, {a, b}); };
  const std::vector<Trace> all_good{make(1, 1), make(2, 3)};
  CHECK(satisfaction_rate(all_good, phi, preds, 0) == 1.0);
  const std::vector<Trace> all_bad{make(-1, 1), make(1, -1)};
  CHECK(satisfaction_rate(all_bad, phi, preds, 0) == 0.0);
  const std::vector<Trace> mixed{make(1, 1), make(1, 2), make(3, 1), make(-1, 1)};
  CHECK(satisfaction_rate(mixed, phi, preds, 0) == 0.75);
}

TEST_CASE("cost transforms") {
  const CostSpec identity{{0.0, 1.0}, {0.0, 1.0}};
  const SampleSet zs({0.25, 0.5, 0.75}, ClipBounds{0.0, 1.0});
  const SampleSet same = apply_cost(zs, identity);
  CHECK(same.samples() == zs.samples());
  CHECK(same.clip_bounds()->lo == 0.0);
  CHECK(same.clip_bounds()->hi == 1.0);

  // affine cost 2z + 1 via two breakpoints and end-slope extrapolation
  const CostSpec affine{{0.0, 1.0}, {1.0, 3.0}};
  const SampleSet mapped = apply_cost(SampleSet({0.0, 1.0, 2.0}), affine);
  CHECK(mapped.samples() == std::vector<double>{1.0, 3.0, 5.0});

  CostSpec bad{{0.0, 0.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CostSpec decreasing{{0.0, 1.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(decreasing.validate(), ValidationError);
}

TEST_CASE("VaR commutes with non-decreasing continuous costs") {
  corpus::Rng rng(61);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 1 + rng.pick_index(30);
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(rng.uniform(-4.0, 4.0));
    // random non-decreasing piecewise-linear cost over [-5, 5]
    CostSpec cost;
    double x = -5.0, y = rng.uniform(-2.0, 0.0);
    while (x <= 5.0) {
      cost.xs.push_back(x);
      cost.ys.push_back(y);
      x += 0.5 + rng.uniform(0.0, 2.0);
      y += rng.uniform(0.0, 2.0);
    }
    cost.validate();
    const SampleSet zs(v);
    const double beta = rng.uniform(0.05, 0.95);
    const SampleSet mapped = apply_cost(zs, cost);
    CHECK(var_empirical(mapped, beta) ==
          doctest::Approx(cost(var_empirical(zs, beta))));
  }
}

TEST_SUITE_END();
