#include "stlrisk/scenarios.hpp"

#include <limits>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include "stlrisk/rng.hpp"

namespace stlrisk {

double beta_quantile(double a, double b, double u) {
  return boost::math::quantile(boost::math::beta_distribution<double>(a, b), u);
}

double normal_quantile(double sd, double u) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, sd),
                               u);
}

void RcCircuitSpec::validate() const {
  if (!(v0 > 0.0) || !(r_base > 0.0) || !(c > 0.0) || !(dt > 0.0) ||
      !(beta_a > 0.0) || !(beta_b > 0.0) || horizon_steps < 1 ||
      !(spec_time >= 0.0)) {
    throw ValidationError("rc circuit spec fields must be positive");
  }
}

Trace rc_trace(const RcCircuitSpec& spec, double z) {
  spec.validate();
  const double tau = 1.0 / ((spec.r_base + z) * spec.c);
  const double decay = std::exp(-spec.dt * tau);
  Trace x;
  x.t0 = 0;
  x.dt = spec.dt;
  x.dim = 1;
  x.data.resize(static_cast<std::size_t>(spec.horizon_steps) + 1);
  double v = spec.v0;
  for (double& out : x.data) {
    out = v;
    v *= decay;
  }
  return x;
}

void rc_generate(const RcCircuitSpec& spec, std::size_t n, std::uint64_t seed,
                 const std::function<void(std::size_t, const Trace&)>& visit) {
  spec.validate();
  if (n == 0) throw ValidationError("trace count must be positive");
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = beta_quantile(spec.beta_a, spec.beta_b, rng.uniform01(0, i));
    visit(i, rc_trace(spec, z));
  }
}

std::vector<Trace> rc_traces(const RcCircuitSpec& spec, std::size_t n,
                             std::uint64_t seed) {
  std::vector<Trace> out;
  out.reserve(n);
  rc_generate(spec, n, seed,
              [&](std::size_t, const Trace& x) { out.push_back(x); });
  return out;
}

FormulaPtr rc_specification(const RcCircuitSpec& spec) {
  spec.validate();
  const double steps = spec.spec_time / spec.dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9) {
    throw ValidationError("spec_time must be a multiple of dt");
  }
  return Formula::always(
      Formula::predicate("V_le_1"),
      Interval(rounded, std::numeric_limits<double>::infinity()));
}

PredicateTable rc_predicates() {
  // V <= 1 as h(x) = 1 - V
  PredicateTable t;
  t.emplace("V_le_1", PredicateDef::affine({-1.0}, 1.0));
  return t;
}

DeliveryRobotSpec::DeliveryRobotSpec() {
  // Synthetic stand-ins for the paper's figure-only trajectories: the robot
  // reaches region A at t = 1 or 2 and region B one step later. Trajectory 0
  // starts inside region D, trajectory 1 grazes its boundary, trajectories
  // 2..5 keep a wide berth.
  base_trajectories = {
      {{{5.65, 3.60}, {4.00, 5.00}, {7.00, 2.00}, {7.00, 1.50}}},
      {{{6.00, 3.29}, {4.00, 5.00}, {7.00, 2.00}, {7.00, 1.50}}},
      {{{3.00, 6.00}, {4.25, 5.25}, {7.00, 2.20}, {6.20, 3.10}}},
      {{{3.00, 6.00}, {4.25, 5.25}, {7.00, 2.20}, {6.90, 2.90}}},
      {{{3.20, 6.00}, {4.25, 4.75}, {7.20, 2.20}, {7.00, 3.00}}},
      {{{3.00, 5.80}, {3.75, 4.75}, {6.80, 1.90}, {6.90, 1.70}}},
  };
}

void DeliveryRobotSpec::validate() const {
  if (base_trajectories.empty()) {
    throw ValidationError("robot spec needs at least one base trajectory");
  }
  if (trajectory >= base_trajectories.size()) {
    throw ValidationError("robot trajectory index out of range");
  }
  if (base_trajectories[trajectory].empty()) {
    throw ValidationError("robot base trajectory must be nonempty");
  }
  if (!(noise_std >= 0.0)) throw ValidationError("noise std must be >= 0");
}

Trace robot_base_trace(const DeliveryRobotSpec& spec) {
  spec.validate();
  const auto& waypoints = spec.base_trajectories[spec.trajectory];
  Trace x;
  x.t0 = 0;
  x.dim = 6;
  x.data.reserve(waypoints.size() * x.dim);
  for (const auto& r : waypoints) {
    x.data.insert(x.data.end(), {r[0], r[1], spec.mean_a[0], spec.mean_a[1],
                                 spec.mean_b[0], spec.mean_b[1]});
  }
  return x;
}

std::vector<Trace> robot_traces(const DeliveryRobotSpec& spec, std::size_t n,
                                std::uint64_t seed) {
  if (n == 0) throw ValidationError("trace count must be positive");
  const Trace base = robot_base_trace(spec);
  const CounterRng rng(seed);
  std::vector<Trace> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double region[4]; // c1 c2 d1 d2
    const double means[4] = {spec.mean_c[0], spec.mean_c[1], spec.mean_d[0],
                             spec.mean_d[1]};
    for (std::size_t j = 0; j < 4; ++j) {
      const double noise = spec.noise_std > 0.0
                               ? normal_quantile(spec.noise_std,
                                                 rng.uniform01(j, i))
                               : 0.0;
      region[j] = means[j] + noise;
    }
    Trace x;
    x.t0 = base.t0;
    x.dt = base.dt;
    x.dim = 10;
    x.data.reserve(base.size() * 10);
    for (std::size_t k = 0; k < base.size(); ++k) {
      const auto row = base.state(k);
      x.data.insert(x.data.end(), row.begin(), row.end());
      x.data.insert(x.data.end(), {region[0], region[1], region[2], region[3]});
    }
    out.push_back(std::move(x));
  }
  return out;
}

FiniteProcess robot_finite_process(const DeliveryRobotSpec& spec) {
  spec.validate();
  if (!(spec.noise_std > 0.0)) {
    throw ValidationError("finite process discretization needs noise_std > 0");
  }
  auto shifted = [&](double mean) {
    DiscretePmf s = discretize_gaussian(spec.noise_std, spec.disc_m,
                                        spec.disc_gamma);
    std::vector<double> values = s.values();
    for (double& v : values) v += mean;
    return DiscretePmf(std::move(values), s.probs());
  };
  StaticParamsProcess proc;
  proc.base = robot_base_trace(spec);
  proc.params.push_back(
      VectorPmf::product(VectorPmf::from_scalar(shifted(spec.mean_c[0])),
                         VectorPmf::from_scalar(shifted(spec.mean_c[1]))));
  proc.params.push_back(
      VectorPmf::product(VectorPmf::from_scalar(shifted(spec.mean_d[0])),
                         VectorPmf::from_scalar(shifted(spec.mean_d[1]))));
  return proc;
}

PredicateTable delivery_robot_predicates() {
  // State layout: (r, a, b, c, d); region centers are read back out of the
  // state so that per-trace sampled centers flow through the margins.
  PredicateTable t;
  auto refs = [](std::size_t i) {
    return std::vector<CenterCoord>{CenterCoord::state_ref(i),
                                    CenterCoord::state_ref(i + 1)};
  };
  t.emplace("muA", PredicateDef::ballinf({0, 1}, refs(2), 0.5));
  t.emplace("muB", PredicateDef::ball2({0, 1}, refs(4), 0.7));
  t.emplace("muC", PredicateDef::ballinf({0, 1}, refs(6), 0.5));
  t.emplace("muD", PredicateDef::ball2({0, 1}, refs(8), 0.7));
  return t;
}

FormulaPtr delivery_robot_specification() {
  return parse_formula("G[0,3](!muC & !muD) & F[1,2](muA & F[0,1] muB)");
}

} // namespace stlrisk
