#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "stlrisk/exact.hpp"
#include "stlrisk/formula.hpp"
#include "stlrisk/monitor.hpp"

namespace stlrisk {

/// Discharging RC circuit with an uncertain resistance R = r_base + Z,
/// Z ~ Beta(beta_a, beta_b). The voltage trace is V(k dt) = v0 exp(-k dt / RC).
struct RcCircuitSpec {
  double v0 = 5.0;
  double r_base = 0.5;
  double beta_a = 1.5;
  double beta_b = 5.0;
  double c = 1.0;
  long horizon_steps = 1000; // trace has horizon_steps + 1 samples from t = 0
  double dt = 0.01;
  double spec_time = 2.0; // requirement start, time units

  void validate() const;
};

/// Deterministic voltage trace for a fixed resistance draw z.
Trace rc_trace(const RcCircuitSpec& spec, double z);

/// N traces with independent Beta draws on a counter-based stream.
std::vector<Trace> rc_traces(const RcCircuitSpec& spec, std::size_t n,
                             std::uint64_t seed);

/// Streaming variant; `visit(i, trace)` is called for i = 0..n-1 in order.
void rc_generate(const RcCircuitSpec& spec, std::size_t n, std::uint64_t seed,
                 const std::function<void(std::size_t, const Trace&)>& visit);

/// The requirement that V drops below 1 from spec_time on, as an index-based
/// always over [spec_time/dt, inf). spec_time/dt must be integral.
FormulaPtr rc_specification(const RcCircuitSpec& spec);
PredicateTable rc_predicates();

/// Delivery robot with two timed delivery tasks and two no-go regions whose
/// centers c and d are uncertain. The 10-D state is (r(t), a, b, c, d).
struct DeliveryRobotSpec {
  /// Waypoint sequences over t = 0..3; index 0 violates the task by
  /// starting inside region D, index 1 marginally avoids it, the rest avoid
  /// it robustly.
  std::vector<std::vector<std::array<double, 2>>> base_trajectories;
  std::size_t trajectory = 0;
  std::array<double, 2> mean_a{4.0, 5.0};
  std::array<double, 2> mean_b{7.0, 2.0};
  std::array<double, 2> mean_c{2.0, 3.0};
  std::array<double, 2> mean_d{6.0, 4.0};
  /// Per-axis noise of the region centers c and d; 0.2 is the variance of
  /// the Gaussian model, so the default scale is sqrt(0.2).
  double noise_std = std::sqrt(0.2);
  int disc_m = 32;
  double disc_gamma = 0.55;

  DeliveryRobotSpec();
  void validate() const;
};

/// 6-D deterministic base (r(t), a, b) of the selected trajectory.
Trace robot_base_trace(const DeliveryRobotSpec& spec);

/// N 10-D traces with freshly sampled region centers c, d per trace;
/// a and b stay fixed.
std::vector<Trace> robot_traces(const DeliveryRobotSpec& spec, std::size_t n,
                                std::uint64_t seed);

/// Static-params process with c and d discretized per-axis (disc_m points
/// on [-disc_gamma, disc_gamma] plus 0, shifted by the region means).
FiniteProcess robot_finite_process(const DeliveryRobotSpec& spec);

PredicateTable delivery_robot_predicates();
/// G[0,3](!muC & !muD) & F[1,2](muA & F[0,1] muB)
FormulaPtr delivery_robot_specification();

/// Inverse-CDF Beta draw (regularized incomplete beta inverse).
double beta_quantile(double a, double b, double u);
/// Inverse-CDF draw from N(0, sd^2).
double normal_quantile(double sd, double u);

} // namespace stlrisk
