#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stlrisk/monitor.hpp"
#include "stlrisk/pmf.hpp"

namespace stlrisk {

struct ClipBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Cost samples Z^i = -rho^phi(X^i, t). Samples must be finite; infinite
/// robustness values have to be clipped before building a SampleSet. When
/// clip bounds are attached every sample must lie inside them (that is what
/// licenses the CVaR and mean concentration bounds).
class SampleSet {
public:
  explicit SampleSet(std::vector<double> samples,
                     std::optional<ClipBounds> clip = std::nullopt);

  const std::vector<double>& samples() const { return samples_; }
  const std::vector<double>& sorted() const { return sorted_; }
  const std::optional<ClipBounds>& clip_bounds() const { return clip_; }
  std::size_t size() const { return samples_.size(); }

private:
  std::vector<double> samples_;
  std::vector<double> sorted_;
  std::optional<ClipBounds> clip_;
};

enum class RiskMeasure { VaR, CVaR, Mean };

std::string to_string(RiskMeasure m);

/// One row of a risk table: the empirical estimate together with its
/// distribution-free confidence bounds at level 1 - delta.
struct RiskReport {
  RiskMeasure measure = RiskMeasure::VaR;
  std::optional<double> beta; // absent for Mean
  double delta = 0.0;
  std::size_t n = 0;
  double empirical = 0.0;
  double lower = 0.0; // extended real
  double upper = 0.0; // extended real
};

struct ConfidenceBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Fraction of samples <= alpha (inclusive indicator).
double empirical_cdf(const SampleSet& zs, double alpha);

/// Smallest sample value whose empirical CDF reaches beta; equals the
/// ceil(beta * N)-th order statistic.
double var_empirical(const SampleSet& zs, double beta);

/// DKW band around the empirical CDF: eps = sqrt(ln(2/delta) / (2N)).
/// The upper bound is +infinity when beta + eps > 1 (empty constraint set);
/// the lower bound saturates at the minimum sample.
ConfidenceBounds var_bounds(const SampleSet& zs, double beta, double delta);

/// Empirical conditional value-at-risk via the sample-average
/// Rockafellar-Uryasev objective, minimized over sample values.
double cvar_empirical(const SampleSet& zs, double beta);

/// empirical +/- sqrt(c ln(3/delta) / (N(1-beta))) * (b-a) with c = 5 for
/// the upper and c = 11 for the lower bound. Requires clip bounds.
ConfidenceBounds cvar_bounds(const SampleSet& zs, double beta, double delta);

double mean_empirical(const SampleSet& zs);

/// Hoeffding band: empirical +/- sqrt(ln(2/delta) / (2N)) * (b-a).
/// Requires clip bounds.
ConfidenceBounds mean_bounds(const SampleSet& zs, double delta);

RiskReport make_report(const SampleSet& zs, RiskMeasure measure,
                       std::optional<double> beta, double delta);

/// Exact risk of a finite distribution.
double exact_var(const DiscretePmf& pmf, double beta);
double exact_cvar(const DiscretePmf& pmf, double beta);
double exact_mean(const DiscretePmf& pmf);

/// Empirical probability that phi is satisfied at time t across traces.
double satisfaction_rate(const std::vector<Trace>& traces, const FormulaPtr& phi,
                         const PredicateTable& preds, long t);

/// Non-decreasing piecewise-linear cost, given as breakpoints with strictly
/// increasing x. Outside the breakpoint range the end segments extrapolate
/// linearly (a single breakpoint gives a constant function).
struct CostSpec {
  std::vector<double> xs;
  std::vector<double> ys;

  void validate() const;
  double operator()(double x) const;
};

/// Maps every sample through the cost; clip bounds map to (C(a), C(b)).
SampleSet apply_cost(const SampleSet& zs, const CostSpec& cost);

} // namespace stlrisk
