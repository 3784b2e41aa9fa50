#include "stlrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double v, const char* name) {
  if (!(v > 0.0) || !(v < 1.0)) {
    throw ValidationError(std::string(name) + " must lie in (0, 1)");
  }
}

// Smallest k in [1, n] with k/n >= q, i.e. ceil(n q); 1e-9 of slack guards
// against n*q landing a hair above an integer. Returns n + 1 when q > 1.
std::size_t quantile_index(std::size_t n, double q) {
  if (q <= 0.0) return 1;
  const double target = static_cast<double>(n) * q;
  auto k = static_cast<long long>(std::ceil(target - 1e-9));
  if (k < 1) k = 1;
  return static_cast<std::size_t>(k);
}

} // namespace

SampleSet::SampleSet(std::vector<double> samples, std::optional<ClipBounds> clip)
    : samples_(std::move(samples)), clip_(clip) {
  if (samples_.empty()) throw ValidationError("sample set must be nonempty");
  for (double z : samples_) {
    if (std::isnan(z)) throw ValidationError("sample set contains NaN");
    if (std::isinf(z)) {
      throw ValidationError("sample set contains an infinite robustness "
                            "value; clip samples to a finite interval first");
    }
  }
  if (clip_) {
    if (!(clip_->lo < clip_->hi)) {
      throw ValidationError("clip bounds require a < b");
    }
    for (double z : samples_) {
      if (z < clip_->lo || z > clip_->hi) {
        throw ValidationError("sample outside declared clip bounds");
      }
    }
  }
  sorted_ = samples_;
  std::stable_sort(sorted_.begin(), sorted_.end());
}

std::string to_string(RiskMeasure m) {
  switch (m) {
  case RiskMeasure::VaR: return "var";
  case RiskMeasure::CVaR: return "cvar";
  case RiskMeasure::Mean: return "mean";
  }
  return "?";
}

double empirical_cdf(const SampleSet& zs, double alpha) {
  const auto& s = zs.sorted();
  const auto count = std::upper_bound(s.begin(), s.end(), alpha) - s.begin();
  return static_cast<double>(count) / static_cast<double>(s.size());
}

double var_empirical(const SampleSet& zs, double beta) {
  check_level(beta, "beta");
  const std::size_t k = quantile_index(zs.size(), beta);
  return zs.sorted()[k - 1];
}

ConfidenceBounds var_bounds(const SampleSet& zs, double beta, double delta) {
  check_level(beta, "beta");
  check_level(delta, "delta");
  const std::size_t n = zs.size();
  const double eps = std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
  ConfidenceBounds out;
  const std::size_t k_up = quantile_index(n, beta + eps);
  out.upper = k_up > n ? kInf : zs.sorted()[k_up - 1];
  const std::size_t k_lo = quantile_index(n, beta - eps);
  out.lower = zs.sorted()[std::min(k_lo, n) - 1];
  return out;
}

double cvar_empirical(const SampleSet& zs, double beta) {
  check_level(beta, "beta");
  const auto& s = zs.sorted();
  const std::size_t n = s.size();
  const double scale = static_cast<double>(n) * (1.0 - beta);
  // Suffix sums let each candidate alpha = s[k] evaluate
  //   alpha + sum_i [Z^i - alpha]^+ / (N (1 - beta))
  // in O(1); the objective is convex piecewise linear with breakpoints at
  // the samples, so scanning them finds the infimum.
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + s[i];
  double best = kInf;
  for (std::size_t k = 0; k < n; ++k) {
    const double alpha = s[k];
    const double above = suffix[k + 1] - static_cast<double>(n - k - 1) * alpha;
    best = std::min(best, alpha + above / scale);
  }
  return best;
}

ConfidenceBounds cvar_bounds(const SampleSet& zs, double beta, double delta) {
  check_level(beta, "beta");
  check_level(delta, "delta");
  if (!zs.clip_bounds()) {
    throw ValidationError("cvar bounds require clip bounds on the sample set");
  }
  const double width = zs.clip_bounds()->hi - zs.clip_bounds()->lo;
  const double n = static_cast<double>(zs.size());
  const double est = cvar_empirical(zs, beta);
  const double log_term = std::log(3.0 / delta) / (n * (1.0 - beta));
  return {est - std::sqrt(11.0 * log_term) * width,
          est + std::sqrt(5.0 * log_term) * width};
}

double mean_empirical(const SampleSet& zs) {
  return stable_sum(zs.samples()) / static_cast<double>(zs.size());
}

ConfidenceBounds mean_bounds(const SampleSet& zs, double delta) {
  check_level(delta, "delta");
  if (!zs.clip_bounds()) {
    throw ValidationError("mean bounds require clip bounds on the sample set");
  }
  const double width = zs.clip_bounds()->hi - zs.clip_bounds()->lo;
  const double n = static_cast<double>(zs.size());
  const double est = mean_empirical(zs);
  const double margin = std::sqrt(std::log(2.0 / delta) / (2.0 * n)) * width;
  return {est - margin, est + margin};
}

RiskReport make_report(const SampleSet& zs, RiskMeasure measure,
                       std::optional<double> beta, double delta) {
  RiskReport r;
  r.measure = measure;
  r.delta = delta;
  r.n = zs.size();
  switch (measure) {
  case RiskMeasure::VaR: {
    if (!beta) throw ValidationError("VaR requires beta");
    r.beta = beta;
    r.empirical = var_empirical(zs, *beta);
    const auto b = var_bounds(zs, *beta, delta);
    r.lower = b.lower;
    r.upper = b.upper;
    break;
  }
  case RiskMeasure::CVaR: {
    if (!beta) throw ValidationError("CVaR requires beta");
    r.beta = beta;
    r.empirical = cvar_empirical(zs, *beta);
    const auto b = cvar_bounds(zs, *beta, delta);
    r.lower = b.lower;
    r.upper = b.upper;
    break;
  }
  case RiskMeasure::Mean: {
    r.empirical = mean_empirical(zs);
    const auto b = mean_bounds(zs, delta);
    r.lower = b.lower;
    r.upper = b.upper;
    break;
  }
  }
  return r;
}

double exact_var(const DiscretePmf& pmf, double beta) {
  check_level(beta, "beta");
  double acc = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const double p = pmf.probs()[i];
    const double t = acc + p;
    comp += (acc - t) + p;
    acc = t;
    if (acc + comp >= beta - 1e-12) return pmf.values()[i];
  }
  return pmf.values().back();
}

double exact_cvar(const DiscretePmf& pmf, double beta) {
  check_level(beta, "beta");
  const double alpha = exact_var(pmf, beta);
  std::vector<double> terms;
  terms.reserve(pmf.size());
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    const double excess = pmf.values()[i] - alpha;
    if (excess > 0.0) terms.push_back(pmf.probs()[i] * excess);
  }
  return alpha + stable_sum(terms) / (1.0 - beta);
}

double exact_mean(const DiscretePmf& pmf) { return pmf.mean(); }

double satisfaction_rate(const std::vector<Trace>& traces, const FormulaPtr& phi,
                         const PredicateTable& preds, long t) {
  if (traces.empty()) throw ValidationError("satisfaction rate needs traces");
  Monitor monitor(phi, preds);
  std::size_t hits = 0;
  for (const Trace& x : traces) {
    if (monitor.satisfaction(x, t) > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(traces.size());
}

void CostSpec::validate() const {
  if (xs.empty() || xs.size() != ys.size()) {
    throw ValidationError("cost spec needs matching nonempty breakpoints");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i - 1] < xs[i])) {
      throw ValidationError("cost breakpoints must be strictly increasing");
    }
    if (ys[i] < ys[i - 1]) {
      throw ValidationError("cost values must be non-decreasing");
    }
  }
}

double CostSpec::operator()(double x) const {
  const std::size_t n = xs.size();
  if (n == 1) return ys[0];
  std::size_t seg; // interpolate on [xs[seg], xs[seg+1]]
  if (x <= xs.front()) {
    seg = 0;
  } else if (x >= xs.back()) {
    seg = n - 2;
  } else {
    seg = static_cast<std::size_t>(
              std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
  }
  const double slope = (ys[seg + 1] - ys[seg]) / (xs[seg + 1] - xs[seg]);
  return ys[seg] + slope * (x - xs[seg]);
}

SampleSet apply_cost(const SampleSet& zs, const CostSpec& cost) {
  cost.validate();
  std::vector<double> mapped;
  mapped.reserve(zs.size());
  for (double z : zs.samples()) mapped.push_back(cost(z));
  std::optional<ClipBounds> clip;
  if (zs.clip_bounds()) {
    clip = ClipBounds{cost(zs.clip_bounds()->lo), cost(zs.clip_bounds()->hi)};
    if (!(clip->lo < clip->hi)) {
      // A flat cost collapses the interval; drop the bounds rather than
      // carry an empty one.
      clip.reset();
    }
  }
  return SampleSet(std::move(mapped), clip);
}

} // namespace stlrisk
