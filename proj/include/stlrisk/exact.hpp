#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "stlrisk/formula.hpp"
#include "stlrisk/monitor.hpp"
#include "stlrisk/pmf.hpp"

namespace stlrisk {

/// Contiguous evaluation window {t - L_p, ..., t + L_f}.
struct TimeWindow {
  long begin = 0;
  long end = 0; // inclusive
  std::size_t length() const { return static_cast<std::size_t>(end - begin + 1); }
};

/// Window implied by the formula horizon; requires a bounded formula.
TimeWindow window(const Formula& phi, long t);

/// Finitely many signals listed with their probabilities. Signals must
/// cover the enumeration window.
struct ExplicitProcess {
  std::vector<std::pair<Trace, double>> signals;
};

/// Deterministic base trajectory plus independent, finitely supported,
/// time-invariant parameters appended to the state vector in order.
struct StaticParamsProcess {
  Trace base;
  std::vector<VectorPmf> params;
};

/// State drawn i.i.d. per time step from a finite vector PMF.
struct IidProcess {
  VectorPmf step;
};

/// Finite-state Markov chain started at the window origin. A
/// generalization beyond the paper's examples: only a finite state space is
/// required for exact enumeration.
struct MarkovProcess {
  std::vector<std::vector<double>> states; // state vectors
  std::vector<double> initial;
  std::vector<std::vector<double>> transition; // row-stochastic
};

using FiniteProcess =
    std::variant<ExplicitProcess, StaticParamsProcess, IidProcess, MarkovProcess>;

void validate(const FiniteProcess& proc);

constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Number of signals with nonzero probability the enumeration would yield
/// (saturating at 2^64 - 1).
std::uint64_t support_count(const FiniteProcess& proc, const TimeWindow& w);

/// Streams every nonzero-probability signal over the window exactly once.
/// Throws EnumerationCapError (with the exact count) above `cap`. The
/// visited Trace buffer is reused between calls.
void enumerate_signals(const FiniteProcess& proc, const TimeWindow& w,
                       const std::function<void(const Trace&, double)>& visit,
                       std::uint64_t cap = kDefaultEnumerationCap);

/// PMF of Z = -rho^phi(X, t) over the enumerated signals. Robustness values
/// within 1e-9 of each other are merged into one support point.
DiscretePmf robustness_pmf(const FormulaPtr& phi, const PredicateTable& preds,
                           const FiniteProcess& proc, long t,
                           std::uint64_t cap = kDefaultEnumerationCap);

/// Draws independent signals from the process over the window, seeded by a
/// counter-based stream (bitwise reproducible).
std::vector<Trace> sample_process(const FiniteProcess& proc, const TimeWindow& w,
                                  std::size_t n, std::uint64_t seed);

/// Gaussian discretization onto M uniform points of [-gamma, gamma] plus
/// the added center point 0. `sigma` is the standard deviation of the
/// zero-mean Gaussian whose CDF drives the mass assignment. Rejects grids
/// that already contain 0 (odd M).
DiscretePmf discretize_gaussian(double sigma, int m, double gamma);

} // namespace stlrisk
