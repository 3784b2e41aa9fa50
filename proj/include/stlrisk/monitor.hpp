#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stlrisk/formula.hpp"

namespace stlrisk {

/// Uniformly sampled finite signal. Semantics are index based; `dt` is
/// carried as metadata only (one index step = dt time units).
struct Trace {
  long t0 = 0;
  double dt = 1.0;
  std::size_t dim = 0;
  std::vector<double> data; // row major, size() * dim entries

  Trace() = default;
  Trace(long t0_, double dt_, std::size_t dim_, std::vector<double> data_);

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  long first_time() const { return t0; }
  long last_time() const { return t0 + static_cast<long>(size()) - 1; }

  std::span<const double> state(std::size_t index) const {
    return {data.data() + index * dim, dim};
  }
  std::span<double> state(std::size_t index) {
    return {data.data() + index * dim, dim};
  }

  /// Throws ValidationError on empty traces, ragged storage, or NaN entries.
  void validate() const;
};

/// One coordinate of a ball center: either a constant or a reference to a
/// state coordinate (used when a region center is itself part of the state,
/// as with randomly placed regions).
struct CenterCoord {
  double value = 0.0;
  std::ptrdiff_t index = -1; // >= 0 selects state[index]

  static CenterCoord constant(double v) { return {v, -1}; }
  static CenterCoord state_ref(std::size_t i) {
    return {0.0, static_cast<std::ptrdiff_t>(i)};
  }
  bool is_state_ref() const { return index >= 0; }
  double resolve(std::span<const double> x) const {
    return is_state_ref() ? x[static_cast<std::size_t>(index)] : value;
  }
};

/// Named predicate definition mapping states to a signed robustness margin.
///
/// Margin conventions (before the `negated` flip):
///   halfspace {x | w.x + b >= 0}      ->  (w.x + b) / ||w||_2
///   ball2     {x | ||x[I]-c||_2 <= r} ->  r - ||x[I] - c||_2
///   ballinf   {x | ||x[I]-c||_inf<=r} ->  r - ||x[I] - c||_inf
///   affine    {x | w.x + b >= 0}      ->  w.x + b      (raw h(x), no
///                                          distance normalization)
struct PredicateDef {
  enum class Kind { Halfspace, Ball2, BallInf, Affine };

  Kind kind = Kind::Affine;
  std::vector<double> weights; // halfspace / affine
  double offset = 0.0;
  std::vector<std::size_t> indices; // ball kinds: constrained coordinates
  std::vector<CenterCoord> center;  // ball kinds: same length as indices
  double radius = 0.0;
  bool negated = false;

  static PredicateDef halfspace(std::vector<double> w, double b,
                                bool negated = false);
  static PredicateDef ball2(std::vector<std::size_t> indices,
                            std::vector<CenterCoord> center, double radius,
                            bool negated = false);
  static PredicateDef ballinf(std::vector<std::size_t> indices,
                              std::vector<CenterCoord> center, double radius,
                              bool negated = false);
  static PredicateDef affine(std::vector<double> w, double b,
                             bool negated = false);

  /// Signed robustness of the predicate at a state (negation applied).
  double margin(std::span<const double> state) const;
  /// Set membership x in O^mu. A negated predicate is the complement of
  /// its base set, so boundary states of the base set are excluded.
  bool satisfied(std::span<const double> state) const;

  void validate(std::size_t state_dim) const;
};

using PredicateTable = std::map<std::string, PredicateDef>;

/// Robustness result; `truncated` records that some temporal window was cut
/// off at a trace boundary (always the case for unbounded intervals).
struct RobustnessValue {
  double value = 0.0;
  bool truncated = false;
};

/// Evaluator for a fixed formula and predicate table. Construction
/// normalizes the formula and resolves every predicate name; evaluation is
/// a pure function of the trace and may run concurrently from many threads.
class Monitor {
public:
  Monitor(FormulaPtr phi, const PredicateTable& preds);
  ~Monitor();
  Monitor(Monitor&&) noexcept;
  Monitor& operator=(Monitor&&) noexcept;

  /// Robust semantics rho^phi(x, t). `t` is an absolute time within the
  /// trace domain.
  RobustnessValue robustness(const Trace& x, long t) const;
  /// Boolean semantics beta^phi(x, t) in {-1, +1}.
  int satisfaction(const Trace& x, long t) const;

  const FormulaPtr& formula() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double predicate_robustness(const PredicateDef& p, std::span<const double> state);

/// One-shot helpers; heavy batch callers should construct a Monitor once.
double robustness(const FormulaPtr& phi, const PredicateTable& preds,
                  const Trace& x, long t);
int satisfaction(const FormulaPtr& phi, const PredicateTable& preds,
                 const Trace& x, long t);

/// Brute-force recursive evaluator used as an oracle for `robustness`.
double robustness_reference(const FormulaPtr& phi, const PredicateTable& preds,
                            const Trace& x, long t);

/// min(max(v, a), b); requires a < b.
double clip(double v, double a, double b);

} // namespace stlrisk
