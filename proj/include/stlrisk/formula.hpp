#pragma once

#include <memory>
#include <optional>
#include <string>

#include "stlrisk/errors.hpp"

namespace stlrisk {

/// Time interval attached to a temporal operator. `lo` is finite and
/// nonnegative; `hi` may be +infinity. Endpoints are kept as reals and
/// validated as integers at the discrete-time use sites.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_);

  bool unbounded() const;
  /// Both endpoints integral (an unbounded hi counts as integral).
  bool integral() const;
  /// lo as a step count. Precondition: integral().
  long lo_steps() const;
  /// hi as a step count. Precondition: integral() and !unbounded().
  long hi_steps() const;

  bool operator==(const Interval& other) const = default;
};

enum class NodeKind {
  True,
  Predicate,
  Not,
  And,
  Or,
  Until,      // future until
  Since,      // past until
  Eventually, // F / PF
  Always,     // G / PG
};

/// Strict non-matching until does not constrain the current instant and
/// keeps the inner window open; the non-strict matching variant closes it.
enum class UntilFlavor { StrictNonMatching, NonStrictMatching };

enum class TimeDirection { Future, Past };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula node. Trees are shared freely across threads.
class Formula {
public:
  NodeKind kind() const { return kind_; }
  const std::string& predicate_name() const { return name_; }
  const FormulaPtr& left() const { return left_; }
  const FormulaPtr& right() const { return right_; }
  /// Unary child accessor (Not / Eventually / Always).
  const FormulaPtr& child() const { return left_; }
  const Interval& interval() const { return interval_; }
  UntilFlavor flavor() const { return flavor_; }
  TimeDirection direction() const { return direction_; }

  bool is_temporal() const {
    return kind_ == NodeKind::Until || kind_ == NodeKind::Since ||
           kind_ == NodeKind::Eventually || kind_ == NodeKind::Always;
  }

  static FormulaPtr truth();
  static FormulaPtr predicate(std::string name);
  static FormulaPtr negation(FormulaPtr child);
  static FormulaPtr conjunction(FormulaPtr left, FormulaPtr right);
  static FormulaPtr disjunction(FormulaPtr left, FormulaPtr right);
  static FormulaPtr until(FormulaPtr left, FormulaPtr right, Interval iv,
                          UntilFlavor flavor = UntilFlavor::StrictNonMatching);
  static FormulaPtr since(FormulaPtr left, FormulaPtr right, Interval iv,
                          UntilFlavor flavor = UntilFlavor::StrictNonMatching);
  static FormulaPtr eventually(FormulaPtr child, Interval iv,
                               TimeDirection dir = TimeDirection::Future);
  static FormulaPtr always(FormulaPtr child, Interval iv,
                           TimeDirection dir = TimeDirection::Future);

private:
  Formula() = default;

  NodeKind kind_ = NodeKind::True;
  std::string name_;
  FormulaPtr left_;
  FormulaPtr right_;
  Interval interval_;
  UntilFlavor flavor_ = UntilFlavor::StrictNonMatching;
  TimeDirection direction_ = TimeDirection::Future;
};

/// Future/past formula lengths; nullopt means unbounded.
struct HorizonPair {
  std::optional<long> future;
  std::optional<long> past;
};

/// Parses the formula grammar. Unary operators bind tightest, then `&`,
/// then `|`; the until forms bind loosest and associate to the right.
FormulaPtr parse_formula(const std::string& text);

/// Prints a formula that parses back to a structurally equal tree.
std::string to_string(const Formula& phi);

bool structurally_equal(const Formula& a, const Formula& b);

/// Rewrites to the core fragment {True, Predicate, Not, And, Until, Since}.
FormulaPtr normalize(const FormulaPtr& phi);

/// Future formula length; nullopt when a future interval is unbounded.
/// Requires integral interval endpoints.
std::optional<long> future_length(const Formula& phi);
/// Past counterpart of future_length.
std::optional<long> past_length(const Formula& phi);
HorizonPair horizon(const Formula& phi);

/// True iff every interval in the tree has a finite upper endpoint.
bool is_bounded(const Formula& phi);

} // namespace stlrisk
