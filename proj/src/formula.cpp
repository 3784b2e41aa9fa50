#include "stlrisk/formula.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace stlrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_integral_value(double v) {
  return std::isfinite(v) && std::floor(v) == v;
}

} // namespace

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo >= 0.0) || !std::isfinite(lo)) {
    throw ValidationError("interval lower bound must be finite and nonnegative");
  }
  if (std::isnan(hi) || hi < 0.0) {
    throw ValidationError("interval upper bound must be nonnegative");
  }
  if (lo > hi) {
    throw ValidationError("interval lower bound exceeds upper bound");
  }
}

bool Interval::unbounded() const { return std::isinf(hi); }

bool Interval::integral() const {
  return is_integral_value(lo) && (unbounded() || is_integral_value(hi));
}

long Interval::lo_steps() const { return static_cast<long>(lo); }
long Interval::hi_steps() const { return static_cast<long>(hi); }

FormulaPtr Formula::truth() {
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::True;
  return n;
}

FormulaPtr Formula::predicate(std::string name) {
  if (name.empty()) throw ValidationError("predicate name must be nonempty");
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::Predicate;
  n->name_ = std::move(name);
  return n;
}

static void require_child(const FormulaPtr& p, const char* what) {
  if (!p) throw ValidationError(std::string("missing operand for ") + what);
}

FormulaPtr Formula::negation(FormulaPtr child) {
  require_child(child, "negation");
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::Not;
  n->left_ = std::move(child);
  return n;
}

FormulaPtr Formula::conjunction(FormulaPtr left, FormulaPtr right) {
  require_child(left, "conjunction");
  require_child(right, "conjunction");
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::And;
  n->left_ = std::move(left);
  n->right_ = std::move(right);
  return n;
}

FormulaPtr Formula::disjunction(FormulaPtr left, FormulaPtr right) {
  require_child(left, "disjunction");
  require_child(right, "disjunction");
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::Or;
  n->left_ = std::move(left);
  n->right_ = std::move(right);
  return n;
}

FormulaPtr Formula::until(FormulaPtr left, FormulaPtr right, Interval iv,
                          UntilFlavor flavor) {
  require_child(left, "until");
  require_child(right, "until");
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::Until;
  n->left_ = std::move(left);
  n->right_ = std::move(right);
  n->interval_ = iv;
  n->flavor_ = flavor;
  return n;
}

FormulaPtr Formula::since(FormulaPtr left, FormulaPtr right, Interval iv,
                          UntilFlavor flavor) {
  require_child(left, "since");
  require_child(right, "since");
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::Since;
  n->left_ = std::move(left);
  n->right_ = std::move(right);
  n->interval_ = iv;
  n->flavor_ = flavor;
  return n;
}

FormulaPtr Formula::eventually(FormulaPtr child, Interval iv, TimeDirection dir) {
  require_child(child, "eventually");
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::Eventually;
  n->left_ = std::move(child);
  n->interval_ = iv;
  n->direction_ = dir;
  return n;
}

FormulaPtr Formula::always(FormulaPtr child, Interval iv, TimeDirection dir) {
  require_child(child, "always");
  struct Access : Formula {};
  auto n = std::make_shared<Access>();
  n->kind_ = NodeKind::Always;
  n->left_ = std::move(child);
  n->interval_ = iv;
  n->direction_ = dir;
  return n;
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
  case NodeKind::True:
    return true;
  case NodeKind::Predicate:
    return a.predicate_name() == b.predicate_name();
  case NodeKind::Not:
    return structurally_equal(*a.child(), *b.child());
  case NodeKind::And:
  case NodeKind::Or:
    return structurally_equal(*a.left(), *b.left()) &&
           structurally_equal(*a.right(), *b.right());
  case NodeKind::Until:
  case NodeKind::Since:
    return a.interval() == b.interval() && a.flavor() == b.flavor() &&
           structurally_equal(*a.left(), *b.left()) &&
           structurally_equal(*a.right(), *b.right());
  case NodeKind::Eventually:
  case NodeKind::Always:
    return a.interval() == b.interval() && a.direction() == b.direction() &&
           structurally_equal(*a.child(), *b.child());
  }
  return false;
}

FormulaPtr normalize(const FormulaPtr& phi) {
  switch (phi->kind()) {
  case NodeKind::True:
  case NodeKind::Predicate:
    return phi;
  case NodeKind::Not: {
    auto c = normalize(phi->child());
    return c == phi->child() ? phi : Formula::negation(c);
  }
  case NodeKind::And: {
    auto l = normalize(phi->left());
    auto r = normalize(phi->right());
    return (l == phi->left() && r == phi->right()) ? phi
                                                   : Formula::conjunction(l, r);
  }
  case NodeKind::Or: {
    auto l = normalize(phi->left());
    auto r = normalize(phi->right());
    return Formula::negation(
        Formula::conjunction(Formula::negation(l), Formula::negation(r)));
  }
  case NodeKind::Until: {
    auto l = normalize(phi->left());
    auto r = normalize(phi->right());
    return (l == phi->left() && r == phi->right())
               ? phi
               : Formula::until(l, r, phi->interval(), phi->flavor());
  }
  case NodeKind::Since: {
    auto l = normalize(phi->left());
    auto r = normalize(phi->right());
    return (l == phi->left() && r == phi->right())
               ? phi
               : Formula::since(l, r, phi->interval(), phi->flavor());
  }
  case NodeKind::Eventually: {
    // F_I phi := true U_I phi (and the past-time mirror). The strict flavor
    // is used; the inner window ranges over the true signal so either
    // flavor evaluates identically.
    auto c = normalize(phi->child());
    if (phi->direction() == TimeDirection::Future) {
      return Formula::until(Formula::truth(), c, phi->interval());
    }
    return Formula::since(Formula::truth(), c, phi->interval());
  }
  case NodeKind::Always: {
    // G_I phi := !F_I !phi
    auto c = normalize(phi->child());
    auto inner_kind = phi->direction() == TimeDirection::Future
                          ? Formula::until(Formula::truth(), Formula::negation(c),
                                           phi->interval())
                          : Formula::since(Formula::truth(), Formula::negation(c),
                                           phi->interval());
    return Formula::negation(inner_kind);
  }
  }
  throw ValidationError("malformed formula node");
}

namespace {

using ExtSteps = std::optional<long>;

ExtSteps ext_max(ExtSteps a, ExtSteps b) {
  if (!a || !b) return std::nullopt;
  return std::max(*a, *b);
}

ExtSteps ext_add(ExtSteps a, long b) {
  if (!a) return std::nullopt;
  return *a + b;
}

void require_integral(const Interval& iv) {
  if (!iv.integral()) {
    throw ValidationError("interval endpoints must be integers (or inf) "
                          "for discrete-time formula lengths");
  }
}

// Formula-length recursion; `future` selects which until direction
// contributes its interval bound. Derived operators follow the values of
// their normalized forms (F/G expand to an until over the same interval,
// so they contribute in their own direction).
ExtSteps length_of(const Formula& phi, bool future) {
  switch (phi.kind()) {
  case NodeKind::True:
  case NodeKind::Predicate:
    return 0;
  case NodeKind::Not:
    return length_of(*phi.child(), future);
  case NodeKind::And:
  case NodeKind::Or:
    return ext_max(length_of(*phi.left(), future),
                   length_of(*phi.right(), future));
  case NodeKind::Until:
  case NodeKind::Since: {
    require_integral(phi.interval());
    ExtSteps children = ext_max(length_of(*phi.left(), future),
                                length_of(*phi.right(), future));
    bool contributes = (phi.kind() == NodeKind::Until) == future;
    if (!contributes) return children;
    if (phi.interval().unbounded()) return std::nullopt;
    return ext_add(children, phi.interval().hi_steps());
  }
  case NodeKind::Eventually:
  case NodeKind::Always: {
    require_integral(phi.interval());
    ExtSteps child = length_of(*phi.child(), future);
    bool contributes = (phi.direction() == TimeDirection::Future) == future;
    if (!contributes) return child;
    if (phi.interval().unbounded()) return std::nullopt;
    return ext_add(child, phi.interval().hi_steps());
  }
  }
  throw ValidationError("malformed formula node");
}

} // namespace

std::optional<long> future_length(const Formula& phi) {
  return length_of(phi, true);
}

std::optional<long> past_length(const Formula& phi) {
  return length_of(phi, false);
}

HorizonPair horizon(const Formula& phi) {
  return HorizonPair{future_length(phi), past_length(phi)};
}

bool is_bounded(const Formula& phi) {
  if (phi.is_temporal() && phi.interval().unbounded()) return false;
  switch (phi.kind()) {
  case NodeKind::True:
  case NodeKind::Predicate:
    return true;
  case NodeKind::Not:
  case NodeKind::Eventually:
  case NodeKind::Always:
    return is_bounded(*phi.child());
  default:
    return is_bounded(*phi.left()) && is_bounded(*phi.right());
  }
}

namespace {

std::string format_bound(double v) {
  if (std::isinf(v)) return "inf";
  if (is_integral_value(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_interval(const Interval& iv) {
  return "[" + format_bound(iv.lo) + "," + format_bound(iv.hi) + "]";
}

// Binding strength used by the printer: atoms 4, unary 3, & 2, | 1, until 0.
int level(const Formula& f) {
  switch (f.kind()) {
  case NodeKind::True:
  case NodeKind::Predicate:
    return 4;
  case NodeKind::Not:
  case NodeKind::Eventually:
  case NodeKind::Always:
    return 3;
  case NodeKind::And:
    return 2;
  case NodeKind::Or:
    return 1;
  default:
    return 0;
  }
}

void print(const Formula& f, int min_level, std::string& out) {
  const bool parens = level(f) < min_level;
  if (parens) out += '(';
  switch (f.kind()) {
  case NodeKind::True:
    out += "true";
    break;
  case NodeKind::Predicate:
    out += f.predicate_name();
    break;
  case NodeKind::Not:
    out += '!';
    print(*f.child(), 3, out);
    break;
  case NodeKind::Eventually:
  case NodeKind::Always: {
    const bool past = f.direction() == TimeDirection::Past;
    out += past ? "P" : "";
    out += f.kind() == NodeKind::Eventually ? 'F' : 'G';
    out += format_interval(f.interval());
    if (level(*f.child()) >= 3) out += ' ';
    print(*f.child(), 3, out);
    break;
  }
  case NodeKind::And:
    print(*f.left(), 2, out);
    out += " & ";
    print(*f.right(), 3, out);
    break;
  case NodeKind::Or:
    print(*f.left(), 1, out);
    out += " | ";
    print(*f.right(), 2, out);
    break;
  case NodeKind::Until:
  case NodeKind::Since: {
    print(*f.left(), 1, out);
    out += ' ';
    out += f.kind() == NodeKind::Since ? "PU" : "U";
    if (f.flavor() == UntilFlavor::NonStrictMatching) out += 'M';
    out += format_interval(f.interval());
    out += ' ';
    print(*f.right(), 0, out);
    break;
  }
  }
  if (parens) out += ')';
}

} // namespace

std::string to_string(const Formula& phi) {
  std::string out;
  print(phi, 0, out);
  return out;
}

} // namespace stlrisk
