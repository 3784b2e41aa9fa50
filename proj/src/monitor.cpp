#include "stlrisk/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>

namespace stlrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// min/max keeping the first argument on ties, so that every fold over a
// window returns the earliest extremal element bit-for-bit.
template <class V> V vmin(V a, V b) { return b < a ? b : a; }
template <class V> V vmax(V a, V b) { return a < b ? b : a; }

double dot(std::span<const double> w, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
  return acc;
}

} // namespace

Trace::Trace(long t0_, double dt_, std::size_t dim_, std::vector<double> data_)
    : t0(t0_), dt(dt_), dim(dim_), data(std::move(data_)) {
  validate();
}

void Trace::validate() const {
  if (dim == 0) throw ValidationError("trace dimension must be positive");
  if (data.empty() || data.size() % dim != 0) {
    throw ValidationError("trace length must be a positive multiple of dim");
  }
  if (!(dt > 0.0)) throw ValidationError("trace dt must be positive");
  for (double v : data) {
    if (std::isnan(v)) throw ValidationError("trace contains NaN");
  }
}

PredicateDef PredicateDef::halfspace(std::vector<double> w, double b,
                                     bool negated) {
  PredicateDef p;
  p.kind = Kind::Halfspace;
  p.weights = std::move(w);
  p.offset = b;
  p.negated = negated;
  return p;
}

PredicateDef PredicateDef::ball2(std::vector<std::size_t> indices,
                                 std::vector<CenterCoord> center, double radius,
                                 bool negated) {
  PredicateDef p;
  p.kind = Kind::Ball2;
  p.indices = std::move(indices);
  p.center = std::move(center);
  p.radius = radius;
  p.negated = negated;
  return p;
}

PredicateDef PredicateDef::ballinf(std::vector<std::size_t> indices,
                                   std::vector<CenterCoord> center,
                                   double radius, bool negated) {
  PredicateDef p = ball2(std::move(indices), std::move(center), radius, negated);
  p.kind = Kind::BallInf;
  return p;
}

PredicateDef PredicateDef::affine(std::vector<double> w, double b,
                                  bool negated) {
  PredicateDef p = halfspace(std::move(w), b, negated);
  p.kind = Kind::Affine;
  return p;
}

void PredicateDef::validate(std::size_t state_dim) const {
  switch (kind) {
  case Kind::Halfspace:
  case Kind::Affine: {
    if (weights.size() != state_dim) {
      throw ValidationError("predicate weight vector does not match state "
                            "dimension " + std::to_string(state_dim));
    }
    if (kind == Kind::Halfspace) {
      double norm2 = 0.0;
      for (double w : weights) norm2 += w * w;
      if (!(norm2 > 0.0)) {
        throw ValidationError("halfspace normal must be nonzero");
      }
    }
    break;
  }
  case Kind::Ball2:
  case Kind::BallInf: {
    if (indices.empty() || indices.size() != center.size()) {
      throw ValidationError("ball predicate needs matching indices and center");
    }
    if (!(radius > 0.0)) throw ValidationError("ball radius must be positive");
    for (std::size_t i : indices) {
      if (i >= state_dim) {
        throw ValidationError("ball predicate index out of range");
      }
    }
    for (const CenterCoord& c : center) {
      if (c.is_state_ref() &&
          static_cast<std::size_t>(c.index) >= state_dim) {
        throw ValidationError("ball center reference out of range");
      }
    }
    break;
  }
  }
}

namespace {

double base_margin(const PredicateDef& p, std::span<const double> x) {
  switch (p.kind) {
  case PredicateDef::Kind::Halfspace: {
    const double h = dot(p.weights, x) + p.offset;
    double norm2 = 0.0;
    for (double w : p.weights) norm2 += w * w;
    return h / std::sqrt(norm2);
  }
  case PredicateDef::Kind::Affine:
    return dot(p.weights, x) + p.offset;
  case PredicateDef::Kind::Ball2: {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.indices.size(); ++i) {
      const double d = x[p.indices[i]] - p.center[i].resolve(x);
      acc += d * d;
    }
    return p.radius - std::sqrt(acc);
  }
  case PredicateDef::Kind::BallInf: {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.indices.size(); ++i) {
      acc = std::max(acc, std::abs(x[p.indices[i]] - p.center[i].resolve(x)));
    }
    return p.radius - acc;
  }
  }
  throw ValidationError("malformed predicate");
}

} // namespace

double PredicateDef::margin(std::span<const double> state) const {
  const double m = base_margin(*this, state);
  return negated ? -m : m;
}

bool PredicateDef::satisfied(std::span<const double> state) const {
  const bool base = base_margin(*this, state) >= 0.0;
  return negated ? !base : base;
}

double predicate_robustness(const PredicateDef& p,
                            std::span<const double> state) {
  return p.margin(state);
}

double clip(double v, double a, double b) {
  if (!(a < b)) throw ValidationError("clip bounds require a < b");
  return std::min(std::max(v, a), b);
}

// ---------------------------------------------------------------------------
// Table evaluator
// ---------------------------------------------------------------------------

namespace {

// Value policies for the two semantics. Both share the evaluation skeleton
// so the robust and Boolean recursions stay structurally identical.
struct RobustPolicy {
  using value = double;
  static constexpr value top = kInf;
  static constexpr value bottom = -kInf;
  static value atom(const PredicateDef& p, std::span<const double> x) {
    return p.margin(x);
  }
};

struct BooleanPolicy {
  using value = int;
  static constexpr value top = 1;
  static constexpr value bottom = -1;
  static value atom(const PredicateDef& p, std::span<const double> x) {
    return p.satisfied(x) ? 1 : -1;
  }
};

struct Slot {
  NodeKind kind = NodeKind::True;
  int left = -1;
  int right = -1;
  long lo = 0;           // interval lower bound, steps
  long hi = 0;           // interval upper bound, steps (ignored if unbounded)
  bool unbounded = false;
  bool matching = false; // non-strict matching until flavor
  bool left_is_true = false;
  PredicateDef pred;

  // Index range (relative to the query time) this slot must be evaluated
  // on; populated per query.
  long need_past = 0;
  long need_future = 0;
  bool need_to_end = false;   // future side extends to the trace end
  bool need_to_begin = false; // past side extends to the trace start
};

} // namespace

struct Monitor::Impl {
  FormulaPtr original;
  FormulaPtr core;
  std::vector<Slot> slots; // post order, root last

  int compile(const Formula& f, const PredicateTable& preds,
              std::unordered_map<const Formula*, int>& seen) {
    auto it = seen.find(&f);
    if (it != seen.end()) return it->second;
    Slot s;
    s.kind = f.kind();
    switch (f.kind()) {
    case NodeKind::True:
      break;
    case NodeKind::Predicate: {
      auto p = preds.find(f.predicate_name());
      if (p == preds.end()) {
        throw ValidationError("unknown predicate '" + f.predicate_name() + "'");
      }
      s.pred = p->second;
      break;
    }
    case NodeKind::Not:
      s.left = compile(*f.child(), preds, seen);
      break;
    case NodeKind::And:
      s.left = compile(*f.left(), preds, seen);
      s.right = compile(*f.right(), preds, seen);
      break;
    case NodeKind::Until:
    case NodeKind::Since: {
      if (!f.interval().integral()) {
        throw ValidationError("discrete-time monitoring requires integer "
                              "interval endpoints, got [" +
                              std::to_string(f.interval().lo) + "," +
                              std::to_string(f.interval().hi) + "]");
      }
      s.left = compile(*f.left(), preds, seen);
      s.right = compile(*f.right(), preds, seen);
      s.lo = f.interval().lo_steps();
      s.unbounded = f.interval().unbounded();
      s.hi = s.unbounded ? 0 : f.interval().hi_steps();
      s.matching = f.flavor() == UntilFlavor::NonStrictMatching;
      s.left_is_true = slots[static_cast<std::size_t>(s.left)].kind ==
                       NodeKind::True;
      break;
    }
    default:
      throw ValidationError("monitor expects a normalized formula");
    }
    slots.push_back(std::move(s));
    const int id = static_cast<int>(slots.size()) - 1;
    seen.emplace(&f, id);
    return id;
  }

  // Propagates evaluation ranges from the root down; conservative in the
  // past/future direction a temporal operator does not extend.
  void compute_needs() {
    for (Slot& s : slots) {
      s.need_past = s.need_future = 0;
      s.need_to_end = s.need_to_begin = false;
    }
    for (int i = static_cast<int>(slots.size()) - 1; i >= 0; --i) {
      const Slot& s = slots[static_cast<std::size_t>(i)];
      auto relax = [&](int child, long extra_future, bool to_end,
                       long extra_past, bool to_begin) {
        if (child < 0) return;
        Slot& c = slots[static_cast<std::size_t>(child)];
        c.need_future = std::max(c.need_future, s.need_future + extra_future);
        c.need_to_end = c.need_to_end || s.need_to_end || to_end;
        c.need_past = std::max(c.need_past, s.need_past + extra_past);
        c.need_to_begin = c.need_to_begin || s.need_to_begin || to_begin;
      };
      switch (s.kind) {
      case NodeKind::Not:
        relax(s.left, 0, false, 0, false);
        break;
      case NodeKind::And:
        relax(s.left, 0, false, 0, false);
        relax(s.right, 0, false, 0, false);
        break;
      case NodeKind::Until:
        relax(s.left, s.hi, s.unbounded, 0, false);
        relax(s.right, s.hi, s.unbounded, 0, false);
        break;
      case NodeKind::Since:
        relax(s.left, 0, false, s.hi, s.unbounded);
        relax(s.right, 0, false, s.hi, s.unbounded);
        break;
      default:
        break;
      }
    }
  }

  struct Range {
    long lo = 0;
    long hi = -1; // inclusive; empty when hi < lo
  };

  Range slot_range(const Slot& s, long t_idx, long n) const {
    Range r;
    r.lo = s.need_to_begin ? 0 : std::max<long>(0, t_idx - s.need_past);
    r.hi = s.need_to_end ? n - 1 : std::min<long>(n - 1, t_idx + s.need_future);
    return r;
  }

  template <class P>
  typename P::value evaluate(const Trace& x, long t, bool& truncated) const {
    using V = typename P::value;
    if (t < x.first_time() || t > x.last_time()) {
      throw ValidationError("time " + std::to_string(t) +
                            " outside trace domain [" +
                            std::to_string(x.first_time()) + "," +
                            std::to_string(x.last_time()) + "]");
    }
    for (const Slot& s : slots) {
      if (s.kind == NodeKind::Predicate) s.pred.validate(x.dim);
    }
    const long n = static_cast<long>(x.size());
    const long t_idx = t - x.t0;
    truncated = false;

    std::vector<std::vector<V>> tables(slots.size());
    std::vector<V> scratch; // suffix folds for Since

    for (std::size_t si = 0; si < slots.size(); ++si) {
      const Slot& s = slots[si];
      const Range range = slot_range(s, t_idx, n);
      std::vector<V>& out = tables[si];
      out.assign(static_cast<std::size_t>(n), P::bottom);
      if (range.hi < range.lo) continue;
      switch (s.kind) {
      case NodeKind::True:
        for (long i = range.lo; i <= range.hi; ++i) out[i] = P::top;
        break;
      case NodeKind::Predicate:
        for (long i = range.lo; i <= range.hi; ++i) {
          out[i] = P::atom(s.pred, x.state(static_cast<std::size_t>(i)));
        }
        break;
      case NodeKind::Not: {
        const auto& c = tables[static_cast<std::size_t>(s.left)];
        for (long i = range.lo; i <= range.hi; ++i) out[i] = -c[i];
        break;
      }
      case NodeKind::And: {
        const auto& l = tables[static_cast<std::size_t>(s.left)];
        const auto& r = tables[static_cast<std::size_t>(s.right)];
        for (long i = range.lo; i <= range.hi; ++i) out[i] = vmin(l[i], r[i]);
        break;
      }
      case NodeKind::Until:
        eval_until<P>(s, tables, range, n, out, truncated);
        break;
      case NodeKind::Since:
        eval_since<P>(s, tables, range, n, out, scratch, truncated);
        break;
      default:
        throw ValidationError("malformed compiled formula");
      }
    }
    return tables.back()[static_cast<std::size_t>(t_idx)];
  }

  template <class P>
  void eval_until(const Slot& s, const std::vector<std::vector<typename P::value>>& tables,
                  Range range, long n, std::vector<typename P::value>& out,
                  bool& truncated) const {
    using V = typename P::value;
    const auto& right = tables[static_cast<std::size_t>(s.right)];
    const auto& left = tables[static_cast<std::size_t>(s.left)];

    auto window_hi = [&](long ti) {
      if (s.unbounded) {
        truncated = true;
        return n - 1;
      }
      if (ti + s.hi > n - 1) truncated = true;
      return std::min(ti + s.hi, n - 1);
    };

    if (s.left_is_true) {
      // G/F pattern: the inner infimum ranges over the true signal, so the
      // value is a sliding-window maximum of the right child.
      std::deque<long> dq; // indices, values strictly decreasing
      long next = range.lo + s.lo; // next index not yet offered to the deque
      next = std::max(next, 0L);
      for (long ti = range.lo; ti <= range.hi; ++ti) {
        const long lo = ti + s.lo;
        const long hi = window_hi(ti);
        while (next <= hi) {
          while (!dq.empty() && right[dq.back()] < right[next]) dq.pop_back();
          dq.push_back(next);
          ++next;
        }
        while (!dq.empty() && dq.front() < lo) dq.pop_front();
        out[ti] = (lo > hi || dq.empty()) ? P::bottom : right[dq.front()];
      }
      return;
    }

    for (long ti = range.lo; ti <= range.hi; ++ti) {
      const long lo = ti + s.lo;
      const long hi = window_hi(ti);
      V acc = P::bottom;
      if (lo <= hi) {
        V inner = P::top;
        const long pre_from = s.matching ? ti : ti + 1;
        for (long k = pre_from; k < lo; ++k) inner = vmin(inner, left[k]);
        for (long t2 = lo; t2 <= hi; ++t2) {
          if (s.matching) inner = vmin(inner, left[t2]);
          acc = vmax(acc, vmin(right[t2], inner));
          // The strict inner window {ti+1, ..., t2} for the next iteration
          // never contains ti itself.
          if (!s.matching && t2 > ti) inner = vmin(inner, left[t2]);
        }
      }
      out[ti] = acc;
    }
  }

  template <class P>
  void eval_since(const Slot& s, const std::vector<std::vector<typename P::value>>& tables,
                  Range range, long n, std::vector<typename P::value>& out,
                  std::vector<typename P::value>& scratch, bool& truncated) const {
    using V = typename P::value;
    const auto& right = tables[static_cast<std::size_t>(s.right)];
    const auto& left = tables[static_cast<std::size_t>(s.left)];
    (void)n;

    auto window_lo = [&](long ti) {
      if (s.unbounded) {
        truncated = true;
        return 0L;
      }
      if (ti - s.hi < 0) truncated = true;
      return std::max(ti - s.hi, 0L);
    };

    if (s.left_is_true) {
      std::deque<long> dq;
      long next = window_lo(range.lo);
      for (long ti = range.lo; ti <= range.hi; ++ti) {
        const long lo = window_lo(ti);
        const long hi = ti - s.lo;
        while (next <= hi) {
          if (next >= 0) {
            while (!dq.empty() && right[dq.back()] < right[next]) dq.pop_back();
            dq.push_back(next);
          }
          ++next;
        }
        while (!dq.empty() && dq.front() < lo) dq.pop_front();
        out[ti] = (hi < lo || hi < 0 || dq.empty()) ? P::bottom
                                                    : right[dq.front()];
      }
      return;
    }

    for (long ti = range.lo; ti <= range.hi; ++ti) {
      const long hi = ti - s.lo; // window is [lo, hi] in trace indices
      const long lo = window_lo(ti);
      V acc = P::bottom;
      if (hi >= 0 && lo <= hi) {
        // suffix folds of the left child up to ti; suffix[k] covers
        // {k, ..., ti-1} (strict) or {k, ..., ti} (matching).
        const long top_k = s.matching ? ti : ti - 1;
        scratch.assign(static_cast<std::size_t>(ti - lo + 2), P::top);
        // scratch[k - lo] holds the fold starting at k; entry ti+1 is empty.
        for (long k = top_k; k >= lo; --k) {
          scratch[k - lo] = vmin(left[k], scratch[k - lo + 1]);
        }
        for (long t2 = lo; t2 <= hi; ++t2) {
          const long inner_from = s.matching ? t2 : t2 + 1;
          const V inner = inner_from > top_k ? P::top : scratch[inner_from - lo];
          acc = vmax(acc, vmin(right[t2], inner));
        }
      }
      out[ti] = acc;
    }
  }
};

Monitor::Monitor(FormulaPtr phi, const PredicateTable& preds)
    : impl_(std::make_unique<Impl>()) {
  if (!phi) throw ValidationError("null formula");
  impl_->original = phi;
  impl_->core = normalize(phi);
  std::unordered_map<const Formula*, int> seen;
  impl_->compile(*impl_->core, preds, seen);
  impl_->compute_needs();
}

Monitor::~Monitor() = default;
Monitor::Monitor(Monitor&&) noexcept = default;
Monitor& Monitor::operator=(Monitor&&) noexcept = default;

const FormulaPtr& Monitor::formula() const { return impl_->original; }

RobustnessValue Monitor::robustness(const Trace& x, long t) const {
  bool truncated = false;
  const double v = impl_->evaluate<RobustPolicy>(x, t, truncated);
  return {v, truncated};
}

int Monitor::satisfaction(const Trace& x, long t) const {
  bool truncated = false;
  return impl_->evaluate<BooleanPolicy>(x, t, truncated);
}

double robustness(const FormulaPtr& phi, const PredicateTable& preds,
                  const Trace& x, long t) {
  return Monitor(phi, preds).robustness(x, t).value;
}

int satisfaction(const FormulaPtr& phi, const PredicateTable& preds,
                 const Trace& x, long t) {
  return Monitor(phi, preds).satisfaction(x, t);
}

// ---------------------------------------------------------------------------
// Reference evaluator: a literal recursive expansion of the robust
// semantics, kept independent of the table evaluator above.
// ---------------------------------------------------------------------------

namespace {

double ref_eval(const Formula& f, const PredicateTable& preds, const Trace& x,
                long t) {
  const long n = static_cast<long>(x.size());
  const long ti = t - x.t0;
  switch (f.kind()) {
  case NodeKind::True:
    return kInf;
  case NodeKind::Predicate: {
    auto it = preds.find(f.predicate_name());
    if (it == preds.end()) {
      throw ValidationError("unknown predicate '" + f.predicate_name() + "'");
    }
    it->second.validate(x.dim);
    return it->second.margin(x.state(static_cast<std::size_t>(ti)));
  }
  case NodeKind::Not:
    return -ref_eval(*f.child(), preds, x, t);
  case NodeKind::And:
    return vmin(ref_eval(*f.left(), preds, x, t),
                ref_eval(*f.right(), preds, x, t));
  case NodeKind::Until: {
    if (!f.interval().integral()) {
      throw ValidationError("non-integer interval endpoint");
    }
    const bool matching = f.flavor() == UntilFlavor::NonStrictMatching;
    const long lo = ti + f.interval().lo_steps();
    const long hi = f.interval().unbounded()
                        ? n - 1
                        : std::min(ti + f.interval().hi_steps(), n - 1);
    double acc = -kInf;
    for (long t2 = lo; t2 <= hi; ++t2) {
      double inner = kInf;
      const long from = matching ? ti : ti + 1;
      const long to = matching ? t2 : t2 - 1;
      for (long t1 = from; t1 <= to; ++t1) {
        inner = vmin(inner, ref_eval(*f.left(), preds, x, x.t0 + t1));
      }
      acc = vmax(acc, vmin(ref_eval(*f.right(), preds, x, x.t0 + t2), inner));
    }
    return acc;
  }
  case NodeKind::Since: {
    if (!f.interval().integral()) {
      throw ValidationError("non-integer interval endpoint");
    }
    const bool matching = f.flavor() == UntilFlavor::NonStrictMatching;
    const long hi = ti - f.interval().lo_steps();
    const long lo = f.interval().unbounded()
                        ? 0
                        : std::max(ti - f.interval().hi_steps(), 0L);
    double acc = -kInf;
    if (hi >= 0) {
      for (long t2 = lo; t2 <= hi; ++t2) {
        double inner = kInf;
        const long from = matching ? t2 : t2 + 1;
        const long to = matching ? ti : ti - 1;
        for (long t1 = from; t1 <= to; ++t1) {
          inner = vmin(inner, ref_eval(*f.left(), preds, x, x.t0 + t1));
        }
        acc = vmax(acc, vmin(ref_eval(*f.right(), preds, x, x.t0 + t2), inner));
      }
    }
    return acc;
  }
  default:
    throw ValidationError("reference evaluator expects a normalized formula");
  }
}

} // namespace

double robustness_reference(const FormulaPtr& phi, const PredicateTable& preds,
                            const Trace& x, long t) {
  if (!phi) throw ValidationError("null formula");
  if (t < x.first_time() || t > x.last_time()) {
    throw ValidationError("time outside trace domain");
  }
  return ref_eval(*normalize(phi), preds, x, t);
}

} // namespace stlrisk
