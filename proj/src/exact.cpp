#include "stlrisk/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stlrisk/rng.hpp"

namespace stlrisk {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

std::uint64_t sat_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t acc = 1;
  for (std::size_t i = 0; i < exp; ++i) acc = sat_mul(acc, base);
  return acc;
}

} // namespace

TimeWindow window(const Formula& phi, long t) {
  const HorizonPair h = horizon(phi);
  if (!h.future || !h.past) {
    throw ValidationError("window requires a bounded formula");
  }
  return TimeWindow{t - *h.past, t + *h.future};
}

void validate(const FiniteProcess& proc) {
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ExplicitProcess>) {
          if (p.signals.empty()) {
            throw ValidationError("explicit process needs at least one signal");
          }
          const std::size_t dim = p.signals.front().first.dim;
          std::vector<double> probs;
          for (const auto& [sig, prob] : p.signals) {
            sig.validate();
            if (sig.dim != dim) {
              throw ValidationError("explicit process signals have mixed dims");
            }
            if (!(prob >= 0.0)) {
              throw ValidationError("explicit process probability < 0");
            }
            probs.push_back(prob);
          }
          if (std::abs(stable_sum(probs) - 1.0) > 1e-12) {
            throw ValidationError("explicit process mass must be 1");
          }
        } else if constexpr (std::is_same_v<T, StaticParamsProcess>) {
          p.base.validate();
          for (const auto& pmf : p.params) pmf.validate();
        } else if constexpr (std::is_same_v<T, IidProcess>) {
          p.step.validate();
        } else {
          const std::size_t k = p.states.size();
          if (k == 0) throw ValidationError("markov process needs states");
          const std::size_t dim = p.states.front().size();
          if (dim == 0) throw ValidationError("markov state dim must be > 0");
          for (const auto& s : p.states) {
            if (s.size() != dim) {
              throw ValidationError("markov states have mixed dims");
            }
          }
          if (p.initial.size() != k || p.transition.size() != k) {
            throw ValidationError("markov initial/transition size mismatch");
          }
          if (std::abs(stable_sum(p.initial) - 1.0) > 1e-12) {
            throw ValidationError("markov initial mass must be 1");
          }
          for (const auto& row : p.transition) {
            if (row.size() != k) {
              throw ValidationError("markov transition row size mismatch");
            }
            std::vector<double> r = row;
            if (std::abs(stable_sum(r) - 1.0) > 1e-12) {
              throw ValidationError("markov transition rows must sum to 1");
            }
          }
        }
      },
      proc);
}

std::uint64_t support_count(const FiniteProcess& proc, const TimeWindow& w) {
  validate(proc);
  const std::size_t steps = w.length();
  auto nonzero = [](const std::vector<double>& probs) {
    return static_cast<std::uint64_t>(
        std::count_if(probs.begin(), probs.end(), [](double p) { return p > 0.0; }));
  };
  return std::visit(
      [&](const auto& p) -> std::uint64_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ExplicitProcess>) {
          std::vector<double> probs;
          for (const auto& s : p.signals) probs.push_back(s.second);
          return nonzero(probs);
        } else if constexpr (std::is_same_v<T, StaticParamsProcess>) {
          std::uint64_t acc = 1;
          for (const auto& pmf : p.params) acc = sat_mul(acc, nonzero(pmf.probs));
          return acc;
        } else if constexpr (std::is_same_v<T, IidProcess>) {
          return sat_pow(nonzero(p.step.probs), steps);
        } else {
          // Count nonzero-probability paths through the chain.
          const std::size_t k = p.states.size();
          std::vector<std::uint64_t> count(k);
          for (std::size_t s = 0; s < k; ++s) {
            count[s] = p.initial[s] > 0.0 ? 1 : 0;
          }
          for (std::size_t step = 1; step < steps; ++step) {
            std::vector<std::uint64_t> next(k, 0);
            for (std::size_t s = 0; s < k; ++s) {
              if (count[s] == 0) continue;
              for (std::size_t s2 = 0; s2 < k; ++s2) {
                if (p.transition[s][s2] > 0.0) {
                  const std::uint64_t add = count[s];
                  next[s2] = next[s2] > kSaturated - add ? kSaturated
                                                         : next[s2] + add;
                }
              }
            }
            count = std::move(next);
          }
          std::uint64_t total = 0;
          for (std::uint64_t c : count) {
            total = total > kSaturated - c ? kSaturated : total + c;
          }
          return total;
        }
      },
      proc);
}

namespace {

void check_cap(const FiniteProcess& proc, const TimeWindow& w,
               std::uint64_t cap) {
  const std::uint64_t count = support_count(proc, w);
  if (count > cap) throw EnumerationCapError(count, cap);
}

void enumerate_explicit(const ExplicitProcess& p, const TimeWindow& w,
                        const std::function<void(const Trace&, double)>& visit) {
  for (const auto& [sig, prob] : p.signals) {
    if (prob == 0.0) continue;
    if (sig.first_time() > w.begin || sig.last_time() < w.end) {
      throw ValidationError("explicit signal does not cover the window");
    }
    visit(sig, prob);
  }
}

// Builds the full state rows from the base trajectory and a fixed choice of
// parameter values; parameters are constant over the window.
struct StaticAssembler {
  const StaticParamsProcess& p;
  TimeWindow w;
  Trace buffer;

  explicit StaticAssembler(const StaticParamsProcess& proc, const TimeWindow& win)
      : p(proc), w(win) {
    if (p.base.first_time() > w.begin || p.base.last_time() < w.end) {
      throw ValidationError("base trajectory does not cover the window");
    }
    std::size_t dim = p.base.dim;
    for (const auto& pmf : p.params) dim += pmf.dim();
    buffer.t0 = w.begin;
    buffer.dt = p.base.dt;
    buffer.dim = dim;
    buffer.data.assign(w.length() * dim, 0.0);
    for (std::size_t i = 0; i < w.length(); ++i) {
      const auto src = p.base.state(
          static_cast<std::size_t>(w.begin - p.base.first_time()) + i);
      std::copy(src.begin(), src.end(), buffer.state(i).begin());
    }
  }

  void fill_params(const std::vector<std::size_t>& choice) {
    for (std::size_t i = 0; i < w.length(); ++i) {
      auto row = buffer.state(i);
      std::size_t off = p.base.dim;
      for (std::size_t j = 0; j < p.params.size(); ++j) {
        const auto& v = p.params[j].support[choice[j]];
        std::copy(v.begin(), v.end(), row.begin() + off);
        off += v.size();
      }
    }
  }
};

void enumerate_static(const StaticParamsProcess& p, const TimeWindow& w,
                      const std::function<void(const Trace&, double)>& visit) {
  StaticAssembler assembler(p, w);
  std::vector<std::size_t> choice(p.params.size(), 0);
  while (true) {
    double prob = 1.0;
    for (std::size_t j = 0; j < p.params.size(); ++j) {
      prob *= p.params[j].probs[choice[j]];
    }
    if (prob > 0.0) {
      assembler.fill_params(choice);
      visit(assembler.buffer, prob);
    }
    // odometer, last parameter fastest
    std::size_t j = p.params.size();
    while (j > 0) {
      --j;
      if (++choice[j] < p.params[j].size()) break;
      choice[j] = 0;
      if (j == 0) return;
    }
    if (p.params.empty()) return;
  }
}

void enumerate_iid(const IidProcess& p, const TimeWindow& w,
                   const std::function<void(const Trace&, double)>& visit) {
  const std::size_t steps = w.length();
  const std::size_t dim = p.step.dim();
  Trace buffer;
  buffer.t0 = w.begin;
  buffer.dim = dim;
  buffer.data.assign(steps * dim, 0.0);
  std::vector<std::size_t> choice(steps, 0);
  auto fill = [&](std::size_t i) {
    const auto& v = p.step.support[choice[i]];
    std::copy(v.begin(), v.end(), buffer.state(i).begin());
  };
  for (std::size_t i = 0; i < steps; ++i) fill(i);
  while (true) {
    double prob = 1.0;
    for (std::size_t i = 0; i < steps; ++i) prob *= p.step.probs[choice[i]];
    if (prob > 0.0) visit(buffer, prob);
    std::size_t i = steps;
    while (i > 0) {
      --i;
      if (++choice[i] < p.step.size()) {
        fill(i);
        break;
      }
      choice[i] = 0;
      fill(i);
      if (i == 0) return;
    }
  }
}

void enumerate_markov(const MarkovProcess& p, const TimeWindow& w,
                      const std::function<void(const Trace&, double)>& visit) {
  const std::size_t steps = w.length();
  const std::size_t k = p.states.size();
  const std::size_t dim = p.states.front().size();
  Trace buffer;
  buffer.t0 = w.begin;
  buffer.dim = dim;
  buffer.data.assign(steps * dim, 0.0);
  std::vector<std::size_t> path(steps, 0);

  auto fill = [&](std::size_t i) {
    const auto& v = p.states[path[i]];
    std::copy(v.begin(), v.end(), buffer.state(i).begin());
  };

  // Depth-first over nonzero-probability prefixes.
  std::function<void(std::size_t, double)> rec = [&](std::size_t depth,
                                                     double prob) {
    if (depth == steps) {
      visit(buffer, prob);
      return;
    }
    for (std::size_t s = 0; s < k; ++s) {
      const double step_p =
          depth == 0 ? p.initial[s] : p.transition[path[depth - 1]][s];
      if (step_p <= 0.0) continue;
      path[depth] = s;
      fill(depth);
      rec(depth + 1, prob * step_p);
    }
  };
  rec(0, 1.0);
}

} // namespace

void enumerate_signals(const FiniteProcess& proc, const TimeWindow& w,
                       const std::function<void(const Trace&, double)>& visit,
                       std::uint64_t cap) {
  check_cap(proc, w, cap);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ExplicitProcess>) {
          enumerate_explicit(p, w, visit);
        } else if constexpr (std::is_same_v<T, StaticParamsProcess>) {
          enumerate_static(p, w, visit);
        } else if constexpr (std::is_same_v<T, IidProcess>) {
          enumerate_iid(p, w, visit);
        } else {
          enumerate_markov(p, w, visit);
        }
      },
      proc);
}

DiscretePmf robustness_pmf(const FormulaPtr& phi, const PredicateTable& preds,
                           const FiniteProcess& proc, long t,
                           std::uint64_t cap) {
  if (!phi) throw ValidationError("null formula");
  if (!is_bounded(*phi)) {
    throw ValidationError("robustness pmf requires a bounded formula");
  }
  const TimeWindow w = window(*phi, t);
  Monitor monitor(phi, preds);
  std::vector<std::pair<double, double>> mass;
  enumerate_signals(
      proc, w,
      [&](const Trace& x, double prob) {
        mass.emplace_back(-monitor.robustness(x, t).value, prob);
      },
      cap);
  return DiscretePmf::aggregate(std::move(mass));
}

std::vector<Trace> sample_process(const FiniteProcess& proc, const TimeWindow& w,
                                  std::size_t n, std::uint64_t seed) {
  validate(proc);
  if (n == 0) throw ValidationError("sample count must be positive");
  const CounterRng rng(seed);

  // Inverse-CDF over an index set given cumulative weights.
  auto pick = [](const std::vector<double>& probs, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u <= acc) return i;
    }
    return probs.size() - 1;
  };

  std::vector<Trace> out;
  out.reserve(n);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ExplicitProcess>) {
          std::vector<double> probs;
          for (const auto& [sig, prob] : p.signals) probs.push_back(prob);
          for (std::size_t i = 0; i < n; ++i) {
            const auto& sig = p.signals[pick(probs, rng.uniform01(0, i))].first;
            if (sig.first_time() > w.begin || sig.last_time() < w.end) {
              throw ValidationError("explicit signal does not cover the window");
            }
            out.push_back(sig);
          }
        } else if constexpr (std::is_same_v<T, StaticParamsProcess>) {
          StaticAssembler assembler(p, w);
          std::vector<std::size_t> choice(p.params.size());
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p.params.size(); ++j) {
              choice[j] = pick(p.params[j].probs, rng.uniform01(j, i));
            }
            assembler.fill_params(choice);
            out.push_back(assembler.buffer);
          }
        } else if constexpr (std::is_same_v<T, IidProcess>) {
          const std::size_t steps = w.length();
          for (std::size_t i = 0; i < n; ++i) {
            Trace x;
            x.t0 = w.begin;
            x.dim = p.step.dim();
            x.data.reserve(steps * x.dim);
            for (std::size_t s = 0; s < steps; ++s) {
              const auto& v = p.step.support[pick(p.step.probs,
                                                  rng.uniform01(s, i))];
              x.data.insert(x.data.end(), v.begin(), v.end());
            }
            out.push_back(std::move(x));
          }
        } else {
          const std::size_t steps = w.length();
          for (std::size_t i = 0; i < n; ++i) {
            Trace x;
            x.t0 = w.begin;
            x.dim = p.states.front().size();
            x.data.reserve(steps * x.dim);
            std::size_t state = pick(p.initial, rng.uniform01(0, i));
            for (std::size_t s = 0; s < steps; ++s) {
              if (s > 0) {
                state = pick(p.transition[state], rng.uniform01(s, i));
              }
              const auto& v = p.states[state];
              x.data.insert(x.data.end(), v.begin(), v.end());
            }
            out.push_back(std::move(x));
          }
        }
      },
      proc);
  return out;
}

DiscretePmf discretize_gaussian(double sigma, int m, double gamma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  if (m < 2) throw ValidationError("discretization needs M >= 2");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");

  std::vector<double> grid(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    grid[static_cast<std::size_t>(i)] =
        -gamma + 2.0 * gamma * static_cast<double>(i) / static_cast<double>(m - 1);
  }
  for (double s : grid) {
    if (s == 0.0) {
      throw ValidationError("0 already lies on the uniform grid (odd M); "
                            "cannot add the center point twice");
    }
  }

  const auto cdf = [&](double s) {
    return 0.5 * std::erfc(-s / (sigma * std::numbers::sqrt2));
  };

  // Masses per the case split: the leftmost point takes the lower tail, the
  // rightmost the upper tail, negative points take the interval to their
  // left, positive points the interval to their right, and the added center
  // point takes twice the gap to its negative neighbor.
  std::vector<double> values;
  std::vector<double> probs;
  values.reserve(grid.size() + 1);
  probs.reserve(grid.size() + 1);

  const std::size_t last = grid.size() - 1;
  std::size_t largest_negative = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) largest_negative = i;
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] > 0.0 && (i == 0 || grid[i - 1] < 0.0)) {
      values.push_back(0.0);
      probs.push_back(2.0 * (cdf(0.0) - cdf(grid[largest_negative])));
    }
    double p;
    if (i == 0) {
      p = cdf(grid[i]);
    } else if (grid[i] < 0.0) {
      p = cdf(grid[i]) - cdf(grid[i - 1]);
    } else if (i == last) {
      p = 1.0 - cdf(grid[i]);
    } else {
      p = cdf(grid[i + 1]) - cdf(grid[i]);
    }
    values.push_back(grid[i]);
    probs.push_back(p);
  }

  return DiscretePmf(std::move(values), std::move(probs));
}

} // namespace stlrisk
