#include "stlrisk/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stlrisk {

double stable_sum(const std::vector<double>& xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

DiscretePmf::DiscretePmf(std::vector<double> values, std::vector<double> probs)
    : values_(std::move(values)), probs_(std::move(probs)) {
  if (values_.empty() || values_.size() != probs_.size()) {
    throw ValidationError("pmf needs matching nonempty values and probs");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::isnan(values_[i])) throw ValidationError("pmf value is NaN");
    if (i > 0 && !(values_[i - 1] < values_[i])) {
      throw ValidationError("pmf support must be strictly increasing");
    }
    if (!(probs_[i] >= 0.0)) throw ValidationError("pmf probability < 0");
  }
  const double mass = stable_sum(probs_);
  if (std::abs(mass - 1.0) > 1e-12) {
    throw ValidationError("pmf mass is " + std::to_string(mass) +
                          ", expected 1 within 1e-12");
  }
}

DiscretePmf DiscretePmf::aggregate(std::vector<std::pair<double, double>> samples,
                                   double value_tol) {
  if (samples.empty()) throw ValidationError("cannot aggregate an empty pmf");
  std::sort(samples.begin(), samples.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> values;
  std::vector<std::vector<double>> groups;
  for (const auto& [v, p] : samples) {
    // exact equality first: v - back is NaN for matching infinities
    if (!values.empty() &&
        (v == values.back() || v - values.back() <= value_tol)) {
      groups.back().push_back(p);
    } else {
      values.push_back(v);
      groups.push_back({p});
    }
  }
  std::vector<double> probs;
  probs.reserve(groups.size());
  for (const auto& g : groups) probs.push_back(stable_sum(g));
  return DiscretePmf(std::move(values), std::move(probs));
}

double DiscretePmf::cdf(double z) const {
  double acc = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < values_.size() && values_[i] <= z; ++i) {
    const double t = acc + probs_[i];
    comp += (acc - t) + probs_[i];
    acc = t;
  }
  return acc + comp;
}

double DiscretePmf::mean() const {
  std::vector<double> terms(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    terms[i] = values_[i] * probs_[i];
  }
  return stable_sum(terms);
}

void VectorPmf::validate() const {
  if (support.empty() || support.size() != probs.size()) {
    throw ValidationError("vector pmf needs matching nonempty support/probs");
  }
  const std::size_t d = support.front().size();
  for (const auto& v : support) {
    if (v.size() != d) throw ValidationError("vector pmf has ragged support");
  }
  for (double p : probs) {
    if (!(p >= 0.0)) throw ValidationError("vector pmf probability < 0");
  }
  const double mass = stable_sum(probs);
  if (std::abs(mass - 1.0) > 1e-12) {
    throw ValidationError("vector pmf mass is " + std::to_string(mass) +
                          ", expected 1 within 1e-12");
  }
}

VectorPmf VectorPmf::from_scalar(const DiscretePmf& pmf) {
  VectorPmf out;
  out.support.reserve(pmf.size());
  for (double v : pmf.values()) out.support.push_back({v});
  out.probs = pmf.probs();
  return out;
}

VectorPmf VectorPmf::product(const VectorPmf& a, const VectorPmf& b) {
  VectorPmf out;
  out.support.reserve(a.size() * b.size());
  out.probs.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::vector<double> v = a.support[i];
      v.insert(v.end(), b.support[j].begin(), b.support[j].end());
      out.support.push_back(std::move(v));
      out.probs.push_back(a.probs[i] * b.probs[j]);
    }
  }
  return out;
}

} // namespace stlrisk
