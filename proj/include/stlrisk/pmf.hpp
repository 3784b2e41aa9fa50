#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "stlrisk/errors.hpp"

namespace stlrisk {

/// Finite scalar distribution with strictly increasing support. Probabilities
/// must be nonnegative and sum to one within 1e-12.
class DiscretePmf {
public:
  DiscretePmf(std::vector<double> values, std::vector<double> probs);

  /// Builds a PMF from (value, probability) pairs, merging values that lie
  /// within `value_tol` of the previous (sorted) representative.
  static DiscretePmf aggregate(std::vector<std::pair<double, double>> samples,
                               double value_tol = 1e-9);

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return values_.size(); }

  /// P(Z <= z) by prefix sums over the support.
  double cdf(double z) const;
  double mean() const;

private:
  std::vector<double> values_;
  std::vector<double> probs_;
};

/// Finite distribution over fixed-dimension real vectors; support entries
/// must be distinct.
struct VectorPmf {
  std::vector<std::vector<double>> support;
  std::vector<double> probs;

  std::size_t size() const { return support.size(); }
  std::size_t dim() const { return support.empty() ? 0 : support.front().size(); }
  void validate() const;

  static VectorPmf from_scalar(const DiscretePmf& pmf);
  /// Independent product: support is the Cartesian product, probabilities
  /// multiply. Enumeration order: the last factor varies fastest.
  static VectorPmf product(const VectorPmf& a, const VectorPmf& b);
};

/// Compensated (Neumaier) summation; keeps PMF mass checks meaningful for
/// supports of a million entries.
double stable_sum(const std::vector<double>& xs);

} // namespace stlrisk
