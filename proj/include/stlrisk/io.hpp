#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stlrisk/exact.hpp"
#include "stlrisk/monitor.hpp"
#include "stlrisk/pmf.hpp"
#include "stlrisk/risk.hpp"

namespace stlrisk {

/// N independent realizations plus generation metadata.
struct TraceSet {
  std::vector<Trace> traces;
  std::string scenario;
  std::uint64_t seed = 0;

  std::size_t size() const { return traces.size(); }
  void validate() const;
};

/// CSV with header `t,x0,...,x{n-1}`; t is a consecutive integer index
/// column. Values are written with shortest round-trip formatting, so
/// write-then-read is exact.
Trace read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

/// Loads a trace set from a manifest JSON (list of relative CSV paths plus
/// a metadata block) or from a directory of *.csv files.
TraceSet read_traceset(const std::filesystem::path& dir_or_manifest);
/// Writes one CSV per trace plus manifest.json into `dir`.
void write_traceset(const TraceSet& set, const std::filesystem::path& dir);

/// Predicate table config: JSON array of {name, kind, params..., negated}.
PredicateTable read_predicates_json(const std::filesystem::path& path);
PredicateTable parse_predicates_json(const std::string& text);

/// Finite process config: {"kind": ..., kind-specific fields}. File
/// references are resolved relative to the config's directory.
FiniteProcess read_process_json(const std::filesystem::path& path);

/// CSV with header `value,prob`.
void write_pmf_csv(const DiscretePmf& pmf, const std::filesystem::path& path);
DiscretePmf read_pmf_csv(const std::filesystem::path& path);

struct Histogram {
  std::vector<double> edges; // bins + 1 entries
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [lo, hi] (defaults to the sample range); the last
/// bin includes its right edge.
Histogram make_histogram(const std::vector<double>& xs, std::size_t bins,
                         std::optional<double> lo = std::nullopt,
                         std::optional<double> hi = std::nullopt);
/// CSV with header `bin_left,bin_right,count`.
void write_histogram_csv(const Histogram& hist,
                         const std::filesystem::path& path);

/// Report file: {"formula", "t", "n", "satisfaction_rate"?, "reports": [...]}.
/// Non-finite bounds serialize as the strings "inf" / "-inf".
struct RiskRunSummary {
  std::string formula;
  long t = 0;
  std::size_t n = 0;
  std::optional<double> satisfaction_rate;
  std::vector<RiskReport> reports;
};

void write_risk_summary(const RiskRunSummary& summary,
                        const std::filesystem::path& path);
RiskRunSummary read_risk_summary(const std::filesystem::path& path);

/// Shortest exact decimal rendering of a double.
std::string format_double(double v);

} // namespace stlrisk
