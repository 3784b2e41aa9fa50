#include "stlrisk/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace stlrisk {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw IoError("failed to format double");
  return std::string(buf, ptr);
}

void TraceSet::validate() const {
  if (traces.empty()) throw ValidationError("trace set must be nonempty");
  const std::size_t dim = traces.front().dim;
  for (const Trace& t : traces) {
    t.validate();
    if (t.dim != dim) {
      throw ValidationError("trace set has mixed state dimensions");
    }
  }
}

namespace {

std::string location(const fs::path& path, std::size_t row, std::size_t col) {
  std::ostringstream os;
  os << path.string() << ":" << row;
  if (col > 0) os << ":col " << col;
  return os.str();
}

double parse_double_field(const std::string& field, const fs::path& path,
                          std::size_t row, std::size_t col) {
  double out;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end) {
    throw IoError("malformed number '" + field + "' at " +
                  location(path, row, col));
  }
  return out;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

json load_json(const fs::path& path) {
  auto in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return j;
}

} // namespace

Trace read_trace_csv(const fs::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_row(line);
  if (header.size() < 2 || header[0] != "t") {
    throw IoError("malformed header at " + location(path, 1, 1) +
                  ": expected t,x0,...");
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "x" + std::to_string(i - 1)) {
      throw IoError("malformed header at " + location(path, 1, i + 1) +
                    ": expected column x" + std::to_string(i - 1) + ", got '" +
                    header[i] + "'");
    }
  }
  const std::size_t dim = header.size() - 1;

  Trace trace;
  trace.dim = dim;
  std::size_t row = 1;
  bool first = true;
  long expected_t = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != dim + 1) {
      throw IoError("ragged row at " + location(path, row, 0) + ": expected " +
                    std::to_string(dim + 1) + " fields, got " +
                    std::to_string(fields.size()));
    }
    const double t_val = parse_double_field(fields[0], path, row, 1);
    if (std::floor(t_val) != t_val) {
      throw IoError("non-integer time index at " + location(path, row, 1));
    }
    const long t = static_cast<long>(t_val);
    if (first) {
      trace.t0 = t;
      expected_t = t;
      first = false;
    }
    if (t != expected_t) {
      throw IoError("non-monotone or gapped time index at " +
                    location(path, row, 1) + ": expected " +
                    std::to_string(expected_t));
    }
    ++expected_t;
    for (std::size_t i = 0; i < dim; ++i) {
      const double v = parse_double_field(fields[i + 1], path, row, i + 2);
      if (std::isnan(v)) {
        throw IoError("NaN value at " + location(path, row, i + 2));
      }
      trace.data.push_back(v);
    }
  }
  if (trace.data.empty()) {
    throw IoError(path.string() + ": trace has no rows");
  }
  return trace;
}

void write_trace_csv(const Trace& trace, const fs::path& path) {
  trace.validate();
  auto out = open_output(path);
  out << "t";
  for (std::size_t i = 0; i < trace.dim; ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << trace.t0 + static_cast<long>(k);
    for (double v : trace.state(k)) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TraceSet read_traceset(const fs::path& dir_or_manifest) {
  TraceSet set;
  std::vector<fs::path> files;
  double dt = 0.0;
  if (fs::is_directory(dir_or_manifest)) {
    for (const auto& entry : fs::directory_iterator(dir_or_manifest)) {
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw IoError("no .csv traces in directory " + dir_or_manifest.string());
    }
  } else {
    const json j = load_json(dir_or_manifest);
    if (!j.contains("traces") || !j["traces"].is_array() ||
        j["traces"].empty()) {
      throw IoError(dir_or_manifest.string() +
                    ": manifest needs a nonempty 'traces' array");
    }
    const fs::path base = dir_or_manifest.parent_path();
    for (const auto& rel : j["traces"]) {
      files.push_back(base / rel.get<std::string>());
    }
    if (j.contains("metadata")) {
      const auto& m = j["metadata"];
      set.scenario = m.value("scenario", std::string{});
      set.seed = m.value("seed", std::uint64_t{0});
      dt = m.value("dt", 0.0);
    }
  }
  for (const auto& f : files) {
    Trace t = read_trace_csv(f);
    if (dt > 0.0) t.dt = dt;
    if (!set.traces.empty() && t.dim != set.traces.front().dim) {
      throw IoError("trace dimension mismatch in " + f.string() + ": got " +
                    std::to_string(t.dim) + ", expected " +
                    std::to_string(set.traces.front().dim));
    }
    set.traces.push_back(std::move(t));
  }
  set.validate();
  return set;
}

void write_traceset(const TraceSet& set, const fs::path& dir) {
  set.validate();
  fs::create_directories(dir);
  json manifest;
  manifest["metadata"] = {{"scenario", set.scenario},
                          {"seed", set.seed},
                          {"n", set.traces.size()},
                          {"dt", set.traces.front().dt}};
  std::vector<std::string> names;
  char buf[32];
  for (std::size_t i = 0; i < set.traces.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "trace_%06zu.csv", i);
    names.emplace_back(buf);
    write_trace_csv(set.traces[i], dir / names.back());
  }
  manifest["traces"] = names;
  auto out = open_output(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

namespace {

std::vector<CenterCoord> parse_center(const json& arr, const fs::path& path) {
  if (!arr.is_array()) {
    throw IoError(path.string() + ": predicate 'center' must be an array");
  }
  std::vector<CenterCoord> out;
  for (const auto& e : arr) {
    if (e.is_number()) {
      out.push_back(CenterCoord::constant(e.get<double>()));
    } else if (e.is_object() && e.contains("idx")) {
      out.push_back(CenterCoord::state_ref(e["idx"].get<std::size_t>()));
    } else {
      throw IoError(path.string() +
                    ": center entries must be numbers or {\"idx\": i}");
    }
  }
  return out;
}

PredicateTable predicates_from_json(const json& j, const fs::path& path) {
  if (!j.is_array()) {
    throw IoError(path.string() + ": predicate config must be a JSON array");
  }
  PredicateTable table;
  for (const auto& e : j) {
    if (!e.contains("name") || !e.contains("kind")) {
      throw IoError(path.string() + ": predicate entries need name and kind");
    }
    const std::string name = e["name"].get<std::string>();
    const std::string kind = e["kind"].get<std::string>();
    const bool negated = e.value("negated", false);
    PredicateDef def;
    if (kind == "halfspace" || kind == "affine") {
      if (!e.contains("w") || !e.contains("b")) {
        throw IoError(path.string() + ": predicate '" + name +
                      "' needs fields w and b");
      }
      auto w = e["w"].get<std::vector<double>>();
      const double b = e["b"].get<double>();
      def = kind == "halfspace" ? PredicateDef::halfspace(std::move(w), b, negated)
                                : PredicateDef::affine(std::move(w), b, negated);
    } else if (kind == "ball2" || kind == "ballinf") {
      if (!e.contains("indices") || !e.contains("center") ||
          !e.contains("radius")) {
        throw IoError(path.string() + ": predicate '" + name +
                      "' needs indices, center, radius");
      }
      auto idx = e["indices"].get<std::vector<std::size_t>>();
      auto center = parse_center(e["center"], path);
      const double radius = e["radius"].get<double>();
      def = kind == "ball2"
                ? PredicateDef::ball2(std::move(idx), std::move(center), radius,
                                      negated)
                : PredicateDef::ballinf(std::move(idx), std::move(center),
                                        radius, negated);
    } else {
      throw IoError(path.string() + ": unknown predicate kind '" + kind + "'");
    }
    if (!table.emplace(name, std::move(def)).second) {
      throw IoError(path.string() + ": duplicate predicate '" + name + "'");
    }
  }
  return table;
}

} // namespace

PredicateTable read_predicates_json(const fs::path& path) {
  return predicates_from_json(load_json(path), path);
}

PredicateTable parse_predicates_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("inline predicates: ") + e.what());
  }
  return predicates_from_json(j, "<inline>");
}

namespace {

Trace trace_from_json_or_file(const json& spec, const fs::path& base_dir,
                              const fs::path& cfg) {
  if (spec.is_string()) {
    return read_trace_csv(base_dir / spec.get<std::string>());
  }
  if (spec.is_object() && spec.contains("values")) {
    Trace t;
    t.t0 = spec.value("t0", 0L);
    t.dt = spec.value("dt", 1.0);
    const auto rows = spec["values"].get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw IoError(cfg.string() + ": inline trace is empty");
    t.dim = rows.front().size();
    for (const auto& r : rows) {
      if (r.size() != t.dim) {
        throw IoError(cfg.string() + ": inline trace rows are ragged");
      }
      t.data.insert(t.data.end(), r.begin(), r.end());
    }
    t.validate();
    return t;
  }
  throw IoError(cfg.string() +
                ": trace must be a CSV path or {t0, dt, values}");
}

DiscretePmf scalar_pmf_from_json(const json& spec, const fs::path& base_dir,
                                 const fs::path& cfg) {
  if (spec.is_string()) return read_pmf_csv(base_dir / spec.get<std::string>());
  if (spec.is_object() && spec.contains("values") && spec.contains("probs")) {
    return DiscretePmf(spec["values"].get<std::vector<double>>(),
                       spec["probs"].get<std::vector<double>>());
  }
  throw IoError(cfg.string() +
                ": scalar pmf must be a CSV path or {values, probs}");
}

VectorPmf vector_pmf_from_json(const json& spec, const fs::path& base_dir,
                               const fs::path& cfg) {
  if (spec.is_object() && spec.contains("product")) {
    const auto& factors = spec["product"];
    if (!factors.is_array() || factors.empty()) {
      throw IoError(cfg.string() + ": 'product' must be a nonempty array");
    }
    VectorPmf acc =
        VectorPmf::from_scalar(scalar_pmf_from_json(factors[0], base_dir, cfg));
    for (std::size_t i = 1; i < factors.size(); ++i) {
      acc = VectorPmf::product(
          acc, VectorPmf::from_scalar(
                   scalar_pmf_from_json(factors[i], base_dir, cfg)));
    }
    return acc;
  }
  if (spec.is_object() && spec.contains("support") && spec.contains("probs")) {
    VectorPmf v;
    v.support = spec["support"].get<std::vector<std::vector<double>>>();
    v.probs = spec["probs"].get<std::vector<double>>();
    v.validate();
    return v;
  }
  throw IoError(cfg.string() +
                ": parameter pmf must be {product: [...]} or {support, probs}");
}

} // namespace

FiniteProcess read_process_json(const fs::path& path) {
  const json j = load_json(path);
  const fs::path base = path.parent_path();
  const std::string kind = j.value("kind", std::string{});
  if (kind == "explicit") {
    ExplicitProcess p;
    for (const auto& e : j.at("signals")) {
      p.signals.emplace_back(trace_from_json_or_file(e.at("trace"), base, path),
                             e.at("prob").get<double>());
    }
    FiniteProcess proc = std::move(p);
    validate(proc);
    return proc;
  }
  if (kind == "static-params") {
    StaticParamsProcess p;
    p.base = trace_from_json_or_file(j.at("base"), base, path);
    for (const auto& e : j.at("params")) {
      p.params.push_back(vector_pmf_from_json(e, base, path));
    }
    FiniteProcess proc = std::move(p);
    validate(proc);
    return proc;
  }
  if (kind == "iid-per-step") {
    IidProcess p;
    p.step = vector_pmf_from_json(j.at("step"), base, path);
    FiniteProcess proc = std::move(p);
    validate(proc);
    return proc;
  }
  if (kind == "markov") {
    MarkovProcess p;
    p.states = j.at("states").get<std::vector<std::vector<double>>>();
    p.initial = j.at("initial").get<std::vector<double>>();
    p.transition = j.at("transition").get<std::vector<std::vector<double>>>();
    FiniteProcess proc = std::move(p);
    validate(proc);
    return proc;
  }
  throw IoError(path.string() + ": unknown process kind '" + kind + "'");
}

void write_pmf_csv(const DiscretePmf& pmf, const fs::path& path) {
  auto out = open_output(path);
  out << "value,prob\n";
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    out << format_double(pmf.values()[i]) << ","
        << format_double(pmf.probs()[i]) << "\n";
  }
}

DiscretePmf read_pmf_csv(const fs::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "value,prob") {
    throw IoError("malformed header at " + location(path, 1, 1) +
                  ": expected value,prob");
  }
  std::vector<double> values;
  std::vector<double> probs;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 2) {
      throw IoError("ragged row at " + location(path, row, 0));
    }
    values.push_back(parse_double_field(fields[0], path, row, 1));
    probs.push_back(parse_double_field(fields[1], path, row, 2));
  }
  return DiscretePmf(std::move(values), std::move(probs));
}

Histogram make_histogram(const std::vector<double>& xs, std::size_t bins,
                         std::optional<double> lo, std::optional<double> hi) {
  if (xs.empty()) throw ValidationError("histogram needs samples");
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  double a = lo ? *lo : *std::min_element(xs.begin(), xs.end());
  double b = hi ? *hi : *std::max_element(xs.begin(), xs.end());
  if (a == b) b = a + 1.0; // degenerate range: single bin around the value
  if (!(a < b)) throw ValidationError("histogram range requires lo < hi");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.counts.assign(bins, 0);
  for (double x : xs) {
    if (x < a || x > b) continue;
    auto k = static_cast<std::size_t>((x - a) / (b - a) * static_cast<double>(bins));
    if (k >= bins) k = bins - 1;
    ++h.counts[k];
  }
  return h;
}

void write_histogram_csv(const Histogram& hist, const fs::path& path) {
  auto out = open_output(path);
  out << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << format_double(hist.edges[i]) << "," << format_double(hist.edges[i + 1])
        << "," << hist.counts[i] << "\n";
  }
}

namespace {

json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double bound_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw IoError("unknown bound string '" + s + "'");
  }
  return j.get<double>();
}

} // namespace

void write_risk_summary(const RiskRunSummary& summary, const fs::path& path) {
  json j;
  j["formula"] = summary.formula;
  j["t"] = summary.t;
  j["n"] = summary.n;
  if (summary.satisfaction_rate) {
    j["satisfaction_rate"] = *summary.satisfaction_rate;
  }
  json reports = json::array();
  for (const RiskReport& r : summary.reports) {
    json e;
    e["measure"] = to_string(r.measure);
    if (r.beta) e["beta"] = *r.beta;
    e["delta"] = r.delta;
    e["n"] = r.n;
    e["empirical"] = r.empirical;
    e["lower"] = bound_to_json(r.lower);
    e["upper"] = bound_to_json(r.upper);
    reports.push_back(std::move(e));
  }
  j["reports"] = std::move(reports);
  auto out = open_output(path);
  out << j.dump(2) << "\n";
}

RiskRunSummary read_risk_summary(const fs::path& path) {
  const json j = load_json(path);
  RiskRunSummary s;
  s.formula = j.value("formula", std::string{});
  s.t = j.value("t", 0L);
  s.n = j.value("n", std::size_t{0});
  if (j.contains("satisfaction_rate")) {
    s.satisfaction_rate = j["satisfaction_rate"].get<double>();
  }
  for (const auto& e : j.at("reports")) {
    RiskReport r;
    const auto m = e.at("measure").get<std::string>();
    if (m == "var") r.measure = RiskMeasure::VaR;
    else if (m == "cvar") r.measure = RiskMeasure::CVaR;
    else if (m == "mean") r.measure = RiskMeasure::Mean;
    else throw IoError(path.string() + ": unknown measure '" + m + "'");
    if (e.contains("beta")) r.beta = e["beta"].get<double>();
    r.delta = e.at("delta").get<double>();
    r.n = e.at("n").get<std::size_t>();
    r.empirical = e.at("empirical").get<double>();
    r.lower = bound_from_json(e.at("lower"));
    r.upper = bound_from_json(e.at("upper"));
    s.reports.push_back(r);
  }
  return s;
}

} // namespace stlrisk
