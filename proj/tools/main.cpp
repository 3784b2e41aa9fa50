#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stlrisk/exact.hpp"
#include "stlrisk/io.hpp"
#include "stlrisk/monitor.hpp"
#include "stlrisk/risk.hpp"
#include "stlrisk/scenarios.hpp"

namespace fs = std::filesystem;
using namespace stlrisk;

namespace {

// Exit codes: 0 success, 1 usage, 2 parse/validation, 3 resource cap.
constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInvalid = 2;
constexpr int kCapExceeded = 3;

struct CommonOpts {
  std::string formula;
  std::string formula_file;
  std::string predicates_path;
  std::string traces_path;
  std::string scenario_path;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  long t = 0;
  unsigned threads = 0;
};

FormulaPtr load_formula(const CommonOpts& o) {
  if (!o.formula.empty()) return parse_formula(o.formula);
  if (o.formula_file.empty()) {
    throw ValidationError("provide --formula or --formula-file");
  }
  std::ifstream in(o.formula_file);
  if (!in) throw IoError("cannot open " + o.formula_file);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  // allow trailing newline / comment lines starting with '#'
  std::string cleaned;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line[0] == '#') continue;
    cleaned += line;
    cleaned += ' ';
  }
  return parse_formula(cleaned);
}

struct ScenarioConfig {
  std::string kind; // "rc" | "robot"
  RcCircuitSpec rc;
  DeliveryRobotSpec robot;
};

ScenarioConfig load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  ScenarioConfig cfg;
  cfg.kind = j.value("scenario", std::string{});
  if (cfg.kind == "rc") {
    cfg.rc.v0 = j.value("v0", cfg.rc.v0);
    cfg.rc.r_base = j.value("r_base", cfg.rc.r_base);
    cfg.rc.beta_a = j.value("beta_a", cfg.rc.beta_a);
    cfg.rc.beta_b = j.value("beta_b", cfg.rc.beta_b);
    cfg.rc.c = j.value("c", cfg.rc.c);
    cfg.rc.horizon_steps = j.value("horizon_steps", cfg.rc.horizon_steps);
    cfg.rc.dt = j.value("dt", cfg.rc.dt);
    cfg.rc.spec_time = j.value("spec_time", cfg.rc.spec_time);
  } else if (cfg.kind == "robot") {
    cfg.robot.trajectory = j.value("trajectory", cfg.robot.trajectory);
    cfg.robot.noise_std = j.value("noise_std", cfg.robot.noise_std);
    cfg.robot.disc_m = j.value("disc_m", cfg.robot.disc_m);
    cfg.robot.disc_gamma = j.value("disc_gamma", cfg.robot.disc_gamma);
  } else {
    throw IoError(path.string() + ": scenario must be 'rc' or 'robot'");
  }
  return cfg;
}

/// Built-in defaults when a scenario needs no spec file: `--scenario rc` /
/// `--scenario robot` are also accepted directly.
ScenarioConfig resolve_scenario(const std::string& arg) {
  if (arg == "rc" || arg == "robot") {
    ScenarioConfig cfg;
    cfg.kind = arg;
    return cfg;
  }
  return load_scenario(arg);
}

std::vector<Trace> generate_scenario_traces(const ScenarioConfig& cfg,
                                            std::size_t n, std::uint64_t seed) {
  if (cfg.kind == "rc") return rc_traces(cfg.rc, n, seed);
  return robot_traces(cfg.robot, n, seed);
}

/// Runs fn(i) for i in [0, n) across up to `threads` workers; results must
/// be written to preallocated, index-addressed storage for determinism.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  unsigned hw = threads > 0 ? threads : std::thread::hardware_concurrency();
  if (hw <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  hw = std::min<unsigned>(hw, 64);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (unsigned w = 0; w < hw; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct MonitorRun {
  std::vector<double> rho;
  std::vector<int> sat;
  bool truncated = false;
};

MonitorRun run_monitor(const FormulaPtr& phi, const PredicateTable& preds,
                       const std::vector<Trace>& traces, long t,
                       unsigned threads) {
  Monitor monitor(phi, preds);
  MonitorRun out;
  out.rho.resize(traces.size());
  out.sat.resize(traces.size());
  std::atomic<bool> truncated{false};
  parallel_for(traces.size(), threads, [&](std::size_t i) {
    const RobustnessValue rv = monitor.robustness(traces[i], t);
    out.rho[i] = rv.value;
    out.sat[i] = monitor.satisfaction(traces[i], t);
    if (rv.truncated) truncated.store(true, std::memory_order_relaxed);
  });
  out.truncated = truncated.load();
  return out;
}

std::vector<Trace> load_input_traces(const CommonOpts& o) {
  if (!o.traces_path.empty()) {
    const fs::path p = o.traces_path;
    if (!fs::is_directory(p) && p.extension() == ".csv") {
      return {read_trace_csv(p)};
    }
    return read_traceset(p).traces;
  }
  if (!o.scenario_path.empty()) {
    if (o.n == 0) {
      throw ValidationError("--scenario needs --n to pick the sample count");
    }
    return generate_scenario_traces(resolve_scenario(o.scenario_path), o.n,
                                    o.seed);
  }
  throw ValidationError("provide --traces or --scenario");
}

int cmd_monitor(const CommonOpts& o, const std::string& out_path) {
  const FormulaPtr phi = load_formula(o);
  const PredicateTable preds = o.predicates_path.empty()
                                   ? PredicateTable{}
                                   : read_predicates_json(o.predicates_path);
  const std::vector<Trace> traces = load_input_traces(o);
  const MonitorRun run = run_monitor(phi, preds, traces, o.t, o.threads);

  std::ofstream csv;
  if (!out_path.empty()) {
    csv.open(out_path);
    if (!csv) throw IoError("cannot open " + out_path + " for writing");
    csv << "trace,rho,sat\n";
  }
  for (std::size_t i = 0; i < traces.size(); ++i) {
    std::cout << "trace " << i << ": rho = " << format_double(run.rho[i])
              << "  sat = " << (run.sat[i] > 0 ? "+1" : "-1") << "\n";
    if (csv.is_open()) {
      csv << i << "," << format_double(run.rho[i]) << "," << run.sat[i] << "\n";
    }
  }
  if (run.truncated) {
    std::cout << "note: temporal windows were truncated at trace boundaries\n";
  }
  return kOk;
}

int cmd_risk(const CommonOpts& o, const std::vector<double>& betas,
             double delta, const std::vector<double>& clip_vals,
             std::vector<std::string> measures, const std::string& out_path,
             const std::string& hist_path, std::size_t hist_bins) {
  const FormulaPtr phi = load_formula(o);
  const PredicateTable preds = o.predicates_path.empty()
                                   ? PredicateTable{}
                                   : read_predicates_json(o.predicates_path);
  const std::vector<Trace> traces = load_input_traces(o);
  const MonitorRun run = run_monitor(phi, preds, traces, o.t, o.threads);

  std::optional<ClipBounds> clip;
  if (!clip_vals.empty()) {
    clip = ClipBounds{clip_vals[0], clip_vals[1]};
  }
  std::vector<double> zs(run.rho.size());
  for (std::size_t i = 0; i < run.rho.size(); ++i) {
    const double rho = clip ? stlrisk::clip(run.rho[i], clip->lo, clip->hi)
                            : run.rho[i];
    zs[i] = -rho;
  }
  // Z = -clip(rho, a, b) lies in [-b, -a].
  std::optional<ClipBounds> z_clip;
  if (clip) z_clip = ClipBounds{-clip->hi, -clip->lo};
  const SampleSet samples(std::move(zs), z_clip);

  if (measures.empty()) measures = {"var"};
  for (const auto& m : measures) {
    if ((m == "cvar" || m == "mean") && !clip) {
      throw ValidationError("measure '" + m +
                            "' requires --clip a b (bounded support)");
    }
  }

  RiskRunSummary summary;
  summary.formula = to_string(*phi);
  summary.t = o.t;
  summary.n = traces.size();
  double hits = 0;
  for (int s : run.sat) hits += s > 0 ? 1.0 : 0.0;
  summary.satisfaction_rate = hits / static_cast<double>(run.sat.size());

  for (const auto& m : measures) {
    if (m == "mean") {
      summary.reports.push_back(
          make_report(samples, RiskMeasure::Mean, std::nullopt, delta));
      continue;
    }
    const RiskMeasure measure = m == "var" ? RiskMeasure::VaR : RiskMeasure::CVaR;
    for (double beta : betas) {
      summary.reports.push_back(make_report(samples, measure, beta, delta));
    }
  }

  auto render_bound = [](double v) {
    return std::isinf(v) ? std::string("insufficient data") : format_double(v);
  };
  std::cout << "N = " << summary.n
            << "  satisfaction rate = " << *summary.satisfaction_rate << "\n";
  for (const RiskReport& r : summary.reports) {
    std::cout << to_string(r.measure);
    if (r.beta) std::cout << "_" << *r.beta;
    std::cout << ": empirical = " << format_double(r.empirical)
              << "  lower = " << render_bound(r.lower)
              << "  upper = " << render_bound(r.upper) << "\n";
  }

  if (!out_path.empty()) write_risk_summary(summary, out_path);
  if (!hist_path.empty()) {
    write_histogram_csv(make_histogram(samples.samples(), hist_bins), hist_path);
  }
  return kOk;
}

int cmd_exact(const CommonOpts& o, const std::string& process_path,
              const std::vector<double>& betas,
              std::vector<std::string> measures, std::uint64_t cap,
              const std::string& pmf_path, const std::string& out_path) {
  const FormulaPtr phi = load_formula(o);
  const PredicateTable preds = o.predicates_path.empty()
                                   ? PredicateTable{}
                                   : read_predicates_json(o.predicates_path);
  FiniteProcess proc = process_path == "robot"
                           ? robot_finite_process(DeliveryRobotSpec{})
                           : read_process_json(process_path);
  const DiscretePmf pmf = robustness_pmf(phi, preds, proc, o.t, cap);

  RiskRunSummary summary;
  summary.formula = to_string(*phi);
  summary.t = o.t;
  summary.n = pmf.size();
  if (measures.empty()) measures = {"var"};
  for (const auto& m : measures) {
    if (m == "mean") {
      RiskReport r;
      r.measure = RiskMeasure::Mean;
      r.n = pmf.size();
      r.empirical = r.lower = r.upper = exact_mean(pmf);
      summary.reports.push_back(r);
      std::cout << "mean: " << format_double(r.empirical) << "\n";
      continue;
    }
    for (double beta : betas) {
      RiskReport r;
      r.measure = m == "var" ? RiskMeasure::VaR : RiskMeasure::CVaR;
      r.beta = beta;
      r.n = pmf.size();
      const double v = m == "var" ? exact_var(pmf, beta) : exact_cvar(pmf, beta);
      r.empirical = r.lower = r.upper = v;
      summary.reports.push_back(r);
      std::cout << m << "_" << beta << ": " << format_double(v) << "\n";
    }
  }
  std::cout << "pmf support size = " << pmf.size() << "\n";
  if (!pmf_path.empty()) write_pmf_csv(pmf, pmf_path);
  if (!out_path.empty()) write_risk_summary(summary, out_path);
  return kOk;
}

int cmd_simulate(const std::string& scenario_arg, std::size_t n,
                 std::uint64_t seed, const std::string& out_dir) {
  const ScenarioConfig cfg = resolve_scenario(scenario_arg);
  TraceSet set;
  set.traces = generate_scenario_traces(cfg, n, seed);
  set.scenario = cfg.kind;
  set.seed = seed;
  write_traceset(set, out_dir);
  std::cout << "wrote " << set.traces.size() << " traces to " << out_dir << "\n";
  return kOk;
}

int cmd_discretize(double std_dev, double variance, int m, double gamma,
                   const std::string& out_path) {
  double sigma = std_dev;
  if (sigma == 0.0) {
    if (variance == 0.0) {
      throw ValidationError("provide --std or --var");
    }
    sigma = std::sqrt(variance);
  }
  const DiscretePmf pmf = discretize_gaussian(sigma, m, gamma);
  std::cout << "discretized pmf: " << pmf.size() << " support points, mass = "
            << format_double(stable_sum(pmf.probs())) << "\n";
  if (!out_path.empty()) write_pmf_csv(pmf, out_path);
  return kOk;
}

void add_common(CLI::App* app, CommonOpts& o, bool with_traces) {
  app->add_option("--formula", o.formula, "Formula text");
  app->add_option("--formula-file", o.formula_file, "File holding the formula");
  app->add_option("--predicates", o.predicates_path,
                  "Predicate table JSON file");
  if (with_traces) {
    app->add_option("--traces", o.traces_path,
                    "Trace CSV, manifest JSON, or directory of CSVs");
    app->add_option("--scenario", o.scenario_path,
                    "Built-in scenario ('rc', 'robot', or a spec JSON); "
                    "generates --n traces in memory");
    app->add_option("--n", o.n, "Number of traces to generate");
    app->add_option("--seed", o.seed, "Generation seed");
    app->add_option("--threads", o.threads,
                    "Max worker threads (default: hardware)");
  }
  app->add_option("--t", o.t, "Evaluation time (default 0)");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"STL robustness risk monitor"};
  app.require_subcommand(1);

  CommonOpts mon_opts, risk_opts, exact_opts;
  std::string mon_out;

  CLI::App* mon = app.add_subcommand("monitor",
                                     "Evaluate robustness and satisfaction per trace");
  add_common(mon, mon_opts, true);
  mon->add_option("--out", mon_out, "Per-trace CSV output");

  std::vector<double> risk_betas{0.9};
  double risk_delta = 0.01;
  std::vector<double> clip_vals;
  std::vector<std::string> risk_measures;
  std::string risk_out, hist_out;
  std::size_t hist_bins = 50;
  CLI::App* risk = app.add_subcommand("risk",
                                      "Empirical risk with confidence bounds");
  add_common(risk, risk_opts, true);
  risk->add_option("--beta", risk_betas, "Risk levels (repeatable)");
  risk->add_option("--delta", risk_delta, "Confidence parameter (default 0.01)");
  risk->add_option("--clip", clip_vals, "Clip bounds a b for rho")
      ->expected(2);
  risk->add_option("--measure", risk_measures, "var | cvar | mean (repeatable)")
      ->check(CLI::IsMember({"var", "cvar", "mean"}));
  risk->add_option("--out", risk_out, "Risk report JSON");
  risk->add_option("--hist", hist_out, "Histogram CSV of Z = -rho");
  risk->add_option("--hist-bins", hist_bins, "Histogram bin count");

  std::string process_path;
  std::vector<double> exact_betas{0.9};
  std::vector<std::string> exact_measures;
  std::uint64_t cap = kDefaultEnumerationCap;
  std::string pmf_out, exact_out;
  CLI::App* exact = app.add_subcommand("exact",
                                       "Exact risk of a finite-state process");
  add_common(exact, exact_opts, false);
  exact->add_option("--process", process_path,
                    "Process JSON (or 'robot' for the built-in)")
      ->required();
  exact->add_option("--beta", exact_betas, "Risk levels (repeatable)");
  exact->add_option("--measure", exact_measures,
                    "var | cvar | mean (repeatable)")
      ->check(CLI::IsMember({"var", "cvar", "mean"}));
  exact->add_option("--cap", cap, "Enumeration support cap");
  exact->add_option("--out-pmf", pmf_out, "PMF CSV output");
  exact->add_option("--out", exact_out, "Report JSON output");

  std::string sim_scenario, sim_out;
  std::size_t sim_n = 100;
  std::uint64_t sim_seed = 0;
  CLI::App* sim = app.add_subcommand("simulate",
                                     "Generate scenario traces to disk");
  sim->add_option("--scenario", sim_scenario,
                  "'rc', 'robot', or a scenario spec JSON")
      ->required();
  sim->add_option("--n", sim_n, "Trace count");
  sim->add_option("--seed", sim_seed, "Seed");
  sim->add_option("--out", sim_out, "Output directory")->required();

  double disc_std = 0.0, disc_var = 0.0, disc_gamma = 0.55;
  int disc_m = 32;
  std::string disc_out;
  CLI::App* disc = app.add_subcommand("discretize",
                                      "Gaussian discretization to a PMF");
  disc->add_option("--std", disc_std, "Standard deviation");
  disc->add_option("--var", disc_var, "Variance (alternative to --std)");
  disc->add_option("--m", disc_m, "Grid point count (even)");
  disc->add_option("--gamma", disc_gamma, "Grid half-width");
  disc->add_option("--out", disc_out, "PMF CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (mon->parsed()) return cmd_monitor(mon_opts, mon_out);
    if (risk->parsed()) {
      return cmd_risk(risk_opts, risk_betas, risk_delta, clip_vals,
                      risk_measures, risk_out, hist_out, hist_bins);
    }
    if (exact->parsed()) {
      return cmd_exact(exact_opts, process_path, exact_betas, exact_measures,
                       cap, pmf_out, exact_out);
    }
    if (sim->parsed()) return cmd_simulate(sim_scenario, sim_n, sim_seed, sim_out);
    if (disc->parsed()) {
      return cmd_discretize(disc_std, disc_var, disc_m, disc_gamma, disc_out);
    }
  } catch (const EnumerationCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCapExceeded;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kUsage;
}
