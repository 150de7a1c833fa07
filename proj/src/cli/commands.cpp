#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "srw/bridge.hpp"
#include "srw/cli.hpp"
#include "srw/fluctuation.hpp"
#include "srw/numerics.hpp"
#include "srw/parallel.hpp"

namespace srw::cli {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kPmfTolerance = 1e-12;
constexpr std::size_t kRandomDirections = 8;

template <class F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  } catch (const std::length_error& e) {
    throw UsageError(e.what());
  }
}

StepDistribution parse_dist(const RunConfig& cfg) {
  return as_usage([&] { return make_distribution(cfg.dist); });
}

double require_p(const RunConfig& cfg, double lo, double hi, bool open, const char* why) {
  if (!cfg.p) throw UsageError("--p is required");
  const double p = *cfg.p;
  const bool ok = open ? (p > lo && p < hi) : (p >= lo && p <= hi);
  if (!ok) {
    std::ostringstream os;
    os << "--p " << p << " outside " << (open ? "(" : "[") << lo << ", " << hi
       << (open ? ")" : "]") << ": " << why;
    throw UsageError(os.str());
  }
  return p;
}

json header(const RunConfig& cfg) {
  json j;
  j["schema"] = kSchemaVersion;
  j["version"] = kVersion;
  j["command"] = cfg.command;
  j["config"] = cfg.echo();
  j["master_seed"] = cfg.seed;
  return j;
}

json timing(Clock::time_point start, unsigned workers) {
  const std::chrono::duration<double> dt = Clock::now() - start;
  return {{"seconds", dt.count()}, {"workers", resolve_workers(workers)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> standardized(std::vector<double> xs, double variance) {
  const double sd = std::sqrt(variance);
  for (double& x : xs) x /= sd;
  return xs;
}

std::string label(const std::string& what, std::uint64_t n, const std::string& tail) {
  return what + "[n=" + std::to_string(n) + "," + tail + "]";
}

std::string direction_label(const Vector& a) {
  std::ostringstream os;
  os << "a=(";
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << format_real(a[i]);
  os << ")";
  return os.str();
}

// KS against N(0,1) after standardizing by the exact variance.
TestReport ks_standardized(const std::vector<double>& sample, double variance, double alpha,
                           std::string name, std::uint64_t seed) {
  TestReport r;
  if (variance > 0.0) {
    r = ks_test_normal(standardized(sample, variance), 1.0, alpha, std::move(name));
  } else {
    r.name = std::move(name);
    r.sample_size = sample.size();
    r.pass = std::all_of(sample.begin(), sample.end(), [](double x) { return x == 0.0; });
  }
  r.seed = seed;
  return r;
}

struct TestLog {
  json entries = json::array();
  bool all_pass = true;
  void add(const TestReport& r) {
    entries.push_back(to_json(r));
    all_pass = all_pass && r.pass;
  }
};

int exit_for(bool pass) { return pass ? exit_pass : exit_test_failure; }

}  // namespace

EnumerationCheck enumeration_cross_check(const ExactPmf& pmf, const StepDistribution& d, double p,
                                         std::uint64_t n, double tolerance) {
  EnumerationCheck c;
  const PmfMoments m = pmf_moments(pmf);
  const std::size_t dim = d.dim();
  if (m.mean.size() != dim) throw std::invalid_argument("pmf dimension does not match the step law");
  c.mean = m.mean;
  c.covariance = m.covariance;
  const double a = a_seq(p, n);
  c.exact_covariance = d.covariance().scaled(a * a * exact_second_moment(p, n));
  double worst = std::abs(m.total_mass - 1.0);
  for (std::size_t i = 0; i < dim; ++i) {
    worst = std::max(worst, std::abs(m.mean[i] - static_cast<double>(n) * d.mean()[i]));
    for (std::size_t j = 0; j < dim; ++j)
      worst = std::max(worst, std::abs(m.covariance(i, j) - c.exact_covariance(i, j)));
  }
  c.max_error = worst;
  c.pass = worst <= tolerance;
  return c;
}

CommandResult cmd_simulate(const RunConfig& cfg) {
  const auto start = Clock::now();
  const StepDistribution d = parse_dist(cfg);
  const double p = require_p(cfg, 0.0, 1.0, false, "reinforcement parameter");
  if (!cfg.horizon || *cfg.horizon < 1) throw UsageError("--horizon >= 1 is required");
  const std::uint64_t N = *cfg.horizon;
  if (static_cast<double>(N) > configured_step_budget())
    throw UsageError("horizon exceeds REINFORCE_WALK_BUDGET");
  const auto checkpoints = cfg.checkpoints.empty() ? default_checkpoints(N) : cfg.checkpoints;
  as_usage([&] { validate_checkpoints(checkpoints, N); });

  RandomStream stream = derive_stream(cfg.seed, 0);
  const WalkPath path = simulate_reinforced_path(d, p, N, checkpoints, stream);

  CommandResult res;
  std::ostringstream os;
  if (cfg.format == "csv") {
    os << "n";
    for (std::size_t j = 1; j <= path.dim; ++j) os << ",S_" << j;
    for (std::size_t j = 1; j <= path.dim; ++j) os << ",V_" << j;
    os << ",M_terminal_flag,a_n\n";
    for (std::size_t r = 0; r < path.checkpoints.size(); ++r) {
      const std::uint64_t n = path.checkpoints[r];
      os << n;
      for (double s : path.sum_at(r)) os << ',' << format_real(s);
      for (double v : path.squared_sum_at(r)) os << ',' << format_real(v);
      os << ',' << (n == N ? 1 : 0) << ',' << format_real(a_seq(p, n)) << '\n';
    }
  } else {
    json j = header(cfg);
    json rows = json::array();
    for (std::size_t r = 0; r < path.checkpoints.size(); ++r) {
      const auto s = path.sum_at(r);
      const auto v = path.squared_sum_at(r);
      rows.push_back({{"n", path.checkpoints[r]},
                      {"S", std::vector<double>(s.begin(), s.end())},
                      {"V", std::vector<double>(v.begin(), v.end())},
                      {"a_n", a_seq(p, path.checkpoints[r])}});
    }
    j["rows"] = rows;
    j["terminal_martingale"] = path.terminal_martingale;
    j["timing"] = timing(start, 1);
    os << dump(j);
  }
  std::ostringstream diag;
  diag << "M_N =";
  for (double m : path.terminal_martingale) diag << ' ' << format_real(m);
  res.output = os.str();
  res.diagnostics = diag.str();
  return res;
}

CommandResult cmd_fluct(const RunConfig& cfg) {
  const auto start = Clock::now();
  EnsembleSpec spec;
  spec.distribution = parse_dist(cfg);
  spec.p = require_p(cfg, 0.5, 1.0, true, "fluctuations are Gaussian only for p in (1/2, 1)");
  spec.checkpoints = cfg.checkpoints.empty() ? std::vector<std::uint64_t>{1024} : cfg.checkpoints;
  spec.horizon = cfg.horizon.value_or(131072);
  spec.paths = cfg.paths.value_or(4000);
  spec.master_seed = cfg.seed;
  spec.workers = cfg.workers;
  const std::size_t dim = spec.distribution.dim();
  if (dim >= 2) {
    for (std::size_t j = 0; j < dim; ++j) {
      Vector e(dim, 0.0);
      e[j] = 1.0;
      spec.projection_directions.push_back(e);
    }
    for (auto& a : random_unit_directions(dim, kRandomDirections, cfg.seed))
      spec.projection_directions.push_back(std::move(a));
  }
  as_usage([&] { validate_ensemble_spec(spec); });
  if (spec.paths < 30) throw UsageError("--paths must be >= 30 for the moment tests");

  const FluctuationEnsemble ens = run_ensemble(spec);
  const Matrix& sigma = spec.distribution.covariance();
  TestLog log;
  json moments = json::array();
  for (std::size_t c = 0; c < ens.checkpoint_count(); ++c) {
    const std::uint64_t n = spec.checkpoints[c];
    for (std::size_t j = 0; j < dim; ++j) {
      const double var = sigma(j, j) * ens.v_exact[c];
      const auto col = ens.column(c, j);
      const std::string coord = "coord=" + std::to_string(j + 1);
      log.add(ks_standardized(col, var, cfg.alpha, label("ks_F", n, coord), cfg.seed));
      MomentZTest mz = moment_z_test(col, 0.0, var, kDefaultZBound, label("moments_F", n, coord));
      mz.report.seed = cfg.seed;
      log.add(mz.report);
      moments.push_back({{"n", n},
                         {"coord", j + 1},
                         {"sample_mean", mz.moments.mean},
                         {"sample_variance", mz.moments.variance},
                         {"target_variance", var},
                         {"relative_variance_error", var > 0 ? mz.moments.variance / var - 1.0 : 0.0},
                         {"z_mean", mz.z_mean},
                         {"z_variance", mz.z_variance}});
    }
    for (const auto& a : spec.projection_directions) {
      const Projection proj = cramer_wold_project(ens, a);
      log.add(ks_standardized(proj.samples[c], proj.target_variance[c], cfg.alpha,
                              label("ks_projection", n, direction_label(a)), cfg.seed));
    }
  }

  json j = header(cfg);
  j["p"] = spec.p;
  j["dim"] = dim;
  j["covariance"] = sigma.data();
  j["limit_variance"] = limit_fluctuation_variance(spec.p);
  j["checkpoints"] = ensemble_summary_json(ens);
  j["moments"] = moments;
  j["projection_directions"] = spec.projection_directions;
  j["tests"] = log.entries;
  j["pass"] = log.all_pass;
  j["timing"] = timing(start, cfg.workers);

  CommandResult res;
  res.exit_code = exit_for(log.all_pass);
  if (cfg.format == "csv") {
    std::ostringstream os;
    write_ensemble_csv(ens, os);
    res.output = os.str();
  } else {
    res.output = dump(j);
  }
  res.diagnostics = std::string("fluct: ") + (log.all_pass ? "all tests pass" : "TEST FAILURE");
  return res;
}

CommandResult cmd_bridge(const RunConfig& cfg) {
  const auto start = Clock::now();
  const std::vector<double> grid =
      cfg.grid.empty() ? std::vector<double>{0.25, 0.5, 0.75} : cfg.grid;
  as_usage([&] { validate_grid(grid); });
  const std::uint64_t paths = cfg.paths.value_or(4000);
  if (paths < 100) throw UsageError("--paths must be >= 100 for the covariance comparison");
  TestLog log;
  json j = header(cfg);
  j["grid"] = grid;

  if (cfg.classical) {
    if (cfg.p && *cfg.p != 0.0) throw UsageError("--classical runs the p = 0 walk; drop --p");
    if (cfg.checkpoints.size() > 1) throw UsageError("--classical takes a single --checkpoints value");
    const std::uint64_t n = cfg.checkpoints.empty() ? 1024 : cfg.checkpoints.front();
    if (n < 1) throw UsageError("sample size must be >= 1");
    as_usage([&] {
      if (static_cast<double>(paths) * static_cast<double>(n) > configured_step_budget())
        throw std::length_error("run exceeds REINFORCE_WALK_BUDGET");
    });
    CovarianceComparison cmp = classical_bridge_check(grid, n, paths, cfg.seed, cfg.workers);
    cmp.report.seed = cfg.seed;
    log.add(cmp.report);
    j["n"] = n;
    j["covariance_table"] = covariance_table_json(cmp, brownian_bridge_covariance(grid), paths);
  } else {
    const double p = require_p(cfg, 0.5, 1.0, true, "the bridge limit needs p in (1/2, 1)");
    const auto checkpoints =
        cfg.checkpoints.empty() ? std::vector<std::uint64_t>{1024} : cfg.checkpoints;
    const std::uint64_t N = cfg.horizon.value_or(131072);
    EnsembleSpec probe;
    probe.distribution = make_indicator_grid(grid);
    probe.p = p;
    probe.checkpoints = checkpoints;
    probe.horizon = N;
    probe.paths = paths;
    as_usage([&] { validate_ensemble_spec(probe); });

    const BridgeEnsemble ens =
        bridge_fluctuation_ensemble(grid, p, checkpoints, N, paths, cfg.seed, cfg.workers);
    const Matrix bb = brownian_bridge_covariance(grid);
    json per_checkpoint = json::array();
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      const std::uint64_t n = checkpoints[c];
      const Matrix target = bb.scaled(ens.fluct.v_exact[c]);
      CovarianceComparison cmp = covariance_compare(ens.fluct.rows(c), grid.size(), target,
                                                    kDefaultZBound, label("covariance_F", n, "grid"));
      cmp.report.seed = cfg.seed;
      log.add(cmp.report);
      for (std::size_t k = 0; k < grid.size(); ++k)
        log.add(ks_standardized(ens.fluct.column(c, k), target(k, k), cfg.alpha,
                                label("ks_F", n, "x=" + format_real(grid[k])), cfg.seed));
      per_checkpoint.push_back({{"n", n},
                                {"v_exact", ens.fluct.v_exact[c]},
                                {"covariance_table", covariance_table_json(cmp, target, paths)}});
    }
    j["p"] = p;
    j["horizon"] = N;
    j["limit_covariance"] = bridge_fdd_covariance(grid, p).data();
    j["checkpoints"] = per_checkpoint;
    if (cfg.format == "csv") {
      std::ostringstream os;
      write_bridge_csv(ens, checkpoints.size() - 1, os);
      CommandResult res;
      res.exit_code = exit_for(log.all_pass);
      res.output = os.str();
      res.diagnostics = std::string("bridge: ") + (log.all_pass ? "all tests pass" : "TEST FAILURE");
      return res;
    }
  }
  j["tests"] = log.entries;
  j["pass"] = log.all_pass;
  j["timing"] = timing(start, cfg.workers);
  CommandResult res;
  res.exit_code = exit_for(log.all_pass);
  res.output = dump(j);
  res.diagnostics = std::string("bridge: ") + (log.all_pass ? "all tests pass" : "TEST FAILURE");
  return res;
}

CommandResult cmd_exact(const RunConfig& cfg) {
  const auto start = Clock::now();
  const double p = require_p(cfg, 0.0, 1.0, false, "reinforcement parameter");
  if (cfg.checkpoints.empty() && !cfg.variance_limit)
    throw UsageError("give --n indices and/or --variance-limit");
  for (std::uint64_t n : cfg.checkpoints)
    if (n < 1) throw UsageError("indices must be >= 1");
  if (cfg.horizon) {
    for (std::uint64_t n : cfg.checkpoints)
      if (n > *cfg.horizon) throw UsageError("--horizon must be >= every index");
    if (static_cast<double>(*cfg.horizon) > configured_step_budget())
      throw UsageError("horizon exceeds REINFORCE_WALK_BUDGET");
  }
  if (cfg.variance_limit && !(p > 0.5 && p <= 1.0))
    throw UsageError("--variance-limit requires p in (1/2, 1]");

  json rows = json::array();
  std::ostringstream csv;
  csv << "n,a_n,gamma_n,m_n,second_moment,v_exact,N,centering_discrepancy,lln_ratio\n";
  for (std::uint64_t n : cfg.checkpoints) {
    const std::uint64_t N = cfg.horizon.value_or(128 * n);
    const double a = a_seq(p, n);
    const double m = exact_second_moment(p, n);
    const double v = v_exact(p, n, N);
    const double disc = centering_discrepancy(p, n);
    const double lln = lln_exact(p, n);
    rows.push_back({{"n", n},
                    {"a_n", a},
                    {"gamma_n", gamma_step(p, n)},
                    {"m_n", m},
                    {"second_moment", a * a * m},
                    {"v_exact", v},
                    {"N", N},
                    {"centering_discrepancy", disc},
                    {"lln_ratio", lln}});
    csv << n << ',' << format_real(a) << ',' << format_real(gamma_step(p, n)) << ','
        << format_real(m) << ',' << format_real(a * a * m) << ',' << format_real(v) << ',' << N
        << ',' << format_real(disc) << ',' << format_real(lln) << '\n';
  }

  json j = header(cfg);
  j["p"] = p;
  j["rows"] = rows;
  if (p > 0.5 && p <= 1.0) j["limit_variance"] = limit_fluctuation_variance(p);
  std::ostringstream diag;
  if (cfg.variance_limit) {
    j["variance_limit"] = limit_fluctuation_variance(p);
    diag << "variance limit 1/(2p-1) = " << format_real(limit_fluctuation_variance(p));
    if (p < 1.0) {
      try {
        const LimitVarianceBound b = limit_variance_W(p, 1e-3);
        j["W_second_moment"] = {{"lower", b.lower},
                                {"upper", b.upper},
                                {"estimate", b.estimate},
                                {"horizon", b.horizon}};
      } catch (const std::runtime_error& e) {
        j["W_second_moment"] = {{"error", e.what()}};
      }
    }
  }
  j["timing"] = timing(start, 1);

  CommandResult res;
  if (cfg.format == "csv") {
    res.output = csv.str();
  } else {
    res.output = dump(j);
  }
  res.diagnostics = diag.str();
  return res;
}

CommandResult cmd_enumerate(const RunConfig& cfg) {
  const auto start = Clock::now();
  const StepDistribution d = parse_dist(cfg);
  if (!d.support()) throw UsageError("enumeration needs a finitely supported step law");
  const double p = require_p(cfg, 0.0, 1.0, false, "reinforcement parameter");
  if (cfg.checkpoints.size() != 1) throw UsageError("give exactly one --n");
  const std::uint64_t n = cfg.checkpoints.front();
  if (n < 1 || n > 10) throw UsageError("--n must lie in [1, 10]");

  const ExactPmf pmf = as_usage([&] { return enumerate_exact_pmf(d, p, n); });
  const EnumerationCheck check = enumeration_cross_check(pmf, d, p, n);

  std::ostringstream diag;
  diag << "mean =";
  for (double m : check.mean) diag << ' ' << format_real(m);
  diag << "; variance =";
  for (std::size_t i = 0; i < d.dim(); ++i) diag << ' ' << format_real(check.covariance(i, i));
  diag << "; exact a_n^2 m_n sigma^2 =";
  for (std::size_t i = 0; i < d.dim(); ++i) diag << ' ' << format_real(check.exact_covariance(i, i));
  diag << "; max error " << format_real(check.max_error) << (check.pass ? " (ok)" : " (MISMATCH)");

  CommandResult res;
  res.exit_code = exit_for(check.pass);
  res.diagnostics = diag.str();
  if (cfg.format == "csv") {
    std::ostringstream os;
    if (d.dim() == 1) {
      os << "value";
    } else {
      for (std::size_t j = 1; j <= d.dim(); ++j) os << (j > 1 ? "," : "") << "value_" << j;
    }
    os << ",probability\n";
    for (const auto& [value, prob] : pmf) {
      for (std::size_t j = 0; j < value.size(); ++j) os << (j ? "," : "") << format_real(value[j]);
      os << ',' << format_real(prob) << '\n';
    }
    res.output = os.str();
  } else {
    json j = header(cfg);
    json rows = json::array();
    for (const auto& [value, prob] : pmf) rows.push_back({{"value", value}, {"probability", prob}});
    j["pmf"] = rows;
    j["mean"] = check.mean;
    j["covariance"] = check.covariance.data();
    j["exact_covariance"] = check.exact_covariance.data();
    j["max_error"] = check.max_error;
    j["pass"] = check.pass;
    j["timing"] = timing(start, 1);
    res.output = dump(j);
  }
  return res;
}

CommandResult cmd_equivalence(const RunConfig& cfg) {
  const auto start = Clock::now();
  const StepDistribution d = parse_dist(cfg);
  const double p = require_p(cfg, 0.0, 1.0, false, "reinforcement parameter");
  const bool lattice = d.kind() == StepKind::lattice;
  if (d.kind() != StepKind::rademacher && !lattice)
    throw UsageError("equivalence compares rademacher with the elephant walk or lattice:D with its "
                     "multidimensional version");
  const std::size_t dim = d.dim();
  const double q = cfg.q.value_or(lattice ? merw_param_map(p, dim) : erw_param_map(p));
  if (!(q >= 0.0 && q <= 1.0)) throw UsageError("--q must lie in [0, 1]");
  std::vector<std::uint64_t> ns = cfg.checkpoints;
  if (ns.empty()) ns = {1, 2, 3, 4};
  for (std::uint64_t n : ns)
    if (n < 1 || n > 4) throw UsageError("exact equivalence runs for n in [1, 4]");

  json rows = json::array();
  double worst = 0.0;
  for (std::uint64_t n : ns) {
    const ExactPmf reinforced = enumerate_exact_pmf(d, p, n);
    const ExactPmf elephant = lattice ? enumerate_merw_pmf(q, dim, n) : enumerate_erw_pmf(q, n);
    const double diff = pmf_max_difference(reinforced, elephant);
    worst = std::max(worst, diff);
    rows.push_back({{"n", n}, {"max_abs_difference", diff}});
  }
  const bool pass = worst <= kPmfTolerance;
  json j = header(cfg);
  j["p"] = p;
  j["q"] = q;
  j["dim"] = dim;
  j["comparisons"] = rows;
  j["max_abs_difference"] = worst;
  j["tolerance"] = kPmfTolerance;
  j["pass"] = pass;
  j["timing"] = timing(start, 1);

  CommandResult res;
  res.exit_code = exit_for(pass);
  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "n,max_abs_difference\n";
    for (const auto& r : rows)
      os << r["n"].get<std::uint64_t>() << ',' << format_real(r["max_abs_difference"].get<double>())
         << '\n';
    res.output = os.str();
  } else {
    res.output = dump(j);
  }
  std::ostringstream diag;
  diag << (lattice ? "MERW" : "ERW") << " q = " << format_real(q) << ": max |difference| "
       << format_real(worst) << (pass ? " (equal)" : " (DIFFERENT)");
  res.diagnostics = diag.str();
  return res;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Step-reinforced random walks: simulation and verification", "srwalk"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Settings flags;
  std::string config_path;
  struct Command {
    const char* name;
    const char* help;
    CommandResult (*fn)(const RunConfig&);
  };
  const Command commands[] = {
      {"simulate", "simulate one reinforced path (CSV of checkpoints)", cmd_simulate},
      {"fluct", "fluctuation ensemble with Gaussianity and variance tests", cmd_fluct},
      {"bridge", "reinforced empirical process against the bridge covariance", cmd_bridge},
      {"exact", "exact tables: a_n, second moments, exact variances", cmd_exact},
      {"enumerate", "exact law of S_n for a finite step law", cmd_enumerate},
      {"equivalence", "exact comparison with the elephant random walk", cmd_equivalence},
  };
  const char* value_keys[][2] = {
      {"dist", "step law: rademacher, gaussian:M,SD, lattice:D, indicator:x,..., discrete:PATH"},
      {"p", "reinforcement parameter"},
      {"q", "elephant memory parameter (overrides the parameter map)"},
      {"grid", "comma-separated points in (0,1)"},
      {"checkpoints", "comma-separated checkpoints n_1 < ... < n_k"},
      {"n", "comma-separated indices (alias of --checkpoints)"},
      {"horizon", "horizon N"},
      {"paths", "number of paths R"},
      {"seed", "master seed"},
      {"workers", "worker threads (0 = all cores)"},
      {"out", "output file (default stdout)"},
      {"format", "csv or json"},
      {"alpha", "test level (default 0.005)"},
  };

  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    for (const auto& kv : value_keys) {
      const std::string key = kv[0];
      sub->add_option_function<std::string>(
          "--" + key, [&flags, key](const std::string& v) { flags[key] = v; }, kv[1]);
    }
    sub->add_option("--config", config_path, "flat key = value file; flags override it");
    sub->add_flag_callback("--variance-limit", [&flags] { flags["variance-limit"] = "true"; },
                           "exact: report the limit variance and E(W^2)");
    sub->add_flag_callback("--classical", [&flags] { flags["classical"] = "true"; },
                           "bridge: classical p = 0 covariance check");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_pass : exit_usage;
  }

  const Command* chosen = nullptr;
  for (const auto& c : commands)
    if (app.got_subcommand(c.name)) chosen = &c;

  try {
    Settings settings;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot read config file " + config_path);
      settings = parse_config(in);
      settings.erase("config");
    }
    if (flags.count("checkpoints") && flags.count("n"))
      throw UsageError("give either --checkpoints or --n, not both");
    for (const auto& [k, v] : flags) {
      if (k == "checkpoints") settings.erase("n");
      if (k == "n") settings.erase("checkpoints");
      settings[k] = v;
    }
    const RunConfig cfg = make_run_config(chosen->name, settings);
    const CommandResult res = chosen->fn(cfg);
    if (cfg.out.empty()) {
      out << res.output;
    } else {
      std::ofstream file(cfg.out, std::ios::binary);
      if (!file) throw UsageError("cannot write " + cfg.out);
      file << res.output;
      if (!file) throw std::runtime_error("write failed: " + cfg.out);
    }
    if (!res.diagnostics.empty()) err << res.diagnostics << '\n';
    return res.exit_code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
}

}  // namespace srw::cli
