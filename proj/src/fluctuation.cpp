#include "srw/fluctuation.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "srw/numerics.hpp"
#include "srw/parallel.hpp"

namespace srw {
namespace {

constexpr double kUnitTolerance = 1e-12;

double resolved_budget(const EnsembleSpec& spec) {
  return spec.step_budget > 0.0 ? spec.step_budget : configured_step_budget();
}

void check_budget(double paths, double horizon, double budget) {
  if (paths * horizon > budget)
    throw std::length_error("ensemble needs " + std::to_string(paths * horizon) +
                            " steps, budget is " + std::to_string(budget) +
                            " (REINFORCE_WALK_BUDGET)");
}

}  // namespace

double configured_step_budget() {
  const char* env = std::getenv("REINFORCE_WALK_BUDGET");
  if (env == nullptr || *env == '\0') return kDefaultStepBudget;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0))
    throw std::invalid_argument(std::string("REINFORCE_WALK_BUDGET is not a positive number: ") +
                                env);
  return v;
}

void validate_ensemble_spec(const EnsembleSpec& spec) {
  if (!(spec.p > 0.5 && spec.p < 1.0))
    throw std::invalid_argument("ensembles require p in (1/2, 1), got " + std::to_string(spec.p));
  validate_checkpoints(spec.checkpoints, spec.horizon);
  if (spec.checkpoints.front() < kMinCheckpoint)
    throw std::invalid_argument("every checkpoint must be >= " + std::to_string(kMinCheckpoint));
  if (spec.horizon < kMinHorizonRatio * spec.checkpoints.back())
    throw std::invalid_argument("horizon must be at least " + std::to_string(kMinHorizonRatio) +
                                " times the last checkpoint");
  if (spec.paths < 2) throw std::invalid_argument("an ensemble needs at least 2 paths");
  for (const auto& a : spec.projection_directions) {
    if (a.size() != spec.distribution.dim())
      throw std::invalid_argument("projection direction has the wrong dimension");
  }
  check_budget(static_cast<double>(spec.paths), static_cast<double>(spec.horizon),
               resolved_budget(spec));
}

std::vector<double> FluctuationEnsemble::column(std::size_t checkpoint, std::size_t coord) const {
  std::vector<double> out(paths());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = f(r, checkpoint, coord);
  return out;
}

std::vector<double> FluctuationEnsemble::rows(std::size_t checkpoint) const {
  std::vector<double> out(paths() * dim);
  for (std::size_t r = 0; r < paths(); ++r)
    for (std::size_t j = 0; j < dim; ++j) out[r * dim + j] = f(r, checkpoint, j);
  return out;
}

WEstimate estimate_W(const WalkPath& path, const Vector& mean) {
  if (mean.size() != path.dim) throw std::invalid_argument("estimate_W: mean has wrong dimension");
  const double a = a_seq(path.p, path.horizon);
  const double g = std::exp(log_gamma(1.0 + path.p));
  WEstimate w;
  w.martingale.resize(path.dim);
  w.l_proxy.resize(path.dim);
  for (std::size_t j = 0; j < path.dim; ++j) {
    w.martingale[j] =
        (path.terminal_sum[j] - static_cast<double>(path.horizon) * mean[j]) / a;
    w.l_proxy[j] = w.martingale[j] / g;
  }
  return w;
}

Vector fluctuation_statistic(const WalkPath& path, std::uint64_t n, const Vector& w_proxy,
                             const Vector& mean, double p) {
  const auto row = path.row_of(n);
  if (!row) throw std::invalid_argument("checkpoint " + std::to_string(n) + " was not recorded");
  if (w_proxy.size() != path.dim || mean.size() != path.dim)
    throw std::invalid_argument("fluctuation_statistic: dimension mismatch");
  Vector out(path.dim, 0.0);
  if (n == path.horizon) return out;
  const double nd = static_cast<double>(n);
  const double an = a_seq(p, n);
  const double root = std::sqrt(nd);
  const auto s = path.sum_at(*row);
  for (std::size_t j = 0; j < path.dim; ++j)
    out[j] = (s[j] - nd * mean[j] - an * w_proxy[j]) / root;
  return out;
}

FluctuationEnsemble run_ensemble_with(const EnsembleSpec& spec, const PathSimulator& simulate) {
  validate_ensemble_spec(spec);
  FluctuationEnsemble ens;
  ens.spec = spec;
  ens.dim = spec.distribution.dim();
  const std::size_t k = spec.checkpoints.size();
  const std::size_t dim = ens.dim;
  ens.F.assign(spec.paths * k * dim, 0.0);
  ens.W.assign(spec.paths * dim, 0.0);

  const ExactMoments exact(spec.p, spec.horizon);
  ens.v_exact.resize(k);
  for (std::size_t c = 0; c < k; ++c) ens.v_exact[c] = exact.v_exact(spec.checkpoints[c], spec.horizon);
  ens.limit_variance = limit_fluctuation_variance(spec.p);

  const Vector& mean = spec.distribution.mean();
  parallel_for(spec.paths, spec.workers, [&](std::size_t r) {
    RandomStream stream = derive_stream(spec.master_seed, r);
    const WalkPath path = simulate(stream);
    if (path.dim != dim || path.horizon != spec.horizon)
      throw std::logic_error("simulator returned a path of the wrong shape");
    const WEstimate w = estimate_W(path, mean);
    std::copy(w.martingale.begin(), w.martingale.end(), ens.W.begin() + r * dim);
    for (std::size_t c = 0; c < k; ++c) {
      const Vector f = fluctuation_statistic(path, spec.checkpoints[c], w.martingale, mean, spec.p);
      for (std::size_t j = 0; j < dim; ++j) {
        if (!std::isfinite(f[j])) throw std::runtime_error("non-finite fluctuation value");
        ens.F[(r * k + c) * dim + j] = f[j];
      }
    }
  });
  return ens;
}

FluctuationEnsemble run_ensemble(const EnsembleSpec& spec) {
  const StepDistribution& d = spec.distribution;
  return run_ensemble_with(spec, [&](RandomStream& stream) {
    return simulate_reinforced_path(d, spec.p, spec.horizon, spec.checkpoints, stream);
  });
}

std::vector<WalkPath> simulate_paths(const StepDistribution& d, double p, std::uint64_t horizon,
                                     const std::vector<std::uint64_t>& checkpoints,
                                     std::uint64_t paths, std::uint64_t master_seed,
                                     unsigned workers) {
  validate_checkpoints(checkpoints, horizon);
  check_budget(static_cast<double>(paths), static_cast<double>(horizon), configured_step_budget());
  std::vector<WalkPath> out(paths);
  parallel_for(paths, workers, [&](std::size_t r) {
    RandomStream stream = derive_stream(master_seed, r);
    out[r] = simulate_reinforced_path(d, p, horizon, checkpoints, stream);
  });
  return out;
}

Projection cramer_wold_project(const FluctuationEnsemble& ens, const Vector& direction) {
  if (direction.size() != ens.dim)
    throw std::invalid_argument("projection direction has the wrong dimension");
  double norm2 = 0.0;
  for (double x : direction) norm2 += x * x;
  if (std::abs(std::sqrt(norm2) - 1.0) > kUnitTolerance)
    throw std::invalid_argument("projection direction must be a unit vector");

  Projection out;
  out.direction = direction;
  const double sigma_a = ens.spec.distribution.covariance().quadratic_form(direction);
  for (std::size_t c = 0; c < ens.checkpoint_count(); ++c) {
    std::vector<double> s(ens.paths());
    for (std::size_t r = 0; r < s.size(); ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < ens.dim; ++j) acc += direction[j] * ens.f(r, c, j);
      s[r] = acc;
    }
    out.samples.push_back(std::move(s));
    out.target_variance.push_back(sigma_a * ens.v_exact[c]);
  }
  return out;
}

std::vector<Vector> random_unit_directions(std::size_t dim, std::size_t count,
                                           std::uint64_t master_seed) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  RandomStream stream = derive_stream(master_seed, stream_role::projection_directions);
  std::vector<Vector> out;
  while (out.size() < count) {
    Vector a(dim);
    double norm2 = 0.0;
    for (double& x : a) {
      x = stream.standard_normal();
      norm2 += x * x;
    }
    if (norm2 < 1e-8) continue;
    const double norm = std::sqrt(norm2);
    for (double& x : a) x /= norm;
    out.push_back(std::move(a));
  }
  return out;
}

LlnDiagnostic lln_diagnostic(double p, std::uint64_t n) {
  return LlnDiagnostic{lln_exact(p, n), std::nullopt, std::nullopt};
}

LlnDiagnostic lln_diagnostic(const StepDistribution& d, double p, std::uint64_t n,
                             std::uint64_t paths, std::uint64_t master_seed, unsigned workers) {
  if (paths < 2) throw std::invalid_argument("need at least 2 paths");
  LlnDiagnostic out = lln_diagnostic(p, n);
  double trace = 0.0;
  for (std::size_t j = 0; j < d.dim(); ++j) trace += d.covariance()(j, j);
  if (!(trace > 0.0)) throw std::invalid_argument("step law is degenerate");

  const auto walks = simulate_paths(d, p, n, {n}, paths, master_seed, workers);
  std::vector<double> ratios(paths);
  const double nd = static_cast<double>(n);
  for (std::size_t r = 0; r < paths; ++r) {
    double sq = 0.0;
    const auto s = walks[r].sum_at(0);
    for (std::size_t j = 0; j < d.dim(); ++j) {
      const double c = s[j] - nd * d.mean()[j];
      sq += c * c;
    }
    ratios[r] = sq / (nd * nd * trace);
  }
  const SampleMoments m = sample_moments(ratios);
  out.simulated = m.mean;
  out.standard_error = std::sqrt(m.variance / static_cast<double>(paths));
  return out;
}

ResidualCheck residual_fluctuation_check(const StepDistribution& base, double p, double b,
                                         std::uint64_t n, std::uint64_t horizon,
                                         std::uint64_t paths, std::uint64_t master_seed,
                                         unsigned workers) {
  const Truncation t = truncate_distribution(base, b);
  EnsembleSpec spec;
  spec.distribution = residual_distribution(base, b);
  spec.p = p;
  spec.checkpoints = {n};
  spec.horizon = horizon;
  spec.paths = paths;
  spec.master_seed = master_seed;
  spec.workers = workers;
  const FluctuationEnsemble ens = run_ensemble(spec);

  ResidualCheck out;
  out.zeta_b = t.zeta_b;
  out.v_exact = ens.v_exact[0];
  out.target_variance = t.zeta_b * t.zeta_b * out.v_exact;
  out.samples = ens.column(0, 0);
  out.sample_variance = sample_moments(out.samples).variance;
  out.standard_error = out.target_variance * std::sqrt(2.0 / static_cast<double>(paths - 1));
  if (out.standard_error > 0.0)
    out.z = (out.sample_variance - out.target_variance) / out.standard_error;
  else
    out.z = out.sample_variance == 0.0 ? 0.0 : INFINITY;
  return out;
}

void write_ensemble_csv(const FluctuationEnsemble& ens, std::ostream& os) {
  os << "path_id,checkpoint_n,coord,F_value,W_est\n";
  for (std::size_t r = 0; r < ens.paths(); ++r)
    for (std::size_t c = 0; c < ens.checkpoint_count(); ++c)
      for (std::size_t j = 0; j < ens.dim; ++j)
        os << r << ',' << ens.spec.checkpoints[c] << ',' << j + 1 << ','
           << format_real(ens.f(r, c, j)) << ',' << format_real(ens.W[r * ens.dim + j]) << '\n';
}

nlohmann::json ensemble_summary_json(const FluctuationEnsemble& ens) {
  nlohmann::json out = nlohmann::json::array();
  const Matrix& sigma = ens.spec.distribution.covariance();
  for (std::size_t c = 0; c < ens.checkpoint_count(); ++c) {
    nlohmann::json coords = nlohmann::json::array();
    for (std::size_t j = 0; j < ens.dim; ++j) {
      const auto col = ens.column(c, j);
      const SampleMoments m = sample_moments(col);
      coords.push_back({{"coord", j + 1},
                        {"sample_mean", m.mean},
                        {"sample_variance", m.variance},
                        {"target_variance", sigma(j, j) * ens.v_exact[c]},
                        {"limit_variance", sigma(j, j) * ens.limit_variance}});
    }
    out.push_back({{"n", ens.spec.checkpoints[c]},
                   {"v_exact", ens.v_exact[c]},
                   {"limit_variance_unit", ens.limit_variance},
                   {"coordinates", coords}});
  }
  return out;
}

nlohmann::json to_json(const TestReport& report) {
  nlohmann::json j;
  j["name"] = report.name;
  j["n"] = report.sample_size;
  j["statistic"] = report.statistic;
  j["p_value"] = report.p_value ? nlohmann::json(*report.p_value) : nlohmann::json(nullptr);
  j["target"] = report.target;
  j["tolerance"] = report.tolerance;
  j["pass"] = report.pass;
  j["seed"] = report.seed ? nlohmann::json(*report.seed) : nlohmann::json(nullptr);
  return j;
}

}  // namespace srw
