#pragma once

// Monte Carlo ensembles of the fluctuation statistic
//   F_n = (S_n - n E X - a_n W) / sqrt(n),
// with W proxied by the same path's terminal martingale M_N. Since
// F_n = -(a_n/sqrt(n)) (M_N - M_n), its covariance is exactly
// v_exact(p, n, N) * Sigma, which is what every test here targets.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "srw/matrix.hpp"
#include "srw/reinforce.hpp"
#include "srw/stat_tests.hpp"
#include "srw/step_distribution.hpp"

namespace srw {

/// Minimum horizon-to-checkpoint ratio and minimum checkpoint for ensembles.
inline constexpr std::uint64_t kMinHorizonRatio = 64;
inline constexpr std::uint64_t kMinCheckpoint = 16;

/// Total simulated steps allowed when neither EnsembleSpec::step_budget nor the
/// REINFORCE_WALK_BUDGET environment variable sets one.
inline constexpr double kDefaultStepBudget = 2e10;

/// Budget from REINFORCE_WALK_BUDGET, else kDefaultStepBudget.
double configured_step_budget();

struct EnsembleSpec {
  StepDistribution distribution = make_rademacher();
  double p = 0.75;
  std::vector<std::uint64_t> checkpoints;
  std::uint64_t horizon = 0;
  std::uint64_t paths = 0;
  std::uint64_t master_seed = 0;
  std::vector<Vector> projection_directions;
  unsigned workers = 0;          // 0 = all hardware threads
  double step_budget = 0.0;      // 0 = configured_step_budget()
};

/// Throws std::invalid_argument when an EnsembleSpec breaks an ensemble invariant
/// (p in (1/2, 1), N >= 64 n_k, n_1 >= 16, R >= 2), and std::length_error
/// when R N exceeds the step budget.
void validate_ensemble_spec(const EnsembleSpec& spec);

struct FluctuationEnsemble {
  EnsembleSpec spec;
  std::size_t dim = 1;
  std::vector<double> F;            // [path][checkpoint][coord]
  std::vector<double> W;            // [path][coord], terminal martingale M_N
  std::vector<double> v_exact;      // per checkpoint, unit variance
  double limit_variance = 0.0;      // 1/(2p - 1)

  std::size_t paths() const { return spec.paths; }
  std::size_t checkpoint_count() const { return spec.checkpoints.size(); }
  double f(std::size_t path, std::size_t checkpoint, std::size_t coord) const {
    return F[(path * checkpoint_count() + checkpoint) * dim + coord];
  }
  /// F samples of one coordinate at one checkpoint, in path order.
  std::vector<double> column(std::size_t checkpoint, std::size_t coord) const;
  /// All coordinates at one checkpoint as rows (paths x dim).
  std::vector<double> rows(std::size_t checkpoint) const;
};

struct WEstimate {
  Vector martingale;  // M_N
  Vector l_proxy;     // M_N / Gamma(p + 1), the proxy for lim S_n / n^p
};

/// Finite-horizon proxy for W from a simulated path.
WEstimate estimate_W(const WalkPath& path, const Vector& mean);

/// (S_n - n mean - a_n W)/sqrt(n) at a recorded checkpoint n.
/// Throws std::invalid_argument if n was not recorded.
Vector fluctuation_statistic(const WalkPath& path, std::uint64_t n, const Vector& w_proxy,
                             const Vector& mean, double p);

/// Simulates one path from its own stream.
using PathSimulator = std::function<WalkPath(RandomStream&)>;

/// Runs R paths with stream i = derive_stream(seed, i) and assembles F and W.
/// Output is independent of the worker count.
FluctuationEnsemble run_ensemble(const EnsembleSpec& spec);

/// As run_ensemble, but paths come from a custom simulator. Its steps must have
/// the mean and covariance of spec.distribution, which is used for centering
/// and for the exact targets.
FluctuationEnsemble run_ensemble_with(const EnsembleSpec& spec, const PathSimulator& simulate);

/// Simulates R independent paths (stream i for path i) in path order.
std::vector<WalkPath> simulate_paths(const StepDistribution& d, double p, std::uint64_t horizon,
                                     const std::vector<std::uint64_t>& checkpoints,
                                     std::uint64_t paths, std::uint64_t master_seed,
                                     unsigned workers);

struct Projection {
  Vector direction;
  std::vector<std::vector<double>> samples;  // per checkpoint, path order
  std::vector<double> target_variance;       // a^T Sigma a v_exact, per checkpoint
};

/// <a, F> per checkpoint. Throws std::invalid_argument unless |a| = 1 within 1e-12.
Projection cramer_wold_project(const FluctuationEnsemble& ens, const Vector& direction);

/// Eight unit directions drawn from a named substream of the master seed.
std::vector<Vector> random_unit_directions(std::size_t dim, std::size_t count,
                                           std::uint64_t master_seed);

struct LlnDiagnostic {
  double exact = 0.0;  // a_n^2 m_n / n^2
  std::optional<double> simulated;
  std::optional<double> standard_error;
};

/// Exact E((S_n - n E X)^2 / n^2) / sigma^2.
LlnDiagnostic lln_diagnostic(double p, std::uint64_t n);

/// Exact value plus the Monte Carlo mean of |S_n - n E X|^2 / (n^2 tr Sigma).
LlnDiagnostic lln_diagnostic(const StepDistribution& d, double p, std::uint64_t n,
                             std::uint64_t paths, std::uint64_t master_seed, unsigned workers);

struct ResidualCheck {
  double zeta_b = 0.0;
  double v_exact = 0.0;
  double target_variance = 0.0;  // zeta_b^2 v_exact
  double sample_variance = 0.0;
  double standard_error = 0.0;   // target sqrt(2/(R-1))
  double z = 0.0;
  std::vector<double> samples;
};

/// Fluctuation variance of the walk driven by the residual X - X^(b).
ResidualCheck residual_fluctuation_check(const StepDistribution& base, double p, double b,
                                         std::uint64_t n, std::uint64_t horizon,
                                         std::uint64_t paths, std::uint64_t master_seed,
                                         unsigned workers);

/// CSV `path_id,checkpoint_n,coord,F_value,W_est`.
void write_ensemble_csv(const FluctuationEnsemble& ens, std::ostream& os);

/// Per-checkpoint sample moments against v_exact Sigma and the limit variance.
nlohmann::json ensemble_summary_json(const FluctuationEnsemble& ens);

nlohmann::json to_json(const TestReport& report);

}  // namespace srw
