#pragma once

// Step-reinforced random walks, the elephant random walk and its
// multidimensional version, and exact small-n enumeration of their laws.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "srw/matrix.hpp"
#include "srw/random_stream.hpp"
#include "srw/step_distribution.hpp"

namespace srw {

/// One simulated trajectory observed at a list of checkpoints.
struct WalkPath {
  std::size_t dim = 1;
  std::uint64_t horizon = 0;
  double p = 0.0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<double> sums;          // S_n, checkpoint-major, dim per row
  std::vector<double> squared_sums;  // V_n = sum of squared increments per coordinate
  Vector terminal_sum;               // S_N
  /// M_N = (S_N - N mean)/a_N; empty when no reinforcement parameter in
  /// [0, 1] is attached to the process (elephant walks with q < 1/2).
  Vector terminal_martingale;
  std::uint64_t stream_id = 0;

  std::span<const double> sum_at(std::size_t row) const {
    return {sums.data() + row * dim, dim};
  }
  std::span<const double> squared_sum_at(std::size_t row) const {
    return {squared_sums.data() + row * dim, dim};
  }
  /// Row index of checkpoint n, if recorded.
  std::optional<std::size_t> row_of(std::uint64_t n) const;
};

/// Validates a checkpoint list against a horizon: non-empty, strictly
/// increasing, inside [1, N]. Throws std::invalid_argument.
void validate_checkpoints(std::span<const std::uint64_t> checkpoints, std::uint64_t horizon);

/// Powers of two below N, followed by N itself.
std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon);

/// Drives the reinforcement recursion for steps 1..horizon.
///
/// Step 1 is fresh. For i >= 2 one Bernoulli(p) coin decides between a
/// fresh step and a copy of a uniformly chosen earlier step; the copy source
/// is handed to on_repeat as a 0-based slot. Both callbacks receive the
/// 0-based slot being written; after_step receives the 1-based time. The
/// coin is not drawn for p in {0, 1}, so p = 0 consumes exactly the stream
/// of an i.i.d. walk.
template <class OnFresh, class OnRepeat, class AfterStep>
void drive_reinforcement(std::uint64_t horizon, double p, RandomStream& rng,
                         OnFresh&& on_fresh, OnRepeat&& on_repeat, AfterStep&& after_step) {
  on_fresh(std::uint64_t{0});
  after_step(std::uint64_t{1});
  for (std::uint64_t i = 2; i <= horizon; ++i) {
    if (rng.bernoulli(p))
      on_repeat(i - 1, rng.uniform_index(i - 1));
    else
      on_fresh(i - 1);
    after_step(i);
  }
}

/// Reinforced walk with typical step law d. The whole vector step is
/// recalled at once (one coin and one index per time step).
WalkPath simulate_reinforced_path(const StepDistribution& d, double p, std::uint64_t horizon,
                                  std::span<const std::uint64_t> checkpoints,
                                  RandomStream& stream);

/// Elephant random walk with memory parameter q.
WalkPath simulate_erw(double q, std::uint64_t horizon,
                      std::span<const std::uint64_t> checkpoints, RandomStream& stream);

/// Multidimensional elephant random walk on Z^d with parameter q.
WalkPath simulate_merw(double q, std::size_t d, std::uint64_t horizon,
                       std::span<const std::uint64_t> checkpoints, RandomStream& stream);

/// q = (p + 1)/2.
double erw_param_map(double p);
/// q = p + (1 - p)/(2d).
double merw_param_map(double p, std::size_t d);

/// Exact law of S_n as value -> probability.
using ExactPmf = std::map<Vector, double>;

/// Multiset of atoms drawn so far (indexed like d.support()) and its probability.
struct CountState {
  std::vector<std::uint32_t> counts;
  double probability = 0.0;
};

/// Exact law of the atom counts after n steps. Only counts matter for the
/// future of the recursion: a uniformly recalled step equals atom a with
/// probability counts[a]/(i-1).
std::vector<CountState> enumerate_count_states(const StepDistribution& d, double p,
                                               std::uint64_t n);

/// Exact law of S_n for a finitely supported step; n <= 10.
/// Throws std::invalid_argument for continuous laws or n outside [1, 10].
ExactPmf enumerate_exact_pmf(const StepDistribution& d, double p, std::uint64_t n);

/// Exact law of the single step X_n (n <= 10).
ExactPmf enumerate_step_marginal(const StepDistribution& d, double p, std::uint64_t n);

ExactPmf enumerate_erw_pmf(double q, std::uint64_t n);
ExactPmf enumerate_merw_pmf(double q, std::size_t d, std::uint64_t n);

/// Largest |P_a(x) - P_b(x)| over the union of supports.
double pmf_max_difference(const ExactPmf& a, const ExactPmf& b);

struct PmfMoments {
  Vector mean;
  Matrix covariance;
  double total_mass = 0.0;
};
PmfMoments pmf_moments(const ExactPmf& pmf);

/// CSV `n,S_1..S_d,V_1..V_d,M_terminal_flag`, one row per checkpoint; the flag
/// marks the row at the horizon, whose martingale value is M_N.
void write_walk_csv(const WalkPath& path, std::ostream& os);

/// 17 significant digits, '.' decimal separator.
std::string format_real(double x);

}  // namespace srw
