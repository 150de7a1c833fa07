#pragma once

// Reinforced uniform samples and the reinforced empirical process
//   G_n(x) = n^{-1/2} sum_i (1{U_i <= x} - x).
// The vector (G_n(x_1), ..., G_n(x_k)) is S_n/sqrt(n) for the k-dimensional
// reinforced walk with indicator steps, so its fluctuations around the bridge
// proxy a_n n^{-1/2} M_N are an ordinary fluctuation ensemble.

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "srw/fluctuation.hpp"
#include "srw/matrix.hpp"
#include "srw/random_stream.hpp"
#include "srw/reinforce.hpp"
#include "srw/stat_tests.hpp"

namespace srw {

struct ReinforcedUniformSample {
  double p = 0.0;
  std::uint64_t stream_id = 0;
  std::vector<double> values;          // U-hat_1..U-hat_n
  std::vector<double> distinct;        // U_1..U_m in order of first appearance
  std::vector<std::uint64_t> counts;   // N_j(n)
  std::vector<std::uint32_t> atom_of;  // values[i] == distinct[atom_of[i]]

  std::uint64_t size() const { return values.size(); }
};

/// Reinforcement recursion with uniform(0,1) typical steps. Consumes the
/// stream exactly like indicator_walk on the same (p, n).
ReinforcedUniformSample simulate_reinforced_uniforms(double p, std::uint64_t n,
                                                     RandomStream& stream);

/// Throws std::invalid_argument unless 0 < x_1 < ... < x_k < 1, k >= 1.
void validate_grid(std::span<const double> grid);

/// G_n at each point (sorted, inside [0, 1]) from occurrence counts alone.
std::vector<double> empirical_process_at(const ReinforcedUniformSample& sample,
                                         std::span<const double> points);

/// k-dimensional reinforced walk with steps (1{U <= x_j} - x_j)_j, all
/// coordinates driven by the same reinforced uniform. Partial sums are
/// computed from integer counts, so S_n^{(j)}/sqrt(n) matches
/// empirical_process_at on the same stream bit for bit.
WalkPath indicator_walk(std::span<const double> grid, double p, std::uint64_t horizon,
                        std::span<const std::uint64_t> checkpoints, RandomStream& stream);

/// x_i (1 - x_j)/(2p - 1) for i <= j.
Matrix bridge_fdd_covariance(std::span<const double> grid, double p);

/// x_i (1 - x_j) for i <= j.
Matrix brownian_bridge_covariance(std::span<const double> grid);

struct BridgeEnsemble {
  std::vector<double> grid;
  FluctuationEnsemble fluct;  // F = G_n - a_n n^{-1/2} B-hat
  std::vector<double> G;      // [path][checkpoint][coord]

  double g(std::size_t path, std::size_t checkpoint, std::size_t coord) const {
    return G[(path * fluct.checkpoint_count() + checkpoint) * fluct.dim + coord];
  }
};

/// Fluctuation ensemble of the indicator walk; path r uses stream r of the seed.
BridgeEnsemble bridge_fluctuation_ensemble(std::span<const double> grid, double p,
                                           std::vector<std::uint64_t> checkpoints,
                                           std::uint64_t horizon, std::uint64_t paths,
                                           std::uint64_t master_seed, unsigned workers = 0);

/// Classical (p = 0) empirical process: sample covariance of G_n(x) over R
/// paths against x_i (1 - x_j).
CovarianceComparison classical_bridge_check(std::span<const double> grid, std::uint64_t n,
                                            std::uint64_t paths, std::uint64_t master_seed,
                                            unsigned workers = 0);

/// CSV `path_id,x,G_n_value,bridge_proxy_value,fluct_value` at one checkpoint.
void write_bridge_csv(const BridgeEnsemble& ens, std::size_t checkpoint, std::ostream& os);

/// Entrywise table of sample vs target covariance with standard errors.
nlohmann::json covariance_table_json(const CovarianceComparison& cmp, const Matrix& target,
                                     std::size_t paths);

}  // namespace srw
