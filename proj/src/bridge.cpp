#include "srw/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "srw/numerics.hpp"
#include "srw/parallel.hpp"

namespace srw {
namespace {

// Number of grid points strictly below u: 1{u <= x_j} holds iff j >= rank.
std::uint32_t grid_rank(std::span<const double> grid, double u) {
  return static_cast<std::uint32_t>(std::lower_bound(grid.begin(), grid.end(), u) - grid.begin());
}

}  // namespace

ReinforcedUniformSample simulate_reinforced_uniforms(double p, std::uint64_t n,
                                                     RandomStream& stream) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  ReinforcedUniformSample s;
  s.p = p;
  s.stream_id = stream.stream_id();
  s.values.resize(n);
  s.atom_of.resize(n);
  drive_reinforcement(
      n, p, stream,
      [&](std::uint64_t slot) {
        const double u = stream.uniform01();
        s.atom_of[slot] = static_cast<std::uint32_t>(s.distinct.size());
        s.distinct.push_back(u);
        s.counts.push_back(1);
        s.values[slot] = u;
      },
      [&](std::uint64_t slot, std::uint64_t source) {
        const std::uint32_t a = s.atom_of[source];
        s.atom_of[slot] = a;
        s.values[slot] = s.distinct[a];
        ++s.counts[a];
      },
      [](std::uint64_t) {});
  return s;
}

void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0))
      throw std::invalid_argument("grid points must lie strictly inside (0, 1)");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("grid points must be strictly increasing");
  }
}

std::vector<double> empirical_process_at(const ReinforcedUniformSample& sample,
                                         std::span<const double> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i] >= 0.0 && points[i] <= 1.0))
      throw std::invalid_argument("evaluation points must lie in [0, 1]");
    if (i > 0 && points[i] < points[i - 1])
      throw std::invalid_argument("evaluation points must be sorted");
  }
  std::vector<std::size_t> order(sample.distinct.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sample.distinct[a] < sample.distinct[b]; });

  const double nd = static_cast<double>(sample.size());
  const double root = std::sqrt(nd);
  std::vector<double> out(points.size());
  std::uint64_t below = 0;  // occurrences with value <= current point
  std::size_t next = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    while (next < order.size() && sample.distinct[order[next]] <= points[i])
      below += sample.counts[order[next++]];
    out[i] = (static_cast<double>(below) - nd * points[i]) / root;
  }
  return out;
}

WalkPath indicator_walk(std::span<const double> grid, double p, std::uint64_t horizon,
                        std::span<const std::uint64_t> checkpoints, RandomStream& stream) {
  validate_grid(grid);
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  validate_checkpoints(checkpoints, horizon);
  const std::size_t k = grid.size();
  WalkPath path;
  path.dim = k;
  path.horizon = horizon;
  path.p = p;
  path.stream_id = stream.stream_id();
  path.checkpoints.assign(checkpoints.begin(), checkpoints.end());

  // rank_hist[r] counts steps whose uniform has grid rank r.
  std::vector<std::uint32_t> rank(horizon);
  std::vector<std::uint64_t> rank_hist(k + 1, 0);
  Vector sums(k);
  std::size_t next = 0;
  auto fill_sums = [&](std::uint64_t n) {
    std::uint64_t c = 0;
    for (std::size_t j = 0; j < k; ++j) {
      c += rank_hist[j];
      sums[j] = static_cast<double>(c) - static_cast<double>(n) * grid[j];
    }
  };
  auto record = [&](std::uint64_t n) {
    fill_sums(n);
    path.sums.insert(path.sums.end(), sums.begin(), sums.end());
    std::uint64_t c = 0;
    for (std::size_t j = 0; j < k; ++j) {
      c += rank_hist[j];
      const double x = grid[j];
      path.squared_sums.push_back(static_cast<double>(c) * (1.0 - x) * (1.0 - x) +
                                  static_cast<double>(n - c) * x * x);
    }
  };

  drive_reinforcement(
      horizon, p, stream,
      [&](std::uint64_t slot) {
        rank[slot] = grid_rank(grid, stream.uniform01());
        ++rank_hist[rank[slot]];
      },
      [&](std::uint64_t slot, std::uint64_t source) {
        rank[slot] = rank[source];
        ++rank_hist[rank[slot]];
      },
      [&](std::uint64_t time) {
        if (next < path.checkpoints.size() && path.checkpoints[next] == time) {
          record(time);
          ++next;
        }
      });

  fill_sums(horizon);
  path.terminal_sum = sums;
  path.terminal_martingale.resize(k);
  const double a = a_seq(p, horizon);
  for (std::size_t j = 0; j < k; ++j) path.terminal_martingale[j] = sums[j] / a;
  return path;
}

Matrix brownian_bridge_covariance(std::span<const double> grid) {
  validate_grid(grid);
  const std::size_t k = grid.size();
  Matrix m(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) m(i, j) = m(j, i) = grid[i] * (1.0 - grid[j]);
  return m;
}

Matrix bridge_fdd_covariance(std::span<const double> grid, double p) {
  if (!(p > 0.5 && p < 1.0)) throw std::invalid_argument("bridge covariance requires p in (1/2, 1)");
  return brownian_bridge_covariance(grid).scaled(1.0 / (2.0 * p - 1.0));
}

BridgeEnsemble bridge_fluctuation_ensemble(std::span<const double> grid, double p,
                                           std::vector<std::uint64_t> checkpoints,
                                           std::uint64_t horizon, std::uint64_t paths,
                                           std::uint64_t master_seed, unsigned workers) {
  validate_grid(grid);
  EnsembleSpec spec;
  spec.distribution = make_indicator_grid({grid.begin(), grid.end()});
  spec.p = p;
  spec.checkpoints = std::move(checkpoints);
  spec.horizon = horizon;
  spec.paths = paths;
  spec.master_seed = master_seed;
  spec.workers = workers;
  validate_ensemble_spec(spec);

  BridgeEnsemble out;
  out.grid.assign(grid.begin(), grid.end());
  const std::size_t k = grid.size();
  const std::size_t nc = spec.checkpoints.size();
  out.G.assign(paths * nc * k, 0.0);
  out.fluct = run_ensemble_with(spec, [&](RandomStream& stream) {
    WalkPath path = indicator_walk(grid, p, horizon, spec.checkpoints, stream);
    const std::size_t r = stream.stream_id();
    for (std::size_t c = 0; c < nc; ++c) {
      const double root = std::sqrt(static_cast<double>(spec.checkpoints[c]));
      const auto s = path.sum_at(c);
      for (std::size_t j = 0; j < k; ++j) out.G[(r * nc + c) * k + j] = s[j] / root;
    }
    return path;
  });
  return out;
}

CovarianceComparison classical_bridge_check(std::span<const double> grid, std::uint64_t n,
                                            std::uint64_t paths, std::uint64_t master_seed,
                                            unsigned workers) {
  validate_grid(grid);
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  const std::size_t k = grid.size();
  const double root = std::sqrt(static_cast<double>(n));
  std::vector<double> rows(paths * k);
  const std::uint64_t cp[] = {n};
  parallel_for(paths, workers, [&](std::size_t r) {
    RandomStream stream = derive_stream(master_seed, r);
    const WalkPath path = indicator_walk(grid, 0.0, n, cp, stream);
    for (std::size_t j = 0; j < k; ++j) rows[r * k + j] = path.sums[j] / root;
  });
  return covariance_compare(rows, k, brownian_bridge_covariance(grid), kDefaultZBound,
                            "classical_bridge_covariance");
}

void write_bridge_csv(const BridgeEnsemble& ens, std::size_t checkpoint, std::ostream& os) {
  if (checkpoint >= ens.fluct.checkpoint_count())
    throw std::out_of_range("checkpoint index out of range");
  os << "path_id,x,G_n_value,bridge_proxy_value,fluct_value\n";
  const std::size_t k = ens.fluct.dim;
  for (std::size_t r = 0; r < ens.fluct.paths(); ++r)
    for (std::size_t j = 0; j < k; ++j)
      os << r << ',' << format_real(ens.grid[j]) << ',' << format_real(ens.g(r, checkpoint, j))
         << ',' << format_real(ens.fluct.W[r * k + j]) << ','
         << format_real(ens.fluct.f(r, checkpoint, j)) << '\n';
}

nlohmann::json covariance_table_json(const CovarianceComparison& cmp, const Matrix& target,
                                     std::size_t paths) {
  nlohmann::json rows = nlohmann::json::array();
  const std::size_t k = target.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j) {
      const double tij = target(i, j);
      rows.push_back({{"i", i + 1},
                      {"j", j + 1},
                      {"sample", cmp.sample_covariance(i, j)},
                      {"target", tij},
                      {"se", std::sqrt((target(i, i) * target(j, j) + tij * tij) /
                                       static_cast<double>(paths))},
                      {"z", cmp.z(i, j)}});
    }
  return rows;
}

}  // namespace srw
