#include <cmath>
#include <stdexcept>
#include <string>

#include "srw/compensated_sum.hpp"
#include "srw/reinforce.hpp"

namespace srw {
namespace {

constexpr std::uint64_t kMaxEnumerationSteps = 10;
constexpr double kMaxStates = 5e6;

using Counts = std::vector<std::uint32_t>;
using StateTable = std::map<Counts, CompensatedSum>;

void require_enumerable(std::uint64_t n) {
  if (n < 1 || n > kMaxEnumerationSteps)
    throw std::invalid_argument("exact enumeration supports 1 <= n <= " +
                                std::to_string(kMaxEnumerationSteps));
}

void require_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

// Number of count vectors with `atoms` parts summing to n.
double composition_count(std::size_t atoms, std::uint64_t n) {
  double c = 1.0;
  for (std::size_t k = 1; k < atoms; ++k)
    c = c * static_cast<double>(n + k) / static_cast<double>(k);
  return c;
}

// Generic Polya-type evolution: next atom a has probability kernel(counts, a, i).
template <class Kernel>
std::vector<CountState> evolve_counts(const std::vector<double>& first_step, std::uint64_t n,
                                      Kernel&& kernel) {
  const std::size_t atoms = first_step.size();
  if (composition_count(atoms, n) > kMaxStates)
    throw std::invalid_argument("exact enumeration: state space too large");
  StateTable table;
  for (std::size_t a = 0; a < atoms; ++a) {
    if (first_step[a] <= 0.0) continue;
    Counts c(atoms, 0);
    c[a] = 1;
    table[c].add(first_step[a]);
  }
  for (std::uint64_t i = 2; i <= n; ++i) {
    StateTable next;
    for (const auto& [counts, mass] : table) {
      const double w = mass.value();
      for (std::size_t a = 0; a < atoms; ++a) {
        const double t = kernel(counts, a, i);
        if (t <= 0.0) continue;
        Counts c = counts;
        ++c[a];
        next[c].add(w * t);
      }
    }
    table = std::move(next);
  }
  std::vector<CountState> out;
  out.reserve(table.size());
  for (const auto& [counts, mass] : table) out.push_back({counts, mass.value()});
  return out;
}

ExactPmf sum_law(const std::vector<CountState>& states,
                 const std::vector<Vector>& atom_values) {
  const std::size_t dim = atom_values.front().size();
  std::map<Vector, CompensatedSum> acc;
  for (const auto& s : states) {
    Vector v(dim, 0.0);
    for (std::size_t a = 0; a < atom_values.size(); ++a)
      for (std::size_t j = 0; j < dim; ++j) v[j] += static_cast<double>(s.counts[a]) * atom_values[a][j];
    acc[v].add(s.probability);
  }
  ExactPmf out;
  for (const auto& [v, mass] : acc) out[v] = mass.value();
  return out;
}

std::vector<Vector> unit_directions(std::size_t d) {
  std::vector<Vector> dirs;
  for (std::size_t axis = 0; axis < d; ++axis)
    for (double sign : {1.0, -1.0}) {
      Vector v(d, 0.0);
      v[axis] = sign;
      dirs.push_back(v);
    }
  return dirs;
}

const std::vector<Atom>& finite_support(const StepDistribution& d) {
  if (!d.support()) throw std::invalid_argument("exact enumeration needs a finitely supported step law");
  return *d.support();
}

}  // namespace

std::vector<CountState> enumerate_count_states(const StepDistribution& d, double p,
                                               std::uint64_t n) {
  require_probability(p, "reinforcement parameter p");
  require_enumerable(n);
  const auto& atoms = finite_support(d);
  std::vector<double> mu;
  for (const auto& a : atoms) mu.push_back(a.probability);
  return evolve_counts(mu, n, [&](const Counts& c, std::size_t a, std::uint64_t i) {
    return (1.0 - p) * mu[a] + p * static_cast<double>(c[a]) / static_cast<double>(i - 1);
  });
}

ExactPmf enumerate_exact_pmf(const StepDistribution& d, double p, std::uint64_t n) {
  const auto states = enumerate_count_states(d, p, n);
  std::vector<Vector> values;
  for (const auto& a : *d.support()) values.push_back(a.value);
  return sum_law(states, values);
}

ExactPmf enumerate_step_marginal(const StepDistribution& d, double p, std::uint64_t n) {
  const auto& atoms = finite_support(d);
  ExactPmf out;
  if (n == 1) {
    require_probability(p, "reinforcement parameter p");
    for (const auto& a : atoms) out[a.value] += a.probability;
    return out;
  }
  const auto states = enumerate_count_states(d, p, n - 1);
  std::vector<CompensatedSum> acc(atoms.size());
  for (const auto& s : states)
    for (std::size_t a = 0; a < atoms.size(); ++a)
      acc[a].add(s.probability * ((1.0 - p) * atoms[a].probability +
                                  p * static_cast<double>(s.counts[a]) / static_cast<double>(n - 1)));
  for (std::size_t a = 0; a < atoms.size(); ++a) out[atoms[a].value] += acc[a].value();
  return out;
}

ExactPmf enumerate_erw_pmf(double q, std::uint64_t n) {
  require_probability(q, "memory parameter q");
  require_enumerable(n);
  // atom 0 is +1, atom 1 is -1
  auto states = evolve_counts({0.5, 0.5}, n, [&](const Counts& c, std::size_t a, std::uint64_t i) {
    const double total = static_cast<double>(i - 1);
    const double same = static_cast<double>(c[a]) / total;
    return q * same + (1.0 - q) * (1.0 - same);
  });
  return sum_law(states, {{1.0}, {-1.0}});
}

ExactPmf enumerate_merw_pmf(double q, std::size_t d, std::uint64_t n) {
  require_probability(q, "memory parameter q");
  require_enumerable(n);
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  const std::size_t dirs = 2 * d;
  const std::vector<double> first(dirs, 1.0 / static_cast<double>(dirs));
  auto states = evolve_counts(first, n, [&](const Counts& c, std::size_t a, std::uint64_t i) {
    const double total = static_cast<double>(i - 1);
    const double same = static_cast<double>(c[a]) / total;
    return q * same + (1.0 - q) / static_cast<double>(dirs - 1) * (1.0 - same);
  });
  return sum_law(states, unit_directions(d));
}

double pmf_max_difference(const ExactPmf& a, const ExactPmf& b) {
  double worst = 0.0;
  for (const auto& [v, pr] : a) {
    auto it = b.find(v);
    worst = std::max(worst, std::abs(pr - (it == b.end() ? 0.0 : it->second)));
  }
  for (const auto& [v, pr] : b)
    if (!a.count(v)) worst = std::max(worst, std::abs(pr));
  return worst;
}

PmfMoments pmf_moments(const ExactPmf& pmf) {
  PmfMoments m;
  if (pmf.empty()) return m;
  const std::size_t dim = pmf.begin()->first.size();
  m.mean.assign(dim, 0.0);
  m.covariance = Matrix(dim);
  CompensatedSum total;
  std::vector<CompensatedSum> mean(dim);
  for (const auto& [v, pr] : pmf) {
    total.add(pr);
    for (std::size_t j = 0; j < dim; ++j) mean[j].add(pr * v[j]);
  }
  m.total_mass = total.value();
  for (std::size_t j = 0; j < dim; ++j) m.mean[j] = mean[j].value();
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      CompensatedSum c;
      for (const auto& [v, pr] : pmf) c.add(pr * (v[i] - m.mean[i]) * (v[j] - m.mean[j]));
      m.covariance(i, j) = c.value();
    }
  return m;
}

}  // namespace srw
