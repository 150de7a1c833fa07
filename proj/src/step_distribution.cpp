#include "srw/step_distribution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "srw/stat_tests.hpp"

namespace srw {
namespace {

double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
    throw std::invalid_argument("malformed number '" + std::string(text) + "' in " +
                                std::string(what));
  return value;
}

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    out.push_back(parse_double(text.substr(start, end - start), what));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

struct GaussianPieces {
  double in1, in2, out1, out2;  // E[X 1in], E[X^2 1in], E[X 1out], E[X^2 1out]
};

// Partial moments of N(m, s^2) over |x| <= b and its complement.
GaussianPieces gaussian_pieces(double m, double s, double b) {
  const double alpha = (-b - m) / s;
  const double beta = (b - m) / s;
  const double mass = normal_cdf(beta) - normal_cdf(alpha);
  const double dphi = normal_pdf(alpha) - normal_pdf(beta);
  const double edge = alpha * normal_pdf(alpha) - beta * normal_pdf(beta);
  GaussianPieces g;
  g.in1 = m * mass + s * dphi;
  g.in2 = (m * m + s * s) * mass + 2.0 * m * s * dphi + s * s * edge;
  g.out1 = m - g.in1;
  g.out2 = (m * m + s * s) - g.in2;
  return g;
}

std::vector<Atom> merge_atoms(const std::vector<Atom>& atoms) {
  std::map<Vector, double> merged;
  for (const auto& a : atoms) merged[a.value] += a.probability;
  std::vector<Atom> out;
  for (auto& [v, pr] : merged)
    if (pr > 0.0) out.push_back({v, pr});
  return out;
}

void require_one_dimensional(const StepDistribution& d) {
  if (d.dim() != 1) throw std::invalid_argument("truncation is defined for one-dimensional laws only");
}

void require_positive_level(double b) {
  if (!(b > 0.0)) throw std::invalid_argument("truncation level b must be > 0");
}

}  // namespace

void StepDistribution::finish_from_support() {
  const auto& atoms = *support_;
  dim_ = atoms.front().value.size();
  mean_.assign(dim_, 0.0);
  covariance_ = Matrix(dim_);
  double total = 0.0;
  double sup = 0.0;
  cumulative_.clear();
  for (const auto& a : atoms) {
    total += a.probability;
    cumulative_.push_back(total);
    for (std::size_t i = 0; i < dim_; ++i) {
      mean_[i] += a.probability * a.value[i];
      sup = std::max(sup, std::abs(a.value[i]));
    }
  }
  for (const auto& a : atoms)
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        covariance_(i, j) += a.probability * (a.value[i] - mean_[i]) * (a.value[j] - mean_[j]);
  cumulative_.back() = 1.0;
  bound_ = sup;
}

StepDistribution make_rademacher() {
  StepDistribution d;
  d.kind_ = StepKind::rademacher;
  d.descriptor_ = "rademacher";
  d.support_ = std::vector<Atom>{{{-1.0}, 0.5}, {{1.0}, 0.5}};
  d.finish_from_support();
  // exact values rather than accumulated ones
  d.mean_ = {0.0};
  d.covariance_ = Matrix::identity(1);
  return d;
}

StepDistribution make_gaussian(double mean, double sd) {
  if (!std::isfinite(mean) || !(sd > 0.0) || !std::isfinite(sd))
    throw std::invalid_argument("gaussian requires finite mean and sd > 0");
  StepDistribution d;
  d.kind_ = StepKind::gaussian;
  d.dim_ = 1;
  d.gauss_mean_ = mean;
  d.gauss_sd_ = sd;
  d.mean_ = {mean};
  d.covariance_ = Matrix::identity(1, sd * sd);
  d.descriptor_ = "gaussian:" + format_number(mean) + "," + format_number(sd);
  return d;
}

StepDistribution make_lattice(std::size_t dim) {
  if (dim < 1) throw std::invalid_argument("lattice dimension must be >= 1");
  StepDistribution d;
  d.kind_ = StepKind::lattice;
  d.descriptor_ = "lattice:" + std::to_string(dim);
  std::vector<Atom> atoms;
  const double pr = 1.0 / static_cast<double>(2 * dim);
  for (std::size_t axis = 0; axis < dim; ++axis)
    for (double sign : {1.0, -1.0}) {
      Vector v(dim, 0.0);
      v[axis] = sign;
      atoms.push_back({v, pr});
    }
  d.support_ = std::move(atoms);
  d.finish_from_support();
  d.mean_.assign(dim, 0.0);
  d.covariance_ = Matrix::identity(dim, 1.0 / static_cast<double>(dim));
  return d;
}

StepDistribution make_indicator_grid(std::vector<double> grid) {
  if (grid.empty()) throw std::invalid_argument("indicator grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] < 1.0))
      throw std::invalid_argument("indicator grid points must lie strictly inside (0, 1)");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw std::invalid_argument("indicator grid points must be strictly increasing");
  }
  const std::size_t k = grid.size();
  StepDistribution d;
  d.kind_ = StepKind::indicator_grid;
  d.grid_ = grid;
  d.descriptor_ = "indicator:";
  for (std::size_t i = 0; i < k; ++i) d.descriptor_ += (i ? "," : "") + format_number(grid[i]);
  // U <= x_1 switches every indicator on; U in (x_{j-1}, x_j] switches on j..k.
  std::vector<Atom> atoms;
  for (std::size_t cut = 0; cut <= k; ++cut) {
    const double lo = cut == 0 ? 0.0 : grid[cut - 1];
    const double hi = cut == k ? 1.0 : grid[cut];
    Vector v(k);
    for (std::size_t j = 0; j < k; ++j) v[j] = (j >= cut ? 1.0 : 0.0) - grid[j];
    atoms.push_back({v, hi - lo});
  }
  d.support_ = std::move(atoms);
  d.finish_from_support();
  d.mean_.assign(k, 0.0);
  d.covariance_ = Matrix(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < k; ++j)
      d.covariance_(i, j) = d.covariance_(j, i) = grid[i] * (1.0 - grid[j]);
  return d;
}

StepDistribution make_discrete_atoms(std::vector<Atom> atoms, std::string descriptor) {
  if (atoms.empty()) throw std::invalid_argument("discrete law needs at least one value");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.probability >= 0.0) || !std::isfinite(a.probability))
      throw std::invalid_argument("discrete probabilities must be non-negative");
    for (double x : a.value)
      if (!std::isfinite(x)) throw std::invalid_argument("discrete values must be finite");
    total += a.probability;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("discrete probabilities must sum to 1 (got " + format_number(total) + ")");
  StepDistribution d;
  d.kind_ = StepKind::discrete;
  d.descriptor_ = std::move(descriptor);
  d.support_ = merge_atoms(atoms);
  d.finish_from_support();
  return d;
}

StepDistribution make_discrete(std::vector<double> values, std::vector<double> probabilities) {
  if (values.size() != probabilities.size())
    throw std::invalid_argument("discrete law: values and probabilities differ in length");
  std::vector<Atom> atoms;
  std::string desc = "discrete{";
  for (std::size_t i = 0; i < values.size(); ++i) {
    atoms.push_back({{values[i]}, probabilities[i]});
    desc += (i ? ";" : "") + format_number(values[i]) + ":" + format_number(probabilities[i]);
  }
  desc += "}";
  return make_discrete_atoms(std::move(atoms), std::move(desc));
}

StepDistribution clip_gaussian(const StepDistribution& base, GaussianClip clip) {
  if (base.clip_) throw std::invalid_argument("cannot truncate an already truncated gaussian law");
  StepDistribution d = base;
  const auto g = gaussian_pieces(base.gauss_mean_, base.gauss_sd_, clip.bound);
  const double m1 = clip.keep_inside ? g.in1 : g.out1;
  const double m2 = clip.keep_inside ? g.in2 : g.out2;
  clip.offset = m1;
  d.clip_ = clip;
  d.mean_ = {0.0};
  d.covariance_ = Matrix::identity(1, std::max(0.0, m2 - m1 * m1));
  if (clip.keep_inside)
    d.bound_ = clip.bound + std::abs(m1);
  else
    d.bound_.reset();
  d.descriptor_ = base.descriptor_ + (clip.keep_inside ? "|trunc:" : "|resid:") +
                  format_number(clip.bound);
  return d;
}

void StepDistribution::sample(RandomStream& rng, std::span<double> out) const {
  switch (kind_) {
    case StepKind::rademacher:
      out[0] = (rng.next_u64() >> 63) ? 1.0 : -1.0;
      return;
    case StepKind::gaussian: {
      const double x = gauss_mean_ + gauss_sd_ * rng.standard_normal();
      if (!clip_) {
        out[0] = x;
        return;
      }
      const bool inside = std::abs(x) <= clip_->bound;
      out[0] = (inside == clip_->keep_inside ? x : 0.0) - clip_->offset;
      return;
    }
    case StepKind::lattice: {
      const auto pick = rng.uniform_index(2 * dim_);
      std::fill(out.begin(), out.end(), 0.0);
      out[pick / 2] = (pick % 2 == 0) ? 1.0 : -1.0;
      return;
    }
    case StepKind::indicator_grid: {
      const double u = rng.uniform01();
      for (std::size_t j = 0; j < dim_; ++j) out[j] = (u <= grid_[j] ? 1.0 : 0.0) - grid_[j];
      return;
    }
    case StepKind::discrete: {
      const double u = rng.uniform01();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
      if (idx >= cumulative_.size()) idx = cumulative_.size() - 1;
      const auto& v = (*support_)[idx].value;
      std::copy(v.begin(), v.end(), out.begin());
      return;
    }
  }
}

StepDistribution make_distribution(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view args =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  const std::string what = "distribution '" + std::string(text) + "'";

  if (head == "rademacher") {
    if (colon != std::string_view::npos) throw std::invalid_argument(what + ": takes no arguments");
    return make_rademacher();
  }
  if (colon == std::string_view::npos || args.empty())
    throw std::invalid_argument(what + ": missing arguments");
  if (head == "gaussian") {
    const auto xs = parse_list(args, what);
    if (xs.size() != 2) throw std::invalid_argument(what + ": expected gaussian:MEAN,SD");
    return make_gaussian(xs[0], xs[1]);
  }
  if (head == "lattice") {
    const double d = parse_double(args, what);
    if (d < 1 || d != std::floor(d) || d > 64)
      throw std::invalid_argument(what + ": dimension must be an integer in [1, 64]");
    return make_lattice(static_cast<std::size_t>(d));
  }
  if (head == "indicator") return make_indicator_grid(parse_list(args, what));
  if (head == "discrete") {
    std::ifstream in{std::string(args)};
    if (!in) throw std::invalid_argument(what + ": cannot open file");
    std::vector<double> values, probs;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r" || line[0] == '#') continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw std::invalid_argument(what + ": expected value,probability rows");
      try {
        const double v = parse_double(std::string_view(line).substr(0, comma), what);
        const double pr = parse_double(std::string_view(line).substr(comma + 1), what);
        values.push_back(v);
        probs.push_back(pr);
      } catch (const std::invalid_argument&) {
        if (!first) throw;  // only the first row may be a header
      }
      first = false;
    }
    auto d = make_discrete(std::move(values), std::move(probs));
    d = make_discrete_atoms(*d.support(), "discrete:" + std::string(args));
    return d;
  }
  throw std::invalid_argument(what + ": unknown kind '" + std::string(head) + "'");
}

Truncation truncate_distribution(const StepDistribution& d, double b) {
  require_one_dimensional(d);
  require_positive_level(b);
  Truncation t{d, 0.0, 0.0};
  if (d.kind() == StepKind::gaussian) {
    t.law = clip_gaussian(d, GaussianClip{b, true, 0.0});
    const auto resid = clip_gaussian(d, GaussianClip{b, false, 0.0});
    t.sigma_b = std::sqrt(t.law.covariance()(0, 0));
    t.zeta_b = std::sqrt(resid.covariance()(0, 0));
    return t;
  }
  const auto& atoms = *d.support();
  double in1 = 0.0;
  for (const auto& a : atoms)
    if (std::abs(a.value[0]) <= b) in1 += a.probability * a.value[0];
  std::vector<Atom> clipped;
  for (const auto& a : atoms)
    clipped.push_back({{(std::abs(a.value[0]) <= b ? a.value[0] : 0.0) - in1}, a.probability});
  t.law = make_discrete_atoms(clipped, d.descriptor() + "|trunc:" + format_number(b));
  t.sigma_b = std::sqrt(t.law.covariance()(0, 0));
  t.zeta_b = std::sqrt(residual_distribution(d, b).covariance()(0, 0));
  return t;
}

StepDistribution residual_distribution(const StepDistribution& d, double b) {
  require_one_dimensional(d);
  require_positive_level(b);
  if (d.kind() == StepKind::gaussian) return clip_gaussian(d, GaussianClip{b, false, 0.0});
  const auto& atoms = *d.support();
  double out1 = 0.0;
  for (const auto& a : atoms)
    if (std::abs(a.value[0]) > b) out1 += a.probability * a.value[0];
  std::vector<Atom> resid;
  for (const auto& a : atoms)
    resid.push_back({{(std::abs(a.value[0]) > b ? a.value[0] : 0.0) - out1}, a.probability});
  return make_discrete_atoms(resid, d.descriptor() + "|resid:" + format_number(b));
}

}  // namespace srw
