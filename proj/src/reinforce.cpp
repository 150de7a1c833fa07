#include "srw/reinforce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "srw/numerics.hpp"

namespace srw {
namespace {

void require_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

// Accumulates running sums and records them at checkpoints.
class CheckpointRecorder {
public:
  CheckpointRecorder(WalkPath& path, std::span<const std::uint64_t> checkpoints)
      : path_(path), sum_(path.dim, 0.0), sq_(path.dim, 0.0) {
    path_.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    path_.sums.reserve(checkpoints.size() * path.dim);
    path_.squared_sums.reserve(checkpoints.size() * path.dim);
  }

  void add(const double* step, std::uint64_t time) {
    for (std::size_t j = 0; j < path_.dim; ++j) {
      sum_[j] += step[j];
      sq_[j] += step[j] * step[j];
    }
    if (next_ < path_.checkpoints.size() && path_.checkpoints[next_] == time) {
      path_.sums.insert(path_.sums.end(), sum_.begin(), sum_.end());
      path_.squared_sums.insert(path_.squared_sums.end(), sq_.begin(), sq_.end());
      ++next_;
    }
  }

  const Vector& sum() const { return sum_; }

private:
  WalkPath& path_;
  Vector sum_;
  Vector sq_;
  std::size_t next_ = 0;
};

Vector terminal_martingale(const Vector& sum, const Vector& mean, double p, std::uint64_t n) {
  const double a = a_seq(p, n);
  Vector m(sum.size());
  for (std::size_t j = 0; j < sum.size(); ++j)
    m[j] = (sum[j] - static_cast<double>(n) * mean[j]) / a;
  return m;
}

}  // namespace

std::optional<std::size_t> WalkPath::row_of(std::uint64_t n) const {
  auto it = std::lower_bound(checkpoints.begin(), checkpoints.end(), n);
  if (it == checkpoints.end() || *it != n) return std::nullopt;
  return static_cast<std::size_t>(it - checkpoints.begin());
}

void validate_checkpoints(std::span<const std::uint64_t> checkpoints, std::uint64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (checkpoints.empty()) throw std::invalid_argument("checkpoint list is empty");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > horizon)
      throw std::invalid_argument("checkpoint " + std::to_string(checkpoints[i]) +
                                  " outside [1, " + std::to_string(horizon) + "]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw std::invalid_argument("checkpoints must be strictly increasing");
  }
}

std::vector<std::uint64_t> default_checkpoints(std::uint64_t horizon) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 1; n < horizon; n *= 2) out.push_back(n);
  out.push_back(horizon);
  return out;
}

WalkPath simulate_reinforced_path(const StepDistribution& d, double p, std::uint64_t horizon,
                                  std::span<const std::uint64_t> checkpoints,
                                  RandomStream& stream) {
  require_probability(p, "reinforcement parameter p");
  validate_checkpoints(checkpoints, horizon);
  const std::size_t dim = d.dim();
  WalkPath path;
  path.dim = dim;
  path.horizon = horizon;
  path.p = p;
  path.stream_id = stream.stream_id();

  std::vector<double> history(horizon * dim);
  CheckpointRecorder rec(path, checkpoints);
  drive_reinforcement(
      horizon, p, stream,
      [&](std::uint64_t slot) { d.sample(stream, {history.data() + slot * dim, dim}); },
      [&](std::uint64_t slot, std::uint64_t source) {
        std::copy_n(history.data() + source * dim, dim, history.data() + slot * dim);
      },
      [&](std::uint64_t time) { rec.add(history.data() + (time - 1) * dim, time); });

  path.terminal_sum = rec.sum();
  path.terminal_martingale = terminal_martingale(rec.sum(), d.mean(), p, horizon);
  return path;
}

double erw_param_map(double p) {
  require_probability(p, "reinforcement parameter p");
  return (p + 1.0) / 2.0;
}

double merw_param_map(double p, std::size_t d) {
  require_probability(p, "reinforcement parameter p");
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  return p + (1.0 - p) / static_cast<double>(2 * d);
}

WalkPath simulate_erw(double q, std::uint64_t horizon,
                      std::span<const std::uint64_t> checkpoints, RandomStream& stream) {
  require_probability(q, "memory parameter q");
  validate_checkpoints(checkpoints, horizon);
  WalkPath path;
  path.dim = 1;
  path.horizon = horizon;
  path.p = 2.0 * q - 1.0;
  path.stream_id = stream.stream_id();

  std::vector<double> history(horizon);
  CheckpointRecorder rec(path, checkpoints);
  history[0] = (stream.next_u64() >> 63) ? 1.0 : -1.0;
  rec.add(&history[0], 1);
  for (std::uint64_t i = 2; i <= horizon; ++i) {
    const double remembered = history[stream.uniform_index(i - 1)];
    history[i - 1] = stream.bernoulli(q) ? remembered : -remembered;
    rec.add(&history[i - 1], i);
  }
  path.terminal_sum = rec.sum();
  if (path.p >= 0.0) path.terminal_martingale = terminal_martingale(rec.sum(), {0.0}, path.p, horizon);
  return path;
}

WalkPath simulate_merw(double q, std::size_t d, std::uint64_t horizon,
                       std::span<const std::uint64_t> checkpoints, RandomStream& stream) {
  require_probability(q, "memory parameter q");
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  validate_checkpoints(checkpoints, horizon);
  const std::uint64_t directions = 2 * d;
  WalkPath path;
  path.dim = d;
  path.horizon = horizon;
  path.p = (static_cast<double>(directions) * q - 1.0) / static_cast<double>(directions - 1);
  path.stream_id = stream.stream_id();

  // Direction 2a is +e_a, 2a+1 is -e_a (the lattice law's atom order).
  std::vector<std::uint32_t> history(horizon);
  Vector step(d, 0.0);
  CheckpointRecorder rec(path, checkpoints);
  auto emit = [&](std::uint32_t dir, std::uint64_t time) {
    std::fill(step.begin(), step.end(), 0.0);
    step[dir / 2] = (dir % 2 == 0) ? 1.0 : -1.0;
    rec.add(step.data(), time);
  };
  history[0] = static_cast<std::uint32_t>(stream.uniform_index(directions));
  emit(history[0], 1);
  for (std::uint64_t i = 2; i <= horizon; ++i) {
    const std::uint32_t remembered = history[stream.uniform_index(i - 1)];
    std::uint32_t dir = remembered;
    if (!stream.bernoulli(q)) {
      const auto other = static_cast<std::uint32_t>(stream.uniform_index(directions - 1));
      dir = other >= remembered ? other + 1 : other;
    }
    history[i - 1] = dir;
    emit(dir, i);
  }
  path.terminal_sum = rec.sum();
  if (path.p >= 0.0 && path.p <= 1.0)
    path.terminal_martingale = terminal_martingale(rec.sum(), Vector(d, 0.0), path.p, horizon);
  return path;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_walk_csv(const WalkPath& path, std::ostream& os) {
  os << "n";
  for (std::size_t j = 1; j <= path.dim; ++j) os << ",S_" << j;
  for (std::size_t j = 1; j <= path.dim; ++j) os << ",V_" << j;
  os << ",M_terminal_flag\n";
  for (std::size_t r = 0; r < path.checkpoints.size(); ++r) {
    os << path.checkpoints[r];
    for (double s : path.sum_at(r)) os << ',' << format_real(s);
    for (double v : path.squared_sum_at(r)) os << ',' << format_real(v);
    os << ',' << (path.checkpoints[r] == path.horizon ? 1 : 0) << '\n';
  }
}

}  // namespace srw
