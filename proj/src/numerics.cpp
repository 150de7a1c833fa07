#include "srw/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "srw/compensated_sum.hpp"

namespace srw {
namespace {

void require_p(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("reinforcement parameter must lie in [0, 1], got " +
                            std::to_string(p));
}

void require_index(std::uint64_t n) {
  if (n < 1) throw std::domain_error("time index must be >= 1");
}

// Stirling series remainder ln Gamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2]
// truncated after the z^-9 term; accurate to ~1e-16 for z >= 16.
double stirling_tail(double z) {
  const double r = 1.0 / z;
  const double r2 = r * r;
  return r * (1.0 / 12.0 +
              r2 * (-1.0 / 360.0 +
                    r2 * (1.0 / 1260.0 + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0)))));
}

// One step of the m-recursion: returns E(d_{k+1}^2) given a_{k+1} and m_k.
inline double next_increment(double p, std::uint64_t k, double a_next, double m_k) {
  const double shrink = p / (static_cast<double>(k) + p);
  return 1.0 / (a_next * a_next) - shrink * shrink * m_k;
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma requires x > 0");
  return std::lgamma(x);
}

double log_gamma_ratio(double x, double s) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma_ratio requires x > 0");
  if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("log_gamma_ratio requires s in [0, 1]");
  if (s == 0.0) return 0.0;
  // Shift x upward until the Stirling series is accurate, undoing the shift
  // with Gamma(z + 1) = z Gamma(z).
  double shift_correction = 0.0;
  while (x < 16.0) {
    shift_correction -= std::log1p(s / x);
    x += 1.0;
  }
  const double main = (x - 0.5) * std::log1p(s / x) + s * std::log(x + s) - s;
  return main + (stirling_tail(x + s) - stirling_tail(x)) + shift_correction;
}

double gamma_step(double p, std::uint64_t n) {
  require_p(p);
  require_index(n);
  const double nd = static_cast<double>(n);
  return nd / (nd + p);
}

double a_seq_recurrence(double p, std::uint64_t n) {
  require_p(p);
  require_index(n);
  double a = 1.0;
  for (std::uint64_t k = 1; k < n; ++k) {
    const double kd = static_cast<double>(k);
    a *= (kd + p) / kd;
  }
  return a;
}

double a_seq_log_gamma(double p, std::uint64_t n) {
  require_p(p);
  require_index(n);
  return std::exp(log_gamma_ratio(static_cast<double>(n), p) - log_gamma(1.0 + p));
}

double a_seq(double p, std::uint64_t n) {
  require_p(p);
  require_index(n);
  if (p == 0.0) return 1.0;
  if (p == 1.0) return static_cast<double>(n);
  return n <= 64 ? a_seq_recurrence(p, n) : a_seq_log_gamma(p, n);
}

ExactMoments::ExactMoments(double p, std::uint64_t horizon, double sigma2)
    : p_(p), sigma2_(sigma2), horizon_(horizon) {
  require_p(p);
  require_index(horizon);
  if (!(sigma2 >= 0.0)) throw std::domain_error("sigma2 must be non-negative");
  a_.resize(horizon);
  m_.resize(horizon);
  d2_.resize(horizon);
  a_[0] = 1.0;
  m_[0] = 1.0;
  d2_[0] = 1.0;
  CompensatedSum m_acc(1.0);
  for (std::uint64_t k = 1; k < horizon; ++k) {
    const double kd = static_cast<double>(k);
    a_[k] = a_[k - 1] * (kd + p) / kd;
    d2_[k] = next_increment(p, k, a_[k], m_[k - 1]);
    m_acc.add(d2_[k]);
    m_[k] = m_acc.value();
  }
}

void ExactMoments::check_index(std::uint64_t n) const {
  if (n < 1 || n > horizon_)
    throw std::out_of_range("index " + std::to_string(n) + " outside table 1.." +
                            std::to_string(horizon_));
}

double ExactMoments::a(std::uint64_t n) const {
  check_index(n);
  return a_[n - 1];
}

double ExactMoments::gamma(std::uint64_t n) const {
  check_index(n);
  return gamma_step(p_, n);
}

double ExactMoments::m(std::uint64_t n) const {
  check_index(n);
  return m_[n - 1];
}

double ExactMoments::increment_variance(std::uint64_t n) const {
  check_index(n);
  return d2_[n - 1];
}

double ExactMoments::v_exact(std::uint64_t n, std::uint64_t horizon) const {
  check_index(n);
  check_index(horizon);
  if (horizon < n) throw std::domain_error("v_exact requires N >= n");
  CompensatedSum tail;
  for (std::uint64_t k = n + 1; k <= horizon; ++k) tail.add(d2_[k - 1]);
  const double an = a_[n - 1];
  return an * an / static_cast<double>(n) * tail.value();
}

double ExactMoments::lln_ratio(std::uint64_t n) const {
  check_index(n);
  const double an = a_[n - 1];
  const double nd = static_cast<double>(n);
  return an * an * m_[n - 1] / (nd * nd);
}

double exact_second_moment(double p, std::uint64_t n) {
  require_p(p);
  require_index(n);
  double a = 1.0;
  double m = 1.0;
  CompensatedSum acc(1.0);
  for (std::uint64_t k = 1; k < n; ++k) {
    const double kd = static_cast<double>(k);
    a *= (kd + p) / kd;
    acc.add(next_increment(p, k, a, m));
    m = acc.value();
  }
  return m;
}

double v_exact(double p, std::uint64_t n, std::uint64_t horizon) {
  require_p(p);
  require_index(n);
  if (horizon < n) throw std::domain_error("v_exact requires N >= n");
  double a = 1.0;
  double m = 1.0;
  CompensatedSum acc(1.0);
  CompensatedSum tail;
  double a_n = 1.0;
  for (std::uint64_t k = 1; k < horizon; ++k) {
    if (k == n) a_n = a;
    const double kd = static_cast<double>(k);
    a *= (kd + p) / kd;
    const double d2 = next_increment(p, k, a, m);
    acc.add(d2);
    m = acc.value();
    if (k >= n) tail.add(d2);
  }
  if (n == horizon) return 0.0;
  return a_n * a_n / static_cast<double>(n) * tail.value();
}

double limit_fluctuation_variance(double p) {
  if (!(p > 0.5 && p <= 1.0))
    throw std::domain_error("limit variance 1/(2p-1) requires p in (1/2, 1]");
  return 1.0 / (2.0 * p - 1.0);
}

LimitVarianceBound limit_variance_W(double p, double tol, std::uint64_t max_horizon) {
  if (!(p > 0.5 && p < 1.0))
    throw std::domain_error("E(W^2) tail is summable only for p in (1/2, 1)");
  if (!(tol > 0.0)) throw std::domain_error("tolerance must be positive");

  const double g2 = std::exp(2.0 * log_gamma(1.0 + p));
  const double e = 2.0 * p - 1.0;

  // Enclosure of the tail sum_{k>n} E(d_k^2), using the two-sided Wendel
  // bounds on Gamma(k+p)/Gamma(k) and integral bounds on sum k^{-2p}.
  auto enclose = [&](std::uint64_t n, double m_n) {
    const double nd = static_cast<double>(n);
    const double power_lo = std::pow(nd + 1.0, -e) / e;
    const double power_hi = std::pow(nd, -e) / e;
    const double wendel = std::pow(1.0 + p / (nd + 1.0), 2.0 - 2.0 * p);
    const double pos_hi = g2 * wendel * power_hi;
    const double pos_lo = g2 * power_lo;
    const double m_hi = m_n + pos_hi;
    LimitVarianceBound b;
    b.lower = m_n + pos_lo - p * p * m_hi / (nd - 1.0 + p);
    b.upper = m_n + pos_hi - p * p * m_n / (nd + p);
    if (b.lower < m_n) b.lower = m_n;
    // rounding slack on the computed m_n
    const double slack = 64.0 * 2.220446049250313e-16 * m_n;
    b.lower -= slack;
    b.upper += slack;
    b.estimate = 0.5 * (b.lower + b.upper);
    b.horizon = n;
    return b;
  };

  double a = 1.0;
  double m = 1.0;
  CompensatedSum acc(1.0);
  std::uint64_t next_check = 1024;
  for (std::uint64_t k = 1; k < max_horizon; ++k) {
    const double kd = static_cast<double>(k);
    a *= (kd + p) / kd;
    acc.add(next_increment(p, k, a, m));
    m = acc.value();
    const std::uint64_t n = k + 1;
    if (n == next_check) {
      auto b = enclose(n, m);
      if (b.width() <= tol) return b;
      next_check *= 2;
    }
  }
  throw std::runtime_error("limit_variance_W: tolerance not reached within max horizon");
}

double centering_discrepancy(double p, std::uint64_t n) {
  require_index(n);
  const double nd = static_cast<double>(n);
  return (std::pow(nd, p) - a_seq(p, n)) / std::sqrt(nd);
}

double centering_asymptote(double p, std::uint64_t n) {
  require_p(p);
  require_index(n);
  const double nd = static_cast<double>(n);
  return std::pow(nd, p - 0.5) * (1.0 - std::exp(-log_gamma(1.0 + p)));
}

double lln_exact(double p, std::uint64_t n) {
  const double a = a_seq(p, n);
  const double nd = static_cast<double>(n);
  return a * a * exact_second_moment(p, n) / (nd * nd);
}

}  // namespace srw
