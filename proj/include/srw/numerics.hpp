#pragma once

// Closed-form and recursive moment machinery for step-reinforced walks.
//
// Conventions: p is the reinforcement parameter, n and N are 1-based time
// indices. The "unit-variance second-moment factor" m_n satisfies
// E(M_n M_n^T) = m_n * Sigma for the martingale M_n = (S_n - n E X) / a_n,
// so every routine here is expressed for a unit step variance and scaled by
// Sigma at the call site.

#include <cstdint>
#include <vector>

namespace srw {

/// Natural log of the Euler gamma function. Throws std::domain_error for x <= 0.
double log_gamma(double x);

/// ln Gamma(x + s) - ln Gamma(x) for x > 0, s in [0, 1], without the
/// cancellation that plagues a difference of two large log-gammas.
double log_gamma_ratio(double x, double s);

/// gamma_n = n / (n + p).
double gamma_step(double p, std::uint64_t n);

/// a_n = Gamma(n + p) / (Gamma(n) Gamma(p + 1)) by the product recurrence.
/// O(n); intended for small n and for cross-checking.
double a_seq_recurrence(double p, std::uint64_t n);

/// a_n through log-gamma differences; O(1) for isolated large n.
double a_seq_log_gamma(double p, std::uint64_t n);

/// a_n, choosing the recurrence for n <= 64 and log-gamma beyond.
double a_seq(double p, std::uint64_t n);

/// Immutable tables of a_n and m_n for n = 1..horizon.
///
/// m_1 = 1 and m_{n+1} = m_n (1 - p^2/(n+p)^2) + 1/a_{n+1}^2. The increments
/// E(d_{n+1}^2) = m_{n+1} - m_n are accumulated with compensated summation.
class ExactMoments {
public:
  ExactMoments(double p, std::uint64_t horizon, double sigma2 = 1.0);

  double p() const { return p_; }
  double sigma2() const { return sigma2_; }
  std::uint64_t horizon() const { return horizon_; }

  double a(std::uint64_t n) const;
  double gamma(std::uint64_t n) const;
  /// Unit-variance factor m_n.
  double m(std::uint64_t n) const;
  /// E(M_n^2) = sigma2 * m_n.
  double second_moment(std::uint64_t n) const { return sigma2_ * m(n); }
  /// E(d_n^2) / sigma2 = m_n - m_{n-1} (with m_0 = 0).
  double increment_variance(std::uint64_t n) const;
  /// (a_n^2 / n) (m_N - m_n).
  double v_exact(std::uint64_t n, std::uint64_t horizon) const;
  /// a_n^2 m_n / n^2, the exact E((S_n/n)^2)/sigma2 for centred steps.
  double lln_ratio(std::uint64_t n) const;

  const std::vector<double>& a_table() const { return a_; }
  const std::vector<double>& m_table() const { return m_; }

private:
  void check_index(std::uint64_t n) const;

  double p_;
  double sigma2_;
  std::uint64_t horizon_;
  std::vector<double> a_;  // a_[n-1] = a_n
  std::vector<double> m_;  // m_[n-1] = m_n
  std::vector<double> d2_; // d2_[n-1] = E(d_n^2)/sigma2
};

/// Unit-variance factor m_n, streamed without keeping a table.
double exact_second_moment(double p, std::uint64_t n);

/// Exact unit variance of (S_n - a_n M_N)/sqrt(n): (a_n^2/n)(m_N - m_n).
/// Streams the recursion from n to N in O(N) time and O(1) memory.
/// Throws std::domain_error when N < n or n < 1.
double v_exact(double p, std::uint64_t n, std::uint64_t horizon);

/// Limit value 1/(2p - 1) of v_exact as n, N/n grow.
double limit_fluctuation_variance(double p);

struct LimitVarianceBound {
  double lower = 0.0;
  double upper = 0.0;
  double estimate = 0.0;        // midpoint
  std::uint64_t horizon = 0;    // recursion depth used
  double width() const { return upper - lower; }
  bool contains(double x) const { return lower <= x && x <= upper; }
};

/// Certified enclosure of m_infinity = E(W^2)/sigma2 with width <= tol.
/// Throws std::domain_error for p <= 1/2 (the tail diverges) or tol <= 0,
/// std::runtime_error if the width target is not reached by max_horizon.
LimitVarianceBound limit_variance_W(double p, double tol,
                                    std::uint64_t max_horizon = std::uint64_t{1} << 26);

/// (n^p - a_n)/sqrt(n).
double centering_discrepancy(double p, std::uint64_t n);

/// Leading-order asymptote n^{p-1/2} (1 - 1/Gamma(p+1)) of centering_discrepancy.
double centering_asymptote(double p, std::uint64_t n);

/// Exact E((S_n/n)^2)/sigma2 = a_n^2 m_n / n^2.
double lln_exact(double p, std::uint64_t n);

}  // namespace srw
