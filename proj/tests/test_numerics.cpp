#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "srw/numerics.hpp"
#include "srw/reinforce.hpp"

using namespace srw;

TEST_CASE("log_gamma at integers and one half") {
  CHECK(log_gamma(1.0) == 0.0);
  CHECK(log_gamma(2.0) == 0.0);
  // Gamma(1/2) = 2 * int_0^inf exp(-u^2) du, by quadrature
  const double integral = 2.0 * oracle::simpson([](double u) { return std::exp(-u * u); }, 0.0, 12.0, 4000);
  CHECK(std::abs(log_gamma(0.5) - std::log(integral)) < 1e-12);
  CHECK(std::abs(log_gamma(0.5) - 0.5723649429247001) < 1e-12);
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(log_gamma(-1.5), std::domain_error);
}

TEST_CASE("log_gamma accuracy across [0.5, 1e7]") {
  // absolute error up to 100, relative beyond (a double cannot hold
  // lgamma(1e7) ~ 1.5e8 to 1e-12 absolute)
  for (double x = 0.5; x <= 1e7; x *= 1.37) {
    const long double ref = std::lgamma(static_cast<long double>(x));
    const double err = std::abs(static_cast<double>(log_gamma(x) - ref));
    if (x <= 100) CHECK(err <= 1e-12);
    else CHECK(err <= 4e-16 * std::abs(static_cast<double>(ref)));
  }
}

TEST_CASE("log_gamma_ratio against long double") {
  for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (double x : {0.3, 1.0, 7.5, 100.0}) {
      const long double ref = std::lgamma(static_cast<long double>(x) + s) -
                              std::lgamma(static_cast<long double>(x));
      CHECK(std::abs(static_cast<double>(log_gamma_ratio(x, s) - ref)) < 1e-13 * (1 + std::abs(static_cast<double>(ref))));
    }
    // large x: the difference of two lgamma values near 1e7 cancels too much,
    // so use the asymptotic series s ln x + s(s-1)/(2x) - s(s-1)(2s-1)/(12x^2)
    for (double x : {1e5, 1e6, 1e8}) {
      const long double lx = x;
      const long double ref = s * std::log(lx) + s * (s - 1) / (2 * lx) - s * (s - 1) * (2 * s - 1) / (12 * lx * lx);
      CHECK(std::abs(static_cast<double>(log_gamma_ratio(x, s) - ref)) < 1e-14 * (1 + std::abs(static_cast<double>(ref))));
    }
  }
}

TEST_CASE("a_seq examples") {
  CHECK(a_seq(0.75, 1) == 1.0);
  CHECK(a_seq(0.3, 1) == 1.0);
  CHECK(a_seq(0.75, 2) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(a_seq(0.75, 3) == doctest::Approx(2.40625).epsilon(1e-15));
  CHECK_THROWS(a_seq(0.75, 0));
  CHECK_THROWS(a_seq(1.2, 3));
}

TEST_CASE("a_seq matches the gamma-function oracle") {
  for (double p : {0.51, 0.6, 0.75, 0.9, 0.99})
    for (std::uint64_t n : {1ull, 2ull, 10ull, 64ull, 65ull, 1000ull, 1000000ull}) {
      const double ref = static_cast<double>(oracle::a_n(p, n));
      CHECK(std::abs(a_seq(p, n) / ref - 1.0) < 1e-12);
    }
}

TEST_CASE("recurrence and log-gamma paths agree") {
  for (double p : {0.51, 0.6, 0.75, 0.9, 0.99}) {
    const ExactMoments t(p, 10000);
    double worst = 0.0;
    for (std::uint64_t n = 1; n <= 10000; ++n)
      worst = std::max(worst, std::abs(t.a(n) - a_seq_log_gamma(p, n)) / t.a(n));
    CHECK(worst <= 1e-10);
    const std::uint64_t big = 1000000;
    CHECK(std::abs(a_seq_recurrence(p, big) - a_seq_log_gamma(p, big)) / a_seq_log_gamma(p, big) <= 1e-10);
  }
}

TEST_CASE("gamma_step") {
  CHECK(gamma_step(0.5, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(gamma_step(0.75, 3) == doctest::Approx(0.8));
  CHECK(gamma_step(0.0, 17) == 1.0);
}

TEST_CASE("ExactMoments invariants") {
  const double p = 0.75;
  const ExactMoments t(p, 5000);
  CHECK(t.a(1) == 1.0);
  for (std::uint64_t n = 1; n < 5000; ++n) {
    CHECK(t.a(n + 1) == doctest::Approx(t.a(n) * (n + p) / n).epsilon(1e-15));
    CHECK(t.m(n + 1) >= t.m(n));
    CHECK(t.gamma(n) > 0.0);
    CHECK(t.gamma(n) < 1.0);
  }
  // a_n prod_{k=n}^{m-1} gamma_k^{-1} = a_m
  double a = t.a(10);
  for (std::uint64_t k = 10; k < 4000; ++k) a /= t.gamma(k);
  CHECK(a == doctest::Approx(t.a(4000)).epsilon(1e-12));
  CHECK_THROWS_AS(t.a(0), std::out_of_range);
  CHECK_THROWS_AS(t.m(5001), std::out_of_range);
}

TEST_CASE("a_n Gamma(p+1)/n^p tends to one") {
  for (double p : {0.6, 0.75}) {
    const double r = a_seq(p, 1000000) * std::exp(log_gamma(1.0 + p)) / std::pow(1e6, p);
    CHECK(std::abs(r - 1.0) < 1e-3);
  }
}

TEST_CASE("second moment examples and oracle") {
  CHECK(exact_second_moment(0.3, 1) == 1.0);
  CHECK(exact_second_moment(0.75, 2) == doctest::Approx(8.0 / 7.0).epsilon(1e-15));
  CHECK(exact_second_moment(0.6, 2) == doctest::Approx(1.25).epsilon(1e-15));
  for (double p : {0.1, 0.5, 0.6, 0.75, 0.9})
    for (std::uint64_t n : {3ull, 17ull, 1000ull, 100000ull}) {
      const double ref = static_cast<double>(oracle::m_n(p, n));
      CHECK(std::abs(exact_second_moment(p, n) / ref - 1.0) < 1e-11);
    }
  const ExactMoments t(0.6, 3000, 2.5);
  CHECK(t.second_moment(3000) == doctest::Approx(2.5 * exact_second_moment(0.6, 3000)).epsilon(1e-14));
}

TEST_CASE("a_n^2 m_n is the variance of the enumerated law") {
  const auto rad = make_rademacher();
  for (double p : {0.55, 0.6, 0.75, 0.9})
    for (std::uint64_t n = 1; n <= 6; ++n) {
      const double a = a_seq(p, n);
      const auto pmf = enumerate_exact_pmf(rad, p, n);
      const auto mom = pmf_moments(pmf);
      CHECK(std::abs(a * a * exact_second_moment(p, n) - mom.covariance(0, 0)) <= 1e-10);
    }
}

TEST_CASE("v_exact examples") {
  CHECK(v_exact(0.75, 5, 5) == 0.0);
  CHECK(v_exact(0.75, 1, 2) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  // 1.78390: 10.8% below the limit 2, inside the 12% the horizon ratio 128 allows
  const double v = v_exact(0.75, 1024, 131072);
  CHECK(std::abs(v / 2.0 - 1.0) < 0.12);
  CHECK(v / (2.0 * (1.0 - std::sqrt(1.0 / 128))) == doctest::Approx(1.0).epsilon(0.03));
  CHECK_THROWS_AS(v_exact(0.75, 10, 9), std::domain_error);
  const ExactMoments t(0.75, 131072);
  CHECK(t.v_exact(1024, 131072) == doctest::Approx(v).epsilon(1e-12));
  // definition in terms of the table
  const double direct = t.a(1024) * t.a(1024) / 1024.0 * (t.m(131072) - t.m(1024));
  CHECK(v == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("v_exact (2p-1) limits") {
  for (double p : {0.6, 0.75}) {
    const std::uint64_t n = 100000;
    const double a = a_seq(p, n);
    // N = 128 n keeps a fixed fraction (1/128)^{2p-1} of the tail out
    const double corr = 1.0 - std::pow(1.0 / 128, 2 * p - 1);
    CHECK(std::abs(v_exact(p, n, 128 * n) * (2 * p - 1) / corr - 1.0) < 0.01);
    // infinite horizon through the enclosure of lim m_n
    const auto w = limit_variance_W(p, 1e-6);
    const double v_inf = a * a / n * (0.5 * (w.lower + w.upper) - exact_second_moment(p, n));
    CHECK(std::abs(v_inf * (2 * p - 1) - 1.0) < 0.01);
  }
}

TEST_CASE("tail envelope") {
  for (double p : {0.6, 0.75, 0.9}) {
    const ExactMoments t(p, 40000);
    const double g2 = std::exp(2 * log_gamma(1 + p));
    for (std::uint64_t n : {100ull, 1000ull, 20000ull}) {
      double env = 0.0;
      for (std::uint64_t k = n + 1; k <= 2 * n; ++k) env += std::pow(static_cast<double>(k), -2 * p);
      CHECK(t.m(2 * n) - t.m(n) <= g2 * env * (1 + 1e-2));
    }
  }
}

TEST_CASE("limit_variance_W encloses the recursion") {
  const auto b75 = limit_variance_W(0.75, 1e-4);
  CHECK(b75.width() <= 1e-4);
  const ExactMoments t(0.75, 1000000);
  for (std::uint64_t n : {1ull, 100ull, 10000ull, 1000000ull}) CHECK(b75.upper >= t.m(n));
  // stable: a tighter tolerance stays inside the looser interval
  const auto tight = limit_variance_W(0.75, 1e-6);
  CHECK(tight.lower >= b75.lower - 1e-15);
  CHECK(tight.upper <= b75.upper + 1e-15);

  const auto b6 = limit_variance_W(0.6, 1e-3);
  CHECK(b6.width() <= 1e-3);
  const ExactMoments t6(0.6, 4000000);
  for (std::uint64_t n = 1000000; n <= 4000000; n += 500000) CHECK(b6.upper >= t6.m(n));
  CHECK(b6.lower <= b6.upper);
  CHECK_THROWS_AS(limit_variance_W(0.5, 1e-3), std::domain_error);
  CHECK_THROWS_AS(limit_variance_W(0.3, 1e-3), std::domain_error);
}

TEST_CASE("centering discrepancy") {
  CHECK(centering_discrepancy(0.75, 1) == 0.0);
  CHECK(centering_discrepancy(0.75, 2) == doctest::Approx(-0.0482299).epsilon(1e-6));
  for (double p : {0.6, 0.75}) {
    const double r = centering_discrepancy(p, 1000000) / centering_asymptote(p, 1000000);
    CHECK(std::abs(r - 1.0) <= 0.01);
    for (std::uint64_t n = 64; n <= 20000; ++n)
      REQUIRE(std::abs(centering_discrepancy(p, 2 * n)) > std::abs(centering_discrepancy(p, n)));
  }
  // Gamma(1.75) by the log-gamma routine
  CHECK(std::exp(log_gamma(1.75)) == doctest::Approx(0.9190625).epsilon(1e-6));
}

TEST_CASE("lln ratio") {
  CHECK(lln_exact(0.75, 1) == 1.0);
  CHECK(lln_exact(0.75, 2) == doctest::Approx(0.875).epsilon(1e-14));
  CHECK(lln_exact(0.75, 100000) < lln_exact(0.75, 10000));
  const ExactMoments t(0.75, 100);
  CHECK(t.lln_ratio(2) == doctest::Approx(0.875));
}
