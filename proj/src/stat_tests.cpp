#include "srw/stat_tests.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

#include "srw/compensated_sum.hpp"

namespace srw {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("normal_quantile requires 0 < u < 1");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double kolmogorov_sf(double lambda) {
  if (std::isnan(lambda)) throw std::domain_error("kolmogorov_sf: NaN argument");
  if (lambda <= 0.0) return 1.0;
  // The alternating series converges slowly for small lambda, where the
  // survival function is 1 to double precision anyway.
  if (lambda < 0.18) return 1.0;
  double sum = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-14) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_statistic(std::span<const double> xs, const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    const double upper = static_cast<double>(i + 1) / n - f;
    const double lower = f - static_cast<double>(i) / n;
    d = std::max({d, upper, lower});
  }
  return d;
}

TestReport ks_test(std::span<const double> xs, const std::function<double(double)>& cdf,
                   double alpha, std::string name) {
  if (xs.size() < 8) throw std::invalid_argument("ks_test needs at least 8 observations");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::isnan(xs[i])) throw std::invalid_argument("ks_test: NaN in sample");
    if (i > 0 && xs[i] < xs[i - 1]) throw std::invalid_argument("ks_test: sample not sorted");
  }
  TestReport r;
  r.name = std::move(name);
  r.sample_size = xs.size();
  r.statistic = ks_statistic(xs, cdf);
  r.p_value = kolmogorov_sf(std::sqrt(static_cast<double>(xs.size())) * r.statistic);
  r.tolerance = alpha;
  r.pass = *r.p_value > alpha;
  return r;
}

TestReport ks_test_normal(std::span<const double> sample, double variance, double alpha,
                          std::string name) {
  if (!(variance > 0.0)) throw std::invalid_argument("ks_test_normal: variance must be > 0");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(variance);
  auto r = ks_test(sorted, [sd](double x) { return normal_cdf(x / sd); }, alpha, std::move(name));
  r.target = variance;
  return r;
}

SampleMoments sample_moments(std::span<const double> xs) {
  SampleMoments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  m.mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  CompensatedSum q;
  for (double x : xs) q.add((x - m.mean) * (x - m.mean));
  m.variance = q.value() / static_cast<double>(xs.size() - 1);
  return m;
}

MomentZTest moment_z_test(std::span<const double> xs, double target_mean,
                          double target_variance, double z_bound, std::string name) {
  if (xs.size() < 30) throw std::invalid_argument("moment_z_test needs at least 30 observations");
  MomentZTest t;
  t.moments = sample_moments(xs);
  const double r = static_cast<double>(xs.size());
  if (target_variance <= 0.0) {
    const bool constant = std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs[0]; });
    if (!constant || target_variance < 0.0)
      throw std::invalid_argument("moment_z_test: non-positive target variance for a non-constant sample");
    t.z_mean = t.moments.mean == target_mean ? 0.0 : INFINITY;
    t.z_variance = 0.0;
  } else {
    t.z_mean = (t.moments.mean - target_mean) / std::sqrt(target_variance / r);
    t.z_variance = (t.moments.variance - target_variance) / (target_variance * std::sqrt(2.0 / r));
  }
  t.report.name = std::move(name);
  t.report.sample_size = xs.size();
  t.report.statistic = std::max(std::abs(t.z_mean), std::abs(t.z_variance));
  t.report.target = target_variance;
  t.report.tolerance = z_bound;
  t.report.pass = t.report.statistic <= z_bound;
  return t;
}

CovarianceComparison covariance_compare(std::span<const double> rows, std::size_t dim,
                                        const Matrix& target, double z_bound,
                                        std::string name) {
  if (dim == 0 || rows.size() % dim != 0 || target.size() != dim)
    throw std::invalid_argument("covariance_compare: dimension mismatch");
  const std::size_t count = rows.size() / dim;
  if (count < 100) throw std::invalid_argument("covariance_compare needs at least 100 samples");
  if (!target.is_symmetric(1e-12)) throw std::invalid_argument("covariance_compare: target not symmetric");

  Vector mean(dim, 0.0);
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t i = 0; i < dim; ++i) mean[i] += rows[r * dim + i];
  for (double& m : mean) m /= static_cast<double>(count);

  CovarianceComparison out;
  out.sample_covariance = Matrix(dim);
  out.z = Matrix(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) {
      CompensatedSum s;
      for (std::size_t r = 0; r < count; ++r)
        s.add((rows[r * dim + i] - mean[i]) * (rows[r * dim + j] - mean[j]));
      const double c = s.value() / static_cast<double>(count - 1);
      out.sample_covariance(i, j) = out.sample_covariance(j, i) = c;
    }

  double worst = 0.0;
  const double rcount = static_cast<double>(count);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) {
      const double tij = target(i, j);
      const double se = std::sqrt((target(i, i) * target(j, j) + tij * tij) / rcount);
      const double diff = out.sample_covariance(i, j) - tij;
      double z = 0.0;
      if (se > 0.0) z = diff / se;
      else if (diff != 0.0) z = INFINITY;
      out.z(i, j) = out.z(j, i) = z;
      worst = std::max(worst, std::abs(z));
    }

  out.report.name = std::move(name);
  out.report.sample_size = count;
  out.report.statistic = worst;
  out.report.tolerance = z_bound;
  out.report.pass = worst <= z_bound;
  return out;
}

}  // namespace srw
