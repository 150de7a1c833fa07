#pragma once

// Reference implementations used only by tests. Each one takes a different
// route from the library: literal history trees instead of count states,
// long-double unnormalized recursions, direct series and quadrature.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Pmf = std::map<Vec, double>;

struct Atom {
  Vec value;
  double prob;
};

inline Vec add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

// Walks every history of the recursion: step 1 fresh; at step i either a
// fresh atom (prob (1-p) mu(a)) or a copy of step u in 1..i-1 (prob p/(i-1)).
inline Pmf reinforced_pmf(const std::vector<Atom>& atoms, double p, int n) {
  Pmf out;
  std::vector<Vec> steps;
  std::function<void(int, double, Vec)> rec = [&](int i, double w, Vec s) {
    if (i > n) {
      out[s] += w;
      return;
    }
    if (i == 1 || p < 1.0) {
      const double fresh = (i == 1) ? 1.0 : 1.0 - p;
      for (const auto& a : atoms) {
        steps.push_back(a.value);
        rec(i + 1, w * fresh * a.prob, add(s, a.value));
        steps.pop_back();
      }
    }
    if (i > 1 && p > 0.0) {
      for (int u = 0; u < i - 1; ++u) {
        const Vec v = steps[u];
        steps.push_back(v);
        rec(i + 1, w * p / (i - 1), add(s, v));
        steps.pop_back();
      }
    }
  };
  rec(1, 1.0, Vec(atoms.front().value.size(), 0.0));
  return out;
}

// Elephant walk on Z^d (d = 1 is the classical elephant): the first step is
// uniform over the 2d unit steps; later, a uniformly remembered step is kept
// with probability q, else one of the other 2d - 1 unit steps is taken.
inline Pmf elephant_pmf(double q, int d, int n) {
  std::vector<Vec> units;
  for (int a = 0; a < d; ++a)
    for (int sgn : {1, -1}) {
      Vec e(d, 0.0);
      e[a] = sgn;
      units.push_back(e);
    }
  Pmf out;
  std::vector<int> hist;
  std::function<void(int, double, Vec)> rec = [&](int i, double w, Vec s) {
    if (i > n) {
      out[s] += w;
      return;
    }
    if (i == 1) {
      for (int k = 0; k < 2 * d; ++k) {
        hist.push_back(k);
        rec(2, w / (2 * d), add(s, units[k]));
        hist.pop_back();
      }
      return;
    }
    for (int u = 0; u < i - 1; ++u) {
      const int r = hist[u];
      for (int k = 0; k < 2 * d; ++k) {
        const double pk = (k == r) ? q : (1.0 - q) / (2 * d - 1);
        if (pk == 0.0) continue;
        hist.push_back(k);
        rec(i + 1, w * pk / (i - 1), add(s, units[k]));
        hist.pop_back();
      }
    }
  };
  rec(1, 1.0, Vec(d, 0.0));
  return out;
}

inline double pmf_distance(const Pmf& a, const Pmf& b) {
  double worst = 0.0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    worst = std::max(worst, std::abs(v - (it == b.end() ? 0.0 : it->second)));
  }
  for (const auto& [k, v] : b)
    if (!a.count(k)) worst = std::max(worst, std::abs(v));
  return worst;
}

inline double pmf_variance_1d(const Pmf& pmf) {
  double m1 = 0, m2 = 0;
  for (const auto& [k, v] : pmf) {
    m1 += v * k[0];
    m2 += v * k[0] * k[0];
  }
  return m2 - m1 * m1;
}

// a_n from the Gamma function directly, in long double.
inline long double a_n(double p, std::uint64_t n) {
  return std::exp(std::lgamma(static_cast<long double>(n) + p) -
                  std::lgamma(static_cast<long double>(n)) - std::lgamma(1.0L + p));
}

// T_n = E(S_n^2) for unit-variance centred steps: T_1 = 1 and
// T_{n+1} = T_n (1 + 2p/n) + 1, from E(X_{n+1} S_n | F_n) = p S_n^2/n.
// Returns m_n = T_n / a_n^2 with a_n by the long-double product.
inline long double m_n(double p, std::uint64_t n) {
  long double t = 1.0L, a = 1.0L;
  for (std::uint64_t k = 1; k < n; ++k) {
    t = t * (1.0L + 2.0L * p / k) + 1.0L;
    a *= (k + static_cast<long double>(p)) / k;
  }
  return t / (a * a);
}

// Phi(z) = 1/2 + phi(z) sum_k z^{2k+1}/(1*3*...*(2k+1)); all terms share a sign.
inline double normal_cdf(double z) {
  long double term = z, sum = z;
  for (int k = 1; k < 500; ++k) {
    term *= static_cast<long double>(z) * z / (2 * k + 1);
    sum += term;
    if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
  }
  const long double pdf = std::exp(-0.5L * z * z) / std::sqrt(2.0L * 3.14159265358979323846L);
  return static_cast<double>(0.5L + pdf * sum);
}

inline double normal_quantile(double u) {
  double lo = -40, hi = 40;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Composite Simpson rule on [a, b] with m (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int m) {
  const double h = (b - a) / m;
  long double s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0L : 2.0L) * f(a + i * h);
  return static_cast<double>(s * h / 3.0L);
}

inline double kolmogorov_sf(double lambda) {
  long double s = 0;
  for (int k = 1; k < 1000; ++k) {
    const long double t = std::exp(-2.0L * k * k * lambda * lambda);
    s += (k % 2 ? 2.0L : -2.0L) * t;
    if (t < 1e-20L) break;
  }
  return static_cast<double>(s);
}

}  // namespace oracle
