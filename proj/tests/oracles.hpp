#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "unitrhythm/units.hpp"

// Independent reference implementations used as test oracles.
namespace oracle {

using unitrhythm::LogProbMatrix;

// Enumerates every boundary set and, per segmentation, every unit choice.
inline double brute_force_best(const LogProbMatrix& lp, double gamma) {
  const std::size_t T = lp.num_frames(), K = lp.num_units();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < (std::size_t{1} << (T - 1)); ++mask) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t start = 0;
    for (std::size_t t = 1; t < T; ++t) {
      if (mask & (std::size_t{1} << (t - 1))) {
        spans.emplace_back(start, t);
        start = t;
      }
    }
    spans.emplace_back(start, T);
    std::size_t combos = 1;
    for (std::size_t i = 0; i < spans.size(); ++i) combos *= K;
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t code = c;
      double score = 0;
      for (const auto& [s, e] : spans) {
        const std::size_t unit = code % K;
        code /= K;
        for (std::size_t t = s; t < e; ++t) score += lp.values(t, unit);
        score += gamma * static_cast<double>(e - s - 1);
      }
      best = std::max(best, score);
    }
  }
  return best;
}

// Min-cost assignment (Hungarian method) between both samples expanded to the
// common size n*m; W1 is the optimal mean absolute difference.
inline double w1_by_matching(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> x, y;
  for (double v : a)
    for (std::size_t i = 0; i < b.size(); ++i) x.push_back(v);
  for (double v : b)
    for (std::size_t i = 0; i < a.size(); ++i) y.push_back(v);
  const std::size_t n = x.size();
  const double inf = 1e300;
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = std::abs(x[i0 - 1] - y[j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) minv[j] = cur, way[j] = j0;
        if (minv[j] < delta) delta = minv[j], j1 = j;
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0;
  for (std::size_t j = 1; j <= n; ++j) total += std::abs(x[p[j] - 1] - y[j - 1]);
  return total / static_cast<double>(n);
}

// Midpoint rule over the quantile functions on a grid aligned with every breakpoint.
inline double w1_by_quantiles(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t steps = a.size() * b.size() * 64;
  auto q = [](const std::vector<double>& s, double u) {
    return s[std::min(s.size() - 1, static_cast<std::size_t>(u * static_cast<double>(s.size())))];
  };
  double total = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(steps);
    total += std::abs(q(a, u) - q(b, u));
  }
  return total / static_cast<double>(steps);
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * eps) {
    return left + right + (left + right - whole) / 15;
  }
  return simpson(f, a, m, fa, flm, fm, left, eps / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, eps / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), eps, 50);
}

// CDF by quadrature of the density. For shape < 1 the substitution x = s^(1/a)
// removes the singularity at zero.
inline double cdf_by_quadrature(double a, double b, double x) {
  const double lg = std::lgamma(a);
  if (a < 1) {
    auto g = [&](double s) {
      return std::pow(b, a) / (a * std::exp(lg)) * std::exp(-b * std::pow(s, 1.0 / a));
    };
    return integrate(g, 0, std::pow(x, a), 1e-13);
  }
  auto f = [&](double t) {
    return t <= 0 ? (a == 1 ? b : 0.0) : std::exp(a * std::log(b) + (a - 1) * std::log(t) - b * t - lg);
  };
  return integrate(f, 0, x, 1e-13);
}

}  // namespace oracle
