#include "unitrhythm/special.hpp"

#include <cmath>
#include <limits>

#include "unitrhythm/error.hpp"

namespace unitrhythm::special {

namespace {

constexpr double kAsymptoticFrom = 10.0;
constexpr double kEps = 1e-16;
constexpr int kMaxTerms = 10000;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " needs a positive finite argument");
  }
}

double series_p(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw Error(ErrorKind::NoConvergence, "incomplete gamma series did not converge");
}

double continued_fraction_q(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw Error(ErrorKind::NoConvergence, "incomplete gamma continued fraction did not converge");
}

}  // namespace

double digamma(double x) {
  require_positive(x, "digamma");
  double result = 0.0;
  while (x < kAsymptoticFrom) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number tail: -sum B_2k / (2k x^2k)
  const double tail =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return result + std::log(x) - 0.5 * inv - tail;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double result = 0.0;
  while (x < kAsymptoticFrom) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double tail =
      inv * inv2 *
      (1.0 / 6 -
       inv2 * (1.0 / 30 -
               inv2 * (1.0 / 42 - inv2 * (1.0 / 30 - inv2 * (5.0 / 66 - inv2 * (691.0 / 2730 -
                                                                                 inv2 * 7.0 / 6))))));
  return result + inv + 0.5 * inv2 + tail;
}

double gamma_p(double a, double x) {
  require_positive(a, "gamma_p shape");
  if (std::isnan(x) || x < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "gamma_p needs x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return series_p(a, x);
  return 1.0 - continued_fraction_q(a, x);
}

double gamma_q(double a, double x) {
  require_positive(a, "gamma_q shape");
  if (std::isnan(x) || x < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "gamma_q needs x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - series_p(a, x);
  return continued_fraction_q(a, x);
}

}  // namespace unitrhythm::special
