#pragma once

namespace unitrhythm::special {

/// psi(x) for x > 0: upward recurrence to x >= 10, then the asymptotic series.
double digamma(double x);
/// psi'(x) for x > 0, same scheme as digamma.
double trigamma(double x);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
/// Series for x < a + 1, Lentz continued fraction for Q otherwise.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

}  // namespace unitrhythm::special
