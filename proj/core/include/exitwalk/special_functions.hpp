#pragma once

#include <cstddef>
#include <vector>

namespace exitwalk {

/// Gamma function via a Lanczos approximation (g = 7, 9 coefficients).
/// Relative error is a few units in the 14th digit over the real line away
/// from the poles, which is what the downstream stable-limit constants need.
double lanczos_gamma(double x);
double lanczos_lgamma(double x); // log|Gamma(x)|, x > 0

/// Regularized incomplete beta I_x(a, b) by continued fraction (modified
/// Lentz), switching to the symmetric complement when x is past the mean
/// a/(a+b) so the fraction always converges fast. a, b > 0, x in [0, 1].
double inc_beta(double a, double b, double x);

/// Regularized upper incomplete gamma Q(a, x) (series for x < a+1, continued
/// fraction otherwise). Used for chi-square p-values.
double inc_gamma_q(double a, double x);

double log_beta(double a, double b);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration and cached per n.
struct GaussRule {
  std::vector<double> node;
  std::vector<double> weight;
};
const GaussRule& gauss_legendre(std::size_t n);

/// Integrate f over [a, b] with one n-point Gauss-Legendre panel.
template <class F>
double gauss_panel(F&& f, double a, double b, std::size_t n = 16) {
  const GaussRule& r = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.node.size(); ++i)
    s += r.weight[i] * f(mid + half * r.node[i]);
  return s * half;
}

} // namespace exitwalk
