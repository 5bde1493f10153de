#include "exitwalk/special_functions.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>

#include "exitwalk/errors.hpp"

namespace exitwalk {

namespace {

constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

double lanczos_core(double x) {
  // x >= 0.5; returns Gamma(x)
  x -= 1.0;
  double a = kLanczos[0];
  const double t = x + kLanczosG + 0.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + i);
  return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

} // namespace

double lanczos_gamma(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.5) {
    if (x <= 0.0 && x == std::floor(x))
      throw ConfigError("gamma pole at non-positive integer");
    const double s = std::sin(M_PI * x);
    return M_PI / (s * lanczos_core(1.0 - x));
  }
  return lanczos_core(x);
}

double lanczos_lgamma(double x) {
  if (!(x > 0.0)) throw ConfigError("lgamma requires x > 0");
  if (x < 0.5) return std::log(lanczos_gamma(x));
  const double xm = x - 1.0;
  double a = kLanczos[0];
  const double t = xm + kLanczosG + 0.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (xm + i);
  return 0.5 * std::log(2.0 * M_PI) + (xm + 0.5) * std::log(t) - t +
         std::log(a);
}

double log_beta(double a, double b) {
  return lanczos_lgamma(a) + lanczos_lgamma(b) - lanczos_lgamma(a + b);
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 1e-16, kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

} // namespace

double inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw ConfigError("inc_beta requires a, b > 0");
  if (x < 0.0 || x > 1.0) throw ConfigError("inc_beta requires x in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double inc_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw ConfigError("inc_gamma_q domain");
  if (x == 0.0) return 1.0;
  const double lg = lanczos_lgamma(a);
  if (x < a + 1.0) {
    // lower series, return complement
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) {
        const double p = sum * std::exp(-x + a * std::log(x) - lg);
        return 1.0 - p;
      }
    }
    throw NumericError("inc_gamma_q series did not converge");
  }
  // continued fraction for Q directly
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / kTiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16)
      return std::exp(-x + a * std::log(x) - lg) * h;
  }
  throw NumericError("inc_gamma_q continued fraction did not converge");
}

const GaussRule& gauss_legendre(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n == 0 || n > 512) throw ConfigError("gauss_legendre order out of range");

  GaussRule r;
  r.node.resize(n);
  r.weight.resize(n);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.node[i] = -x;
    r.node[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weight[i] = w;
    r.weight[n - 1 - i] = w;
  }
  auto [pos, ok] = cache.emplace(n, std::move(r));
  (void)ok;
  return pos->second;
}

} // namespace exitwalk
