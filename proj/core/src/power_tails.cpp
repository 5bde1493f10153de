#include "exitwalk/power_tails.hpp"

#include <cmath>
#include <cstdint>

#include "exitwalk/errors.hpp"
#include "exitwalk/special_functions.hpp"

namespace exitwalk {

double PowerLogWeight::value(double x) const {
  double v = std::pow(x, -s);
  if (g != 0.0) v /= std::pow(std::log(x + M_E), g);
  return v;
}

double PowerLogWeight::deriv(double x) const {
  const double L = std::log(x + M_E);
  double factor = s;
  if (g != 0.0) factor += g * x / ((x + M_E) * L);
  double v = std::pow(x, -s - 1.0) * factor;
  if (g != 0.0) v /= std::pow(L, g);
  return -v;
}

namespace {

bool summable(const PowerLogWeight& w) {
  if (w.s > 1.0 + 1e-12) return true;
  return std::fabs(w.s - 1.0) <= 1e-12 && w.g >= 2.0 - 1e-12;
}

// integral over u = ln x of exp((1-s)u) / ln^g(e^u + e), s > 1 branch.
double integral_log_space_power(const PowerLogWeight& w, double u0) {
  const double rate = w.s - 1.0;
  if (rate < 1e-4)
    throw ConfigError("tail integral: exponent too close to the divergence "
                      "boundary for stable quadrature");
  const double width = 4.0;
  // panels until the exponential factor alone is below 1e-18 of the head
  const auto n_panels =
      static_cast<std::int64_t>(std::ceil(42.0 / (rate * width)));
  double total = 0.0;
  for (std::int64_t j = 0; j < n_panels; ++j) {
    const double a = u0 + width * static_cast<double>(j);
    const double piece = gauss_panel(
        [&](double u) {
          double v = std::exp((1.0 - w.s) * u);
          if (w.g != 0.0) v /= std::pow(std::log(std::exp(u) + M_E), w.g);
          return v;
        },
        a, a + width, 24);
    total += piece;
    if (piece < total * 1e-18) break;
  }
  return total;
}

// s == 1 branch: integral over u of ln^{-g}(e^u + e); decays like u^{-g}.
double integral_log_space_boundary(const PowerLogWeight& w, double u0) {
  // beyond u = 40 the +e inside the log is below machine epsilon relative
  const double u_exact = 40.0;
  double total = 0.0;
  if (u0 < u_exact) {
    double a = u0;
    while (a < u_exact) {
      const double b = std::min(a * 2.0, u_exact);
      total += gauss_panel(
          [&](double u) {
            return std::pow(std::log(std::exp(u) + M_E), -w.g);
          },
          a, b, 24);
      a = b;
    }
  }
  const double from = std::max(u0, u_exact);
  total += std::pow(from, 1.0 - w.g) / (w.g - 1.0);
  return total;
}

} // namespace

double power_log_integral(const PowerLogWeight& w, double m) {
  if (!(m >= 1.0)) throw ConfigError("tail integral requires m >= 1");
  if (!summable(w)) throw CapabilityError("tail integral diverges");
  if (w.g == 0.0) return std::pow(m, 1.0 - w.s) / (w.s - 1.0);
  const double u0 = std::log(m);
  if (std::fabs(w.s - 1.0) <= 1e-12)
    return integral_log_space_boundary(w, u0);
  return integral_log_space_power(w, u0);
}

double power_log_tail_sum(const PowerLogWeight& w, long long n) {
  if (n < 0) throw ConfigError("tail sum requires n >= 0");
  if (!summable(w))
    throw CapabilityError("tail sum diverges: s=" + std::to_string(w.s) +
                          " g=" + std::to_string(w.g));
  const long long m = std::max(n + 1, 512LL);
  double head = 0.0;
  for (long long k = n + 1; k < m; ++k)
    head += w.value(static_cast<double>(k));
  const auto md = static_cast<double>(m);
  return head + power_log_integral(w, md) + 0.5 * w.value(md) -
         w.deriv(md) / 12.0;
}

} // namespace exitwalk
