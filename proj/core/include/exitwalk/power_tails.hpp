#pragma once

namespace exitwalk {

/// Weight x^{-s} / ln^g(x + e) on x >= 1. The log factor is what keeps the
/// boundary-index families summable (mean finite at s = 2 needs g >= 2 on the
/// first-moment weight {s-1, g}), so g is part of the weight, not a bolt-on.
struct PowerLogWeight {
  double s = 2.0;
  double g = 0.0;

  double value(double x) const;
  double deriv(double x) const;
};

/// sum_{k = n+1}^{infinity} w(k), exact to ~1e-13 relative.
/// Direct summation up to max(n+1, 512), then Euler-Maclaurin closure
/// (integral + w/2 - w'/12). Throws CapabilityError when the series
/// diverges (s < 1, or s == 1 with g <= 1).
double power_log_tail_sum(const PowerLogWeight& w, long long n);

/// integral_m^infinity w(x) dx for m >= 1 (exposed for cross-checks).
double power_log_integral(const PowerLogWeight& w, double m);

} // namespace exitwalk
