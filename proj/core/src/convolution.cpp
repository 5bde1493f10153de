#include "exitwalk/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>

#include <fftw3.h>

#include "exitwalk/errors.hpp"
#include "fftw_lock.hpp"

namespace exitwalk {

namespace {

std::vector<double> convolve_direct(const std::vector<double>& a,
                                    const std::vector<double>& b,
                                    std::size_t out_len) {
  std::vector<double> c(out_len, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    const std::size_t jmax = std::min(b.size(), out_len - std::min(out_len, i));
    for (std::size_t j = 0; j < jmax; ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

std::vector<double> convolve_fft(const std::vector<double>& a,
                                 const std::vector<double>& b,
                                 std::size_t out_len) {
  const std::size_t full = a.size() + b.size() - 1;
  std::size_t L = 1;
  while (L < full) L *= 2;

  double* buf = fftw_alloc_real(L);
  fftw_complex* fa = fftw_alloc_complex(L / 2 + 1);
  fftw_complex* fb = fftw_alloc_complex(L / 2 + 1);
  fftw_plan fwd, inv;
  {
    std::lock_guard<std::mutex> g(detail::fftw_plan_lock());
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(L), buf, fa, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(L), fa, buf, FFTW_ESTIMATE);
  }

  std::memset(buf, 0, sizeof(double) * L);
  std::memcpy(buf, a.data(), sizeof(double) * a.size());
  fftw_execute_dft_r2c(fwd, buf, fa);
  std::memset(buf, 0, sizeof(double) * L);
  std::memcpy(buf, b.data(), sizeof(double) * b.size());
  fftw_execute_dft_r2c(fwd, buf, fb);

  const double scale = 1.0 / static_cast<double>(L);
  for (std::size_t k = 0; k <= L / 2; ++k) {
    const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
    const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
    fa[k][0] = re * scale;
    fa[k][1] = im * scale;
  }
  fftw_execute_dft_c2r(inv, fa, buf);

  std::vector<double> c(out_len, 0.0);
  const std::size_t n = std::min(out_len, full);
  std::copy(buf, buf + n, c.begin());

  {
    std::lock_guard<std::mutex> g(detail::fftw_plan_lock());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf);
  fftw_free(fa);
  fftw_free(fb);
  return c;
}

} // namespace

std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b,
                             std::size_t out_len) {
  if (out_len == 0) return {};
  if (a.empty() || b.empty()) return std::vector<double>(out_len, 0.0);
  // direct wins while the smaller operand is short
  const std::size_t small = std::min(a.size(), b.size());
  if (small <= 32 || a.size() * b.size() <= 1u << 16)
    return convolve_direct(a, b, out_len);
  return convolve_fft(a, b, out_len);
}

std::vector<double> ps_inverse(const std::vector<double>& a, std::size_t n) {
  if (n == 0) return {};
  if (a.empty() || a[0] == 0.0)
    throw NumericError("power series reciprocal needs a nonzero constant term");

  std::vector<double> b{1.0 / a[0]};
  std::size_t k = 1;
  while (k < n) {
    const std::size_t k2 = std::min(2 * k, n);
    std::vector<double> head(a.begin(),
                             a.begin() + static_cast<long>(std::min(a.size(), k2)));
    // b <- b (2 - a b) mod z^k2
    std::vector<double> ab = convolve(head, b, k2);
    ab[0] -= 2.0;
    for (double& x : ab) x = -x;
    b = convolve(b, ab, k2);
    k = k2;
  }

  // one correction pass keeps FFT rounding out of long series
  std::vector<double> head(a.begin(),
                           a.begin() + static_cast<long>(std::min(a.size(), n)));
  std::vector<double> r = convolve(head, b, n);
  r[0] -= 1.0;
  for (double& x : r) x = -x;
  std::vector<double> corr = convolve(b, r, n);
  for (std::size_t i = 0; i < n; ++i) b[i] += corr[i];
  return b;
}

std::vector<double> correlate_kernel(const std::vector<double>& w,
                                     const std::function<double(long long)>& kfn,
                                     long long x_lo, std::size_t count) {
  if (count == 0) return {};
  if (w.empty()) return std::vector<double>(count, 0.0);
  const std::size_t m = w.size() - 1;

  std::vector<double> ks(count + m);
  for (std::size_t t = 0; t < ks.size(); ++t)
    ks[t] = kfn(x_lo + static_cast<long long>(t));
  std::vector<double> wrev(w.rbegin(), w.rend());

  std::vector<double> c = convolve(wrev, ks, m + count);
  return std::vector<double>(c.begin() + static_cast<long>(m), c.end());
}

} // namespace exitwalk
