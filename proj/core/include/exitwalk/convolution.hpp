#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace exitwalk {

/// Linear convolution c[i] = sum_j a[j] b[i-j], truncated to out_len entries.
/// Uses direct summation for small inputs, zero-padded FFT otherwise.
std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b, std::size_t out_len);

/// Power-series reciprocal: returns b with (a * b)[i] = delta_{i0} for
/// i < n. Needs a[0] != 0. Newton doubling with a final correction pass.
std::vector<double> ps_inverse(const std::vector<double>& a, std::size_t n);

/// out[i] = sum_{y=0}^{len(w)-1} w[y] * kfn(x_lo + i + y) for i in [0, count).
/// The kernel is sampled once at the needed offsets and the correlation runs
/// through one convolution.
std::vector<double> correlate_kernel(const std::vector<double>& w,
                                     const std::function<double(long long)>& kfn,
                                     long long x_lo, std::size_t count);

} // namespace exitwalk
