// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical kernels.

#ifndef PQMASS_TESTS_ORACLES_HPP_
#define PQMASS_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace oracle {

inline double chi2_density(double x, double dof) {
  if (x <= 0.0) return 0.0;
  const double k = 0.5 * dof;
  return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

namespace detail {
inline double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-14) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return detail::adaptive(f, a, b, fa, fm, fb, detail::simpson(fa, fm, fb, a, b), tol, 60);
}

// Upper tail of the chi-squared density, integrated over [x, x + span] in
// unit-length panels so steep regions near the origin get their own panels.
inline double chi2_upper_tail(double x, double dof) {
  auto f = [dof](double t) { return chi2_density(t, dof); };
  const double upper = std::max(x, dof) + 40.0 * std::sqrt(2.0 * dof) + 200.0;
  double total = 0.0;
  double a = x;
  double width = std::max(x, 1e-3);
  while (a < upper) {
    const double b = std::min(upper, a + std::min(width, 4.0));
    total += integrate(f, a, b, 1e-15);
    a = b;
    width *= 2.0;
  }
  return total;
}

// Kolmogorov survival function from the alternating series, summed to
// convergence. Valid for lambda >= 0.2.
inline double kolmogorov_sf(double lambda) {
  double s = 0.0;
  for (int k = 1; k < 2000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return s;
}

// Minimum edit cost by exhaustive recursion over the last operation.
inline std::size_t edit_distance(const std::u32string& a, const std::u32string& b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::u32string a1 = a.substr(0, a.size() - 1);
  const std::u32string b1 = b.substr(0, b.size() - 1);
  const std::size_t sub = edit_distance(a1, b1) + (a.back() == b.back() ? 0 : 1);
  const std::size_t del = edit_distance(a1, b) + 1;
  const std::size_t ins = edit_distance(a, b1) + 1;
  return std::min({sub, del, ins});
}

// Straight Pearson chi-squared with expected counts m p_j and n p_j.
inline double pearson(const std::vector<double>& kx, const std::vector<double>& ky) {
  double m = 0.0, n = 0.0;
  for (double v : kx) m += v;
  for (double v : ky) n += v;
  double chi2 = 0.0;
  for (std::size_t j = 0; j < kx.size(); ++j) {
    const double p = (kx[j] + ky[j]) / (m + n);
    if (p == 0.0) continue;
    chi2 += (kx[j] - m * p) * (kx[j] - m * p) / (m * p);
    chi2 += (ky[j] - n * p) * (ky[j] - n * p) / (n * p);
  }
  return chi2;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle

#endif  // PQMASS_TESTS_ORACLES_HPP_
