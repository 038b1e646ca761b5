#pragma once

// Test-only oracles, written independently of the library code paths they
// check.

#include <cmath>
#include <vector>

#include "bandit.hpp"

namespace oracle {

/// Composite-Simpson integral of the N(0, 1/rho) density over [-1, 1]; node
/// count scales with sqrt(rho) so narrow densities stay resolved.
inline double normal_mass_pm1(double rho) {
  int panels = 2000 + 40 * static_cast<int>(std::sqrt(rho));
  if (panels % 2 == 1) ++panels;
  const double norm = std::sqrt(rho / (2.0 * M_PI));
  auto f = [&](double x) { return norm * std::exp(-0.5 * rho * x * x); };
  const double h = 2.0 / panels;
  double sum = f(-1.0) + f(1.0);
  for (int i = 1; i < panels; ++i) sum += f(-1.0 + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

/// Inverse standard normal CDF: Acklam's rational approximation refined by
/// two Halley steps against the erfc-based CDF.
inline double inverse_normal_cdf(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

struct FiniteHorizonDp {
  std::vector<double> values;  // index 0 holds lattice point -k_max
  int kstar = 0;
};

/// Backward induction over a fixed horizon on the same truncated lattice and
/// boundary treatment as the infinite-horizon solver, written from scratch.
inline FiniteHorizonDp bandit_backward_induction(const seqexp::BanditSpec& spec, int k_max,
                                                 int horizon) {
  const int n = 2 * k_max + 1;
  auto pi_at = [&](int j) { return seqexp::belief_at_z(j * spec.alpha); };
  std::vector<double> prev(n, 0.0), cur(n, 0.0);
  for (int h = 0; h < horizon; ++h) {
    for (int idx = 0; idx < n; ++idx) {
      int j = idx - k_max;
      double pi = pi_at(j);
      double qa = pi * spec.p1[0] + (1.0 - pi) * spec.p0[0];
      double qb = pi * spec.p1[1] + (1.0 - pi) * spec.p0[1];
      double qc = pi * spec.p1[2] + (1.0 - pi) * spec.p0[2];
      auto value = [&](int jj) {
        if (jj < -k_max) return 0.0;
        if (jj > k_max) return 2.0 * pi_at(jj) - 1.0;
        return prev[static_cast<std::size_t>(jj + k_max)];
      };
      double pull = (1.0 - spec.delta) * (2.0 * pi - 1.0) +
                    spec.delta * (qa * value(j + 1) + qb * value(j + 2) + qc * value(j - 1));
      cur[static_cast<std::size_t>(idx)] = pull > 0.0 ? pull : 0.0;
    }
    prev.swap(cur);
  }
  FiniteHorizonDp out;
  out.values = prev;
  out.kstar = k_max;
  for (int k = 0; k <= k_max; ++k) {
    if (out.values[static_cast<std::size_t>(-k + k_max)] == 0.0) {
      out.kstar = k;
      break;
    }
  }
  return out;
}

}  // namespace oracle
