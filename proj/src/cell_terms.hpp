#pragma once

// Per-cell pieces of the MDPDE objective in the solver coordinates
// theta = (log alpha0, alpha1), evaluated in the log domain so that
// F^(beta-1) and F^(beta-2) never overflow on their own.

#include <cmath>

#include "oneshot/model.hpp"

namespace oneshot::detail {

inline constexpr double kMinCdf = 1e-300;

struct CellTerms {
  double value = 0.0;     // h(F)
  double score = 0.0;     // h'(F) * dF/dtheta0 (dF/dtheta1 = score * w)
  double curvature = 0.0; // d2h/dtheta0^2 (scaled by w, w^2 for the rest)
  double expected = 0.0;  // curvature with F = p (positive semi-definite)
  bool clamped = false;
};

// log(-expm1(-u)) with the lower clamp at kMinCdf.
inline double log_cdf(double u, bool& clamped) {
  const double f = -std::expm1(-u);
  if (!(f >= kMinCdf)) {
    clamped = true;
    return std::log(kMinCdf);
  }
  return std::log(f);
}

// h(F) alone, for objective-only evaluations.
inline double cell_value(double p, double u, double beta, bool& clamped) {
  const double log_f = log_cdf(u, clamped);
  const double log_s = -u;
  if (beta == 0.0) {
    double v = 0.0;
    if (p > 0.0) v += p * (std::log(p) - log_f);
    if (p < 1.0) v += (1.0 - p) * (std::log1p(-p) - log_s);
    return v;
  }
  const double fb = std::exp(beta * log_f);
  const double sb = std::exp(beta * log_s);
  return fb * std::exp(log_f) + sb * std::exp(log_s) -
         (beta + 1.0) / beta * (p * fb + (1.0 - p) * sb);
}

// Contribution of one cell with observed fraction p, exposure u = lambda t.
inline CellTerms cell_terms(double p, double u, double beta) {
  CellTerms c;
  const double f = -std::expm1(-u);
  const double log_f = log_cdf(u, c.clamped);
  const double log_s = -u;
  const double log_ds = log_s + std::log(u);  // log dF/dtheta0 = log(S u)
  const double resid = f - p;
  const double bp1 = beta + 1.0;
  c.value = cell_value(p, u, beta, c.clamped);

  // g * dF: (F^(b-1) + S^(b-1)) * S u
  const double g_ds = std::exp((beta - 1.0) * log_f + log_ds) +
                      std::exp((beta - 1.0) * log_s + log_ds);
  // g * dF^2 and (F^(b-2) - S^(b-2)) * dF^2
  const double g_ds2 = std::exp((beta - 1.0) * log_f + 2.0 * log_ds) +
                       std::exp((beta - 1.0) * log_s + 2.0 * log_ds);
  const double dg_ds2 = std::exp((beta - 2.0) * log_f + 2.0 * log_ds) -
                        std::exp((beta - 2.0) * log_s + 2.0 * log_ds);

  c.score = bp1 * resid * g_ds;
  // h''(F) dF^2 + h'(F) d2F, with d2F/dtheta0^2 = dF (1 - u)
  c.curvature = bp1 * (g_ds2 + resid * (beta - 1.0) * dg_ds2) +
                c.score * (1.0 - u);
  c.expected = bp1 * g_ds2;
  return c;
}

}  // namespace oneshot::detail
