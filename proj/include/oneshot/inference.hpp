#pragma once

#include <cstdint>

#include "oneshot/covariance.hpp"
#include "oneshot/estimator.hpp"

namespace oneshot {

/// H0: m0 * alpha0 + m1 * alpha1 = d.
class LinearHypothesis {
 public:
  LinearHypothesis(double m0, double m1, double d);
  double m0() const noexcept { return m0_; }
  double m1() const noexcept { return m1_; }
  double d() const noexcept { return d_; }
  /// m' alpha - d.
  double offset(const ModelParams& params) const noexcept;
  double variance(const Matrix2& sigma) const noexcept;

 private:
  double m0_, m1_, d_;
};

struct ZTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  /// m' Sigma m at the estimate.
  double variance = 0.0;
  double normalisation = 0.0;  // mean devices per cell
  const FitResult* fit = nullptr;

  /// |Z| > z_{level/2}.
  bool rejects(double level) const;
};

/// Upper level/2 quantile of the standard normal.
double critical_value(double level);

ZTestResult z_statistic(const FitResult& fit, const TestPlan& plan,
                        const LinearHypothesis& hyp);

/// Approximate power 2 (1 - Phi(z_{level/2} - sqrt(K / m'Sm) (m'a* - d))).
/// The approximation is one-sided; pass abs_effect = true to use
/// |m'a* - d| for two-sided alternatives below the null value.
double approximate_power(const ModelParams& params_star, const TestPlan& plan,
                         TuningParam beta, const LinearHypothesis& hyp,
                         std::int64_t devices, double level,
                         bool abs_effect = false);

/// Smallest per-cell device count whose approximate power reaches
/// target_power: floor(m'Sm (z_{level/2} - Phi^-1(1 - target/2))^2 /
/// (m'a* - d)^2) + 1.
std::int64_t required_devices(const ModelParams& params_star,
                              const TestPlan& plan, TuningParam beta,
                              const LinearHypothesis& hyp, double target_power,
                              double level);

}  // namespace oneshot
