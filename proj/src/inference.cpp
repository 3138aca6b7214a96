#include "oneshot/inference.hpp"

#include <cmath>
#include <limits>

#include "oneshot/error.hpp"
#include "oneshot/numeric.hpp"

namespace oneshot {

LinearHypothesis::LinearHypothesis(double m0, double m1, double d)
    : m0_(m0), m1_(m1), d_(d) {
  if (m0 == 0.0 && m1 == 0.0) {
    throw Error(ErrorCode::InvalidArgument,
                "hypothesis vector m must not be zero");
  }
  if (!std::isfinite(m0) || !std::isfinite(m1) || !std::isfinite(d)) {
    throw Error(ErrorCode::InvalidArgument, "hypothesis must be finite");
  }
}

double LinearHypothesis::offset(const ModelParams& params) const noexcept {
  return m0_ * params.alpha0() + m1_ * params.alpha1() - d_;
}

double LinearHypothesis::variance(const Matrix2& sigma) const noexcept {
  return sigma.quadratic(m0_, m1_);
}

double critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
  }
  return normal_quantile(1.0 - level / 2.0);
}

bool ZTestResult::rejects(double level) const {
  return std::fabs(statistic) > critical_value(level);
}

ZTestResult z_statistic(const FitResult& fit, const TestPlan& plan,
                        const LinearHypothesis& hyp) {
  if (!fit.converged) {
    throw Error(ErrorCode::InvalidArgument,
                "z_statistic needs a converged fit");
  }
  const SandwichCovariance cov = sandwich(fit.params, plan, fit.beta);
  const double v = hyp.variance(cov.sigma);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::DegenerateVariance,
                "m' Sigma m is not positive at the estimate");
  }
  ZTestResult r;
  r.variance = v;
  r.normalisation = plan.mean_devices();
  r.statistic = std::sqrt(r.normalisation / v) * hyp.offset(fit.params);
  r.p_value = 2.0 * normal_sf(std::fabs(r.statistic));
  r.fit = &fit;
  return r;
}

double approximate_power(const ModelParams& params_star, const TestPlan& plan,
                         TuningParam beta, const LinearHypothesis& hyp,
                         std::int64_t devices, double level, bool abs_effect) {
  if (devices < 1) {
    throw Error(ErrorCode::InvalidArgument, "device count must be >= 1");
  }
  const double z = critical_value(level);
  const SandwichCovariance cov = sandwich(params_star, plan, beta);
  const double v = hyp.variance(cov.sigma);
  if (!(v > 0.0)) {
    throw Error(ErrorCode::DegenerateVariance, "m' Sigma m is not positive");
  }
  double effect = hyp.offset(params_star);
  if (abs_effect) effect = std::fabs(effect);
  const double shift = std::sqrt(static_cast<double>(devices) / v) * effect;
  return 2.0 * normal_sf(z - shift);
}

std::int64_t required_devices(const ModelParams& params_star,
                              const TestPlan& plan, TuningParam beta,
                              const LinearHypothesis& hyp, double target_power,
                              double level) {
  const double effect = hyp.offset(params_star);
  if (effect == 0.0) {
    throw Error(ErrorCode::InfeasibleDesign,
                "true parameters satisfy the null hypothesis");
  }
  if (!(target_power > level && target_power < 1.0)) {
    throw Error(ErrorCode::InfeasibleDesign,
                "target power must lie in (level, 1)");
  }
  const double z = critical_value(level);
  const double q = normal_quantile(1.0 - target_power / 2.0);
  const SandwichCovariance cov = sandwich(params_star, plan, beta);
  const double v = hyp.variance(cov.sigma);
  if (!(v > 0.0)) {
    throw Error(ErrorCode::DegenerateVariance, "m' Sigma m is not positive");
  }
  const double k = v * (z - q) * (z - q) / (effect * effect);
  if (!(k < 9e18)) {
    throw Error(ErrorCode::InfeasibleDesign, "required device count overflows");
  }
  return static_cast<std::int64_t>(std::floor(k)) + 1;
}

}  // namespace oneshot
