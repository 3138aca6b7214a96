#pragma once

#include <span>
#include <utility>

#include "oneshot/model.hpp"

namespace oneshot {

/// Density power divergence tuning parameter; beta = 0 is the
/// Kullback-Leibler (maximum likelihood) branch.
class TuningParam {
 public:
  explicit TuningParam(double beta);
  double value() const noexcept { return beta_; }
  bool is_likelihood() const noexcept { return beta_ == 0.0; }
  friend auto operator<=>(const TuningParam&, const TuningParam&) = default;

 private:
  double beta_;
};

/// Kullback-Leibler divergence sum p log(p/q) with 0 log 0 = 0. Returns
/// +infinity when some q_j = 0 while p_j > 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// d_beta(p, q); the beta = 0 case is kl_divergence.
double dpd(std::span<const double> p, std::span<const double> q,
           TuningParam beta);

/// Cell-averaged MDPDE objective
///   (1/IJ) sum { pi^(b+1) + (1-pi)^(b+1) - (1+b)/b [p pi^b + (1-p)(1-pi)^b] }
/// with p = n/K per cell, and d_KL(p_hat, p(alpha)) at beta = 0. Differs from
/// dpd(observed_probs, theoretical_probs) by a positive factor and an
/// alpha-free constant, so both share their minimisers.
double dpd_objective(const FailureTable& table, const ModelParams& params,
                     TuningParam beta);

/// Binomial log-likelihood sum [n log F + (K-n) log(1-F)]; -infinity for
/// data impossible under params.
double log_likelihood(const FailureTable& table, const ModelParams& params);

/// Failure and survival halves (T1, T2) of d_beta(p_hat, p(alpha)); beta > 0.
std::pair<double, double> t_split(const FailureTable& table,
                                  const ModelParams& params, TuningParam beta);

}  // namespace oneshot
