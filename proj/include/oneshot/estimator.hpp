#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "oneshot/covariance.hpp"
#include "oneshot/divergence.hpp"
#include "oneshot/model.hpp"

namespace oneshot {

struct SolverConfig {
  int max_iters = 200;
  double grad_tol = 1e-10;   // on the gradient in (log alpha0, alpha1)
  double step_tol = 1e-12;   // on the parameter change in the same coordinates
  bool grid_init = true;     // 41x41 coarse grid before Newton refinement

  void validate() const;
};

struct FitDiagnostics {
  /// Some cell had F outside [1e-300, 1 - 1e-16] and was clamped.
  bool clamped = false;
  /// Converged starts disagreed by more than 1e-6.
  bool multistart_disagreement = false;
  double multistart_spread = 0.0;
  int starts = 0;
  /// Accepted objective values, one per iteration of the winning start.
  std::vector<double> objective_trace;
};

struct FitResult {
  TuningParam beta;
  ModelParams params;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Absent when J is singular at the estimate.
  std::optional<SandwichCovariance> covariance;
  FitDiagnostics diagnostics;
};

/// Left-hand sides of the MDPDE estimating equations
///   sum Kbar (F - n/K) f t [F^(b-1) + (1-F)^(b-1)]       (alpha0)
///   sum Kbar (F - n/K) f t w [F^(b-1) + (1-F)^(b-1)]     (alpha1)
/// which for balanced plans is the familiar sum (K F - n) ... form.
std::pair<double, double> estimating_equations(const FailureTable& table,
                                               const ModelParams& params,
                                               TuningParam beta);

/// Gradient of dpd_objective with respect to (alpha0, alpha1).
std::pair<double, double> objective_gradient(const FailureTable& table,
                                             const ModelParams& params,
                                             TuningParam beta);

/// Minimises dpd_objective. Throws Error(NoInteriorData) for all-zero or
/// all-saturated tables; returns the best iterate with converged = false
/// when max_iters is exhausted.
FitResult fit(const FailureTable& table, TuningParam beta,
              const SolverConfig& config = {});

/// Newton refinement from a caller-provided start, without grid search.
FitResult fit_from(const FailureTable& table, TuningParam beta,
                   const ModelParams& start, const SolverConfig& config = {});

/// Fits each beta in ascending order, warm-starting from the previous
/// estimate.
std::vector<FitResult> fit_path(const FailureTable& table,
                                std::span<const TuningParam> betas,
                                const SolverConfig& config = {});

}  // namespace oneshot
