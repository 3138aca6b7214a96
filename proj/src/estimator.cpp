#include "oneshot/estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "cell_terms.hpp"
#include "oneshot/error.hpp"
#include "oneshot/numeric.hpp"

namespace oneshot {

void SolverConfig::validate() const {
  if (max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  }
  if (!(grad_tol > 0.0) || !(step_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "solver tolerances must be > 0");
  }
}

namespace {

using Theta = std::array<double, 2>;

struct Evaluation {
  double value = std::numeric_limits<double>::infinity();
  Theta grad{};
  Matrix2 hessian;
  Matrix2 expected;
  bool clamped = false;
};

Evaluation evaluate(const FailureTable& table, const Theta& theta,
                    double beta, bool derivatives = true) {
  const TestPlan& plan = table.plan();
  const std::size_t cells = plan.cell_count();
  const double scale = 1.0 / static_cast<double>(cells);
  if (!derivatives) {
    Evaluation ev;
    std::vector<double> values(cells);
    std::size_t c = 0;
    for (std::size_t i = 0; i < plan.stress_count(); ++i) {
      const double lambda = std::exp(theta[0] + theta[1] * plan.stress(i));
      for (std::size_t j = 0; j < plan.time_count(); ++j, ++c) {
        values[c] = detail::cell_value(table.failure_fraction(i, j),
                                       lambda * plan.time(j), beta,
                                       ev.clamped);
      }
    }
    ev.value = pairwise_sum(values) * scale;
    if (!std::isfinite(ev.value)) {
      ev.value = std::numeric_limits<double>::infinity();
    }
    return ev;
  }
  std::vector<double> values(cells), g0(cells), g1(cells);
  std::vector<double> h00(cells), h01(cells), h11(cells);
  std::vector<double> e00(cells), e01(cells), e11(cells);
  Evaluation ev;
  std::size_t c = 0;
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    const double w = plan.stress(i);
    const double lambda = std::exp(theta[0] + theta[1] * w);
    for (std::size_t j = 0; j < plan.time_count(); ++j, ++c) {
      const double u = lambda * plan.time(j);
      const detail::CellTerms t =
          detail::cell_terms(table.failure_fraction(i, j), u, beta);
      ev.clamped = ev.clamped || t.clamped;
      values[c] = t.value;
      g0[c] = t.score;
      g1[c] = t.score * w;
      h00[c] = t.curvature;
      h01[c] = t.curvature * w;
      h11[c] = t.curvature * w * w;
      e00[c] = t.expected;
      e01[c] = t.expected * w;
      e11[c] = t.expected * w * w;
    }
  }
  ev.value = pairwise_sum(values) * scale;
  if (!std::isfinite(ev.value)) {
    ev.value = std::numeric_limits<double>::infinity();
  }
  ev.grad = {pairwise_sum(g0) * scale, pairwise_sum(g1) * scale};
  const double a = pairwise_sum(h00) * scale, b = pairwise_sum(h01) * scale,
               d = pairwise_sum(h11) * scale;
  ev.hessian = {{a, b, b, d}};
  const double ea = pairwise_sum(e00) * scale, eb = pairwise_sum(e01) * scale,
               ed = pairwise_sum(e11) * scale;
  ev.expected = {{ea, eb, eb, ed}};
  return ev;
}

double norm(const Theta& v) { return std::hypot(v[0], v[1]); }

// Solves M d = -g for symmetric positive definite M; false otherwise.
bool solve_descent(const Matrix2& m, const Theta& g, Theta& d) {
  if (!is_positive_definite(m)) return false;
  const double det = m.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) return false;
  d = {-(m.v[3] * g[0] - m.v[1] * g[1]) / det,
       -(-m.v[2] * g[0] + m.v[0] * g[1]) / det};
  return std::isfinite(d[0]) && std::isfinite(d[1]);
}

struct NewtonOutcome {
  Theta theta{};
  double value = std::numeric_limits<double>::infinity();
  double grad_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool clamped = false;
  std::vector<double> trace;
};

NewtonOutcome newton(const FailureTable& table, double beta, Theta theta,
                     const SolverConfig& config) {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  NewtonOutcome out;
  Evaluation ev = evaluate(table, theta, beta);
  out.clamped = ev.clamped;
  out.trace.push_back(ev.value);
  if (!std::isfinite(ev.value)) {
    out.theta = theta;
    return out;
  }

  int it = 0;
  for (; it < config.max_iters; ++it) {
    const double gnorm = norm(ev.grad);
    if (gnorm <= config.grad_tol) break;

    std::array<Theta, 3> dirs{};
    std::array<bool, 3> usable{};
    usable[0] = solve_descent(ev.hessian, ev.grad, dirs[0]);
    usable[1] = solve_descent(ev.expected, ev.grad, dirs[1]);
    dirs[2] = {-ev.grad[0], -ev.grad[1]};
    usable[2] = true;

    bool accepted = false;
    Theta next{};
    Evaluation next_ev;
    for (int k = 0; k < 3 && !accepted; ++k) {
      if (!usable[k]) continue;
      const Theta& d = dirs[k];
      const double slope = ev.grad[0] * d[0] + ev.grad[1] * d[1];
      if (!(slope < 0.0)) continue;
      double step = 1.0;
      for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
        const Theta trial{theta[0] + step * d[0], theta[1] + step * d[1]};
        Evaluation trial_ev = evaluate(table, trial, beta);
        if (trial_ev.value <= ev.value + kArmijo * step * slope) {
          next = trial;
          next_ev = trial_ev;
          accepted = true;
          break;
        }
        // In the quadratic regime the predicted decrease drops below the
        // rounding level of the objective; take the Newton step when it
        // shrinks the gradient.
        if (k < 2 && h == 0 &&
            -0.5 * slope <= 64.0 * kEps * std::max(std::fabs(ev.value), 1e-300) &&
            std::isfinite(trial_ev.value) &&
            trial_ev.value <= ev.value + 64.0 * kEps * std::fabs(ev.value) &&
            norm(trial_ev.grad) < gnorm) {
          next = trial;
          next_ev = trial_ev;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;

    const double moved = std::max(std::fabs(next[0] - theta[0]),
                                  std::fabs(next[1] - theta[1]));
    theta = next;
    ev = next_ev;
    out.clamped = out.clamped || ev.clamped;
    out.trace.push_back(ev.value);
    if (moved < config.step_tol) {
      ++it;
      break;
    }
  }

  out.theta = theta;
  out.value = ev.value;
  out.grad_norm = norm(ev.grad);
  out.iterations = it;
  out.converged = out.grad_norm <= config.grad_tol;
  return out;
}

void require_interior(const FailureTable& table) {
  if (!table.has_interior_data()) {
    throw Error(ErrorCode::NoInteriorData,
                "all cells have zero failures or all cells are saturated; "
                "the estimate does not exist in the interior");
  }
}

// Least-squares fit of log(-log(1 - p)/t) = log alpha0 + alpha1 w, with p
// pulled half a device away from 0 and 1.
Theta regression_start(const FailureTable& table) {
  const TestPlan& plan = table.plan();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const double k = static_cast<double>(plan.devices(i, j));
      const double p =
          std::clamp(table.failure_fraction(i, j), 0.5 / k, 1.0 - 0.5 / k);
      xs.push_back(plan.stress(i));
      ys.push_back(std::log(-std::log1p(-p) / plan.time(j)));
    }
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t c = 0; c < xs.size(); ++c) {
    sxx += (xs[c] - mx) * (xs[c] - mx);
    sxy += (xs[c] - mx) * (ys[c] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - slope * mx, slope};
}

// Coarse 41x41 grid over log-spaced alpha0 in [1e-6, 1] and alpha1 in
// [-1, 1]. Returns the best point (ties within 1e-12 go to the smallest
// alpha0, then alpha1) followed by other discrete local minima.
std::vector<Theta> grid_starts(const FailureTable& table, double beta,
                               std::size_t max_starts) {
  constexpr int kN = 41;
  const double lo = std::log(1e-6), hi = 0.0;
  std::vector<double> values(kN * kN);
  auto theta_at = [&](int a, int b) {
    return Theta{lo + (hi - lo) * a / (kN - 1), -1.0 + 2.0 * b / (kN - 1)};
  };
  for (int a = 0; a < kN; ++a) {
    for (int b = 0; b < kN; ++b) {
      const double v = evaluate(table, theta_at(a, b), beta, false).value;
      values[a * kN + b] =
          std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    }
  }
  const double best = *std::min_element(values.begin(), values.end());
  std::vector<Theta> starts;
  int best_index = -1;
  for (int idx = 0; idx < kN * kN; ++idx) {
    if (values[idx] <= best + 1e-12) {
      best_index = idx;
      break;
    }
  }
  if (best_index < 0) return starts;
  starts.push_back(theta_at(best_index / kN, best_index % kN));

  std::vector<std::pair<double, int>> minima;
  for (int a = 0; a < kN; ++a) {
    for (int b = 0; b < kN; ++b) {
      const int idx = a * kN + b;
      if (idx == best_index || !std::isfinite(values[idx])) continue;
      bool local = true;
      for (int da = -1; da <= 1 && local; ++da) {
        for (int db = -1; db <= 1; ++db) {
          const int na = a + da, nb = b + db;
          if ((da == 0 && db == 0) || na < 0 || nb < 0 || na >= kN ||
              nb >= kN) {
            continue;
          }
          if (values[na * kN + nb] < values[idx]) {
            local = false;
            break;
          }
        }
      }
      if (local) minima.emplace_back(values[idx], idx);
    }
  }
  std::sort(minima.begin(), minima.end());
  for (const auto& [v, idx] : minima) {
    if (starts.size() >= max_starts) break;
    starts.push_back(theta_at(idx / kN, idx % kN));
  }
  return starts;
}

FitResult finish(const FailureTable& table, TuningParam beta,
                 const NewtonOutcome& best, FitDiagnostics diagnostics) {
  const ModelParams params =
      ModelParams::from_log_scale(best.theta[0], best.theta[1]);
  FitResult r{beta, params};
  r.objective = dpd_objective(table, params, beta);
  r.grad_norm = best.grad_norm;
  r.iterations = best.iterations;
  r.converged = best.converged;
  diagnostics.clamped = diagnostics.clamped || best.clamped;
  diagnostics.objective_trace = best.trace;
  r.diagnostics = std::move(diagnostics);
  try {
    r.covariance = sandwich(params, table.plan(), beta);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularInformation) throw;
  }
  return r;
}

FitResult run_starts(const FailureTable& table, TuningParam beta,
                     const std::vector<Theta>& starts,
                     const SolverConfig& config) {
  std::vector<NewtonOutcome> outcomes;
  outcomes.reserve(starts.size());
  for (const Theta& s : starts) {
    outcomes.push_back(newton(table, beta.value(), s, config));
  }
  // Prefer converged runs, then the lower objective, then the earlier start.
  std::size_t best = 0;
  for (std::size_t k = 1; k < outcomes.size(); ++k) {
    const auto& a = outcomes[k];
    const auto& b = outcomes[best];
    const bool better =
        a.converged != b.converged ? a.converged : a.value < b.value;
    if (better) best = k;
  }
  FitDiagnostics diag;
  diag.starts = static_cast<int>(outcomes.size());
  for (const auto& o : outcomes) {
    diag.clamped = diag.clamped || o.clamped;
    if (!o.converged) continue;
    const double spread =
        std::max(std::fabs(o.theta[0] - outcomes[best].theta[0]),
                 std::fabs(o.theta[1] - outcomes[best].theta[1]));
    diag.multistart_spread = std::max(diag.multistart_spread, spread);
  }
  diag.multistart_disagreement = diag.multistart_spread > 1e-6;
  return finish(table, beta, outcomes[best], std::move(diag));
}

}  // namespace

std::pair<double, double> estimating_equations(const FailureTable& table,
                                               const ModelParams& params,
                                               TuningParam beta) {
  const TestPlan& plan = table.plan();
  const double kbar = plan.mean_devices();
  const double b = beta.value();
  std::vector<double> e0, e1;
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    const double w = plan.stress(i);
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const double t = plan.time(j);
      const CellState s = cell_state(params, w, t);
      // f t [F^(b-1) + (1-F)^(b-1)] in the log domain.
      bool clamped = false;
      const double log_f = detail::log_cdf(s.exposure, clamped);
      const double log_ft = std::log(s.exposure) - s.exposure;
      const double weight = std::exp((b - 1.0) * log_f + log_ft) +
                            std::exp(-(b - 1.0) * s.exposure + log_ft);
      const double resid = kbar * (s.cdf - table.failure_fraction(i, j));
      e0.push_back(resid * weight);
      e1.push_back(resid * weight * w);
    }
  }
  return {pairwise_sum(e0), pairwise_sum(e1)};
}

std::pair<double, double> objective_gradient(const FailureTable& table,
                                             const ModelParams& params,
                                             TuningParam beta) {
  const Evaluation ev = evaluate(
      table, Theta{params.log_alpha0(), params.alpha1()}, beta.value());
  return {ev.grad[0] / params.alpha0(), ev.grad[1]};
}

FitResult fit(const FailureTable& table, TuningParam beta,
              const SolverConfig& config) {
  config.validate();
  require_interior(table);
  std::vector<Theta> starts;
  if (config.grid_init) starts = grid_starts(table, beta.value(), 3);
  starts.push_back(regression_start(table));
  return run_starts(table, beta, starts, config);
}

FitResult fit_from(const FailureTable& table, TuningParam beta,
                   const ModelParams& start, const SolverConfig& config) {
  config.validate();
  require_interior(table);
  return run_starts(table, beta, {Theta{start.log_alpha0(), start.alpha1()}},
                    config);
}

std::vector<FitResult> fit_path(const FailureTable& table,
                                std::span<const TuningParam> betas,
                                const SolverConfig& config) {
  if (betas.empty()) {
    throw Error(ErrorCode::InvalidArgument, "fit_path needs at least one beta");
  }
  if (!std::is_sorted(betas.begin(), betas.end())) {
    throw Error(ErrorCode::InvalidArgument,
                "fit_path expects betas in ascending order");
  }
  std::vector<FitResult> path;
  path.reserve(betas.size());
  path.push_back(fit(table, betas.front(), config));
  for (std::size_t k = 1; k < betas.size(); ++k) {
    FitResult r = fit_from(table, betas[k], path.back().params, config);
    if (!r.converged) r = fit(table, betas[k], config);
    path.push_back(std::move(r));
  }
  return path;
}

}  // namespace oneshot
