#include "oneshot/divergence.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cell_terms.hpp"
#include "oneshot/error.hpp"
#include "oneshot/numeric.hpp"

namespace oneshot {

TuningParam::TuningParam(double beta) : beta_(beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCode::InvalidArgument,
                "tuning parameter beta must be finite and >= 0, got " +
                    std::to_string(beta));
  }
}

namespace {

void check_lengths(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "probability vectors have different lengths");
  }
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q);
  std::vector<double> terms;
  terms.reserve(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] == 0.0) return std::numeric_limits<double>::infinity();
    terms.push_back(p[k] * std::log(p[k] / q[k]));
  }
  return pairwise_sum(terms);
}

double dpd(std::span<const double> p, std::span<const double> q,
           TuningParam beta) {
  if (beta.is_likelihood()) return kl_divergence(p, q);
  check_lengths(p, q);
  const double b = beta.value();
  std::vector<double> terms(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    terms[k] = std::pow(q[k], b + 1.0) -
               (1.0 + 1.0 / b) * std::pow(q[k], b) * p[k] +
               std::pow(p[k], 1.0 + b) / b;
  }
  return pairwise_sum(terms);
}

double dpd_objective(const FailureTable& table, const ModelParams& params,
                     TuningParam beta) {
  const TestPlan& plan = table.plan();
  std::vector<double> terms;
  terms.reserve(plan.cell_count());
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    const double lambda = hazard(params, plan.stress(i));
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const double u = lambda * plan.time(j);
      const double p = table.failure_fraction(i, j);
      if (beta.is_likelihood()) {
        // Exact zero-probability handling instead of the solver's clamp.
        const double f = -std::expm1(-u);
        if ((f == 0.0 && p > 0.0) || (std::isinf(u) && p < 1.0)) {
          return std::numeric_limits<double>::infinity();
        }
      }
      terms.push_back(detail::cell_terms(p, u, beta.value()).value);
    }
  }
  return pairwise_sum(terms) / static_cast<double>(plan.cell_count());
}

double log_likelihood(const FailureTable& table, const ModelParams& params) {
  const TestPlan& plan = table.plan();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(plan.cell_count());
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const double u = hazard(params, plan.stress(i)) * plan.time(j);
      const double f = -std::expm1(-u);
      const double n = static_cast<double>(table.failures(i, j));
      const double rest = static_cast<double>(plan.devices(i, j)) - n;
      double v = 0.0;
      if (n > 0.0) {
        if (f == 0.0) return neg_inf;
        v += n * std::log(f);
      }
      if (rest > 0.0) {
        if (std::isinf(u)) return neg_inf;
        v -= rest * u;
      }
      terms.push_back(v);
    }
  }
  return pairwise_sum(terms);
}

std::pair<double, double> t_split(const FailureTable& table,
                                  const ModelParams& params, TuningParam beta) {
  if (beta.is_likelihood()) {
    throw Error(ErrorCode::Unsupported,
                "t_split is defined for beta > 0; use log_likelihood at 0");
  }
  const TestPlan& plan = table.plan();
  const double b = beta.value();
  const double cells = static_cast<double>(plan.cell_count());
  std::vector<double> t1, t2;
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const CellState s = cell_state(params, plan.stress(i), plan.time(j));
      const double k = static_cast<double>(plan.devices(i, j));
      const double n = static_cast<double>(table.failures(i, j));
      const double qf = s.cdf / cells;
      const double qs = s.survival / cells;
      const double pf = n / (cells * k);
      const double ps = (k - n) / (cells * k);
      t1.push_back(std::pow(qf, 1.0 + b) -
                   (1.0 + 1.0 / b) * std::pow(qf, b) * pf +
                   std::pow(pf, 1.0 + b) / b);
      t2.push_back(std::pow(qs, 1.0 + b) -
                   (1.0 + 1.0 / b) * std::pow(qs, b) * ps +
                   std::pow(ps, 1.0 + b) / b);
    }
  }
  return {pairwise_sum(t1), pairwise_sum(t2)};
}

}  // namespace oneshot
