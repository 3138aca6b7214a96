#include "oneshot/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oneshot/error.hpp"

namespace oneshot {

double Matrix2::max_abs() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

void Matrix2::symmetrize() {
  const double off = 0.5 * (v[1] + v[2]);
  v[1] = off;
  v[2] = off;
}

double Matrix2::quadratic(double x0, double x1) const {
  return x0 * (v[0] * x0 + v[1] * x1) + x1 * (v[2] * x0 + v[3] * x1);
}

Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
  return {{a.v[0] * b.v[0] + a.v[1] * b.v[2], a.v[0] * b.v[1] + a.v[1] * b.v[3],
           a.v[2] * b.v[0] + a.v[3] * b.v[2],
           a.v[2] * b.v[1] + a.v[3] * b.v[3]}};
}

Matrix2 operator+(const Matrix2& a, const Matrix2& b) {
  return {{a.v[0] + b.v[0], a.v[1] + b.v[1], a.v[2] + b.v[2], a.v[3] + b.v[3]}};
}

Matrix2 operator-(const Matrix2& a, const Matrix2& b) {
  return {{a.v[0] - b.v[0], a.v[1] - b.v[1], a.v[2] - b.v[2], a.v[3] - b.v[3]}};
}

Matrix2 operator*(double s, const Matrix2& a) {
  return {{s * a.v[0], s * a.v[1], s * a.v[2], s * a.v[3]}};
}

bool is_positive_definite(const Matrix2& m) {
  if (!(m.v[0] > 0.0)) return false;
  const double l10 = m.v[2] / std::sqrt(m.v[0]);
  return m.v[3] - l10 * l10 > 0.0;
}

double spd_condition_number(const Matrix2& m) {
  if (!is_positive_definite(m)) return std::numeric_limits<double>::infinity();
  const double half_trace = 0.5 * m.trace();
  const double diff = 0.5 * (m.v[0] - m.v[3]);
  const double radius = std::hypot(diff, 0.5 * (m.v[1] + m.v[2]));
  const double largest = half_trace + radius;
  // The small eigenvalue via det / largest avoids cancellation.
  const double smallest = m.determinant() / largest;
  if (!(smallest > 0.0)) return std::numeric_limits<double>::infinity();
  return largest / smallest;
}

Matrix2 inverse_guarded(const Matrix2& m) {
  constexpr double kMaxCondition = 1e12;
  const double cond = spd_condition_number(m);
  if (!(cond < kMaxCondition)) {
    throw Error(ErrorCode::SingularInformation,
                "information matrix is singular or ill-conditioned");
  }
  const double det = m.determinant();
  Matrix2 inv{{m.v[3] / det, -m.v[1] / det, -m.v[2] / det, m.v[0] / det}};
  inv.symmetrize();
  return inv;
}

namespace {

enum class Bracket { J, K, Fisher };

// sum over cells of weight * t^2 f^2 * bracket(F) * [[1/a0^2, w/a0], [., w^2]]
template <typename Weight>
Matrix2 assemble(const ModelParams& params, const TestPlan& plan, double beta,
                 Bracket kind, Weight weight) {
  Matrix2 acc;
  const double a0 = params.alpha0();
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    const double w = plan.stress(i);
    double row = 0.0;
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const double t = plan.time(j);
      const CellState s = cell_state(params, w, t);
      if (s.density == 0.0 || s.cdf == 0.0) continue;
      const double F = s.cdf;
      const double S = s.survival;
      double bracket = 0.0;
      switch (kind) {
        case Bracket::J:
          bracket = std::pow(F, beta - 1.0) + std::pow(S, beta - 1.0);
          break;
        case Bracket::K: {
          const double diff = std::pow(F, beta) - std::pow(S, beta);
          bracket = std::pow(F, 2.0 * beta - 1.0) +
                    std::pow(S, 2.0 * beta - 1.0) - diff * diff;
          break;
        }
        case Bracket::Fisher:
          bracket = 1.0 / (F * S);
          break;
      }
      row += weight(i, j) * t * t * s.density * s.density * bracket;
    }
    acc.v[0] += row / (a0 * a0);
    acc.v[1] += row * w / a0;
    acc.v[3] += row * w * w;
  }
  acc.v[2] = acc.v[1];
  return acc;
}

constexpr auto kUnit = [](std::size_t, std::size_t) { return 1.0; };

}  // namespace

Matrix2 j_bar(const ModelParams& params, const TestPlan& plan,
              TuningParam beta) {
  return assemble(params, plan, beta.value(), Bracket::J, kUnit);
}

Matrix2 k_bar(const ModelParams& params, const TestPlan& plan,
              TuningParam beta) {
  return assemble(params, plan, beta.value(), Bracket::K, kUnit);
}

Matrix2 fisher_information(const ModelParams& params, const TestPlan& plan) {
  Matrix2 m = assemble(params, plan, 0.0, Bracket::Fisher, kUnit);
  return (1.0 / static_cast<double>(plan.cell_count())) * m;
}

SandwichCovariance sandwich(const ModelParams& params, const TestPlan& plan,
                            TuningParam beta) {
  const Matrix2 j = j_bar(params, plan, beta);
  Matrix2 middle;
  if (plan.is_balanced()) {
    middle = k_bar(params, plan, beta);
  } else {
    // Cell p_hat = n/K_ij has variance F(1-F)/K_ij; normalised to mean(K).
    const double kbar = plan.mean_devices();
    middle = assemble(params, plan, beta.value(), Bracket::K,
                      [&](std::size_t i, std::size_t jj) {
                        return kbar / static_cast<double>(plan.devices(i, jj));
                      });
  }
  const Matrix2 j_inv = inverse_guarded(j);
  Matrix2 sigma = j_inv * middle * j_inv;
  sigma.symmetrize();
  return {j, middle, sigma, params, beta};
}

}  // namespace oneshot
