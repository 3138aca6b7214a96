#pragma once

#include <array>

#include "oneshot/divergence.hpp"
#include "oneshot/model.hpp"

namespace oneshot {

/// Dense 2x2 matrix, row-major.
struct Matrix2 {
  std::array<double, 4> v{};

  double operator()(int r, int c) const { return v[r * 2 + c]; }
  double& operator()(int r, int c) { return v[r * 2 + c]; }

  static Matrix2 identity() { return {{1.0, 0.0, 0.0, 1.0}}; }
  double determinant() const { return v[0] * v[3] - v[1] * v[2]; }
  double trace() const { return v[0] + v[3]; }
  double max_abs() const;
  Matrix2 transposed() const { return {{v[0], v[2], v[1], v[3]}}; }
  void symmetrize();
  /// Quadratic form x' M x.
  double quadratic(double x0, double x1) const;

  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b);
  friend Matrix2 operator+(const Matrix2& a, const Matrix2& b);
  friend Matrix2 operator-(const Matrix2& a, const Matrix2& b);
  friend Matrix2 operator*(double s, const Matrix2& a);
  friend bool operator==(const Matrix2&, const Matrix2&) = default;
};

/// Condition number of a symmetric positive definite 2x2 matrix
/// (ratio of eigenvalues); +infinity when not positive definite.
double spd_condition_number(const Matrix2& m);

/// Closed-form inverse of a symmetric 2x2 matrix. Throws
/// Error(SingularInformation) when the condition number exceeds 1e12.
Matrix2 inverse_guarded(const Matrix2& m);

/// True when the 2x2 Cholesky factorisation succeeds.
bool is_positive_definite(const Matrix2& m);

struct SandwichCovariance {
  Matrix2 j_bar;
  /// Middle matrix of the sandwich. For unbalanced plans each cell term is
  /// scaled by mean(K)/K_ij; equals k_bar() for balanced plans.
  Matrix2 k_bar;
  /// J^-1 K J^-1: asymptotic covariance of sqrt(mean K) (alpha_hat - alpha).
  Matrix2 sigma;
  ModelParams at_params;
  TuningParam beta;
};

Matrix2 j_bar(const ModelParams& params, const TestPlan& plan,
              TuningParam beta);
Matrix2 k_bar(const ModelParams& params, const TestPlan& plan,
              TuningParam beta);

/// Per-device Fisher information (1/IJ) sum t^2 f^2 / (F (1-F)) x x'.
Matrix2 fisher_information(const ModelParams& params, const TestPlan& plan);

SandwichCovariance sandwich(const ModelParams& params, const TestPlan& plan,
                            TuningParam beta);

}  // namespace oneshot
