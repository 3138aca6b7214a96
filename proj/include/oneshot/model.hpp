#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace oneshot {

/// Parameters of the log-linear hazard link lambda(w) = alpha0 * exp(alpha1 * w).
class ModelParams {
 public:
  /// Throws Error(InvalidArgument) unless alpha0 > 0 and both are finite.
  ModelParams(double alpha0, double alpha1);

  /// Builds from the solver's internal coordinates (log alpha0, alpha1).
  static ModelParams from_log_scale(double log_alpha0, double alpha1);

  double alpha0() const noexcept { return alpha0_; }
  double alpha1() const noexcept { return alpha1_; }
  double log_alpha0() const noexcept { return log_alpha0_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double alpha0_;
  double alpha1_;
  double log_alpha0_;
};

/// Design of a one-shot device experiment: I stress levels, J inspection
/// times and a device count per (stress, time) cell, stored row-major.
class TestPlan {
 public:
  TestPlan(std::vector<double> stresses, std::vector<double> times,
           std::vector<std::int64_t> devices);

  /// Every cell receives the same number of devices.
  static TestPlan balanced(std::vector<double> stresses,
                           std::vector<double> times, std::int64_t devices);

  std::size_t stress_count() const noexcept { return stresses_.size(); }
  std::size_t time_count() const noexcept { return times_.size(); }
  std::size_t cell_count() const noexcept { return devices_.size(); }

  double stress(std::size_t i) const { return stresses_.at(i); }
  double time(std::size_t j) const { return times_.at(j); }
  std::int64_t devices(std::size_t i, std::size_t j) const {
    return devices_.at(i * times_.size() + j);
  }

  std::span<const double> stresses() const noexcept { return stresses_; }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const std::int64_t> devices() const noexcept { return devices_; }

  /// Mean cell size; equals K for balanced plans.
  double mean_devices() const noexcept { return mean_devices_; }
  std::int64_t total_devices() const noexcept;
  bool is_balanced() const noexcept;

  /// Same stresses and times with every cell set to `devices`.
  TestPlan with_devices(std::int64_t devices) const;

  friend bool operator==(const TestPlan&, const TestPlan&) = default;

 private:
  std::vector<double> stresses_;
  std::vector<double> times_;
  std::vector<std::int64_t> devices_;
  double mean_devices_ = 0.0;
};

/// Observed failure counts n_ij aligned with a TestPlan.
class FailureTable {
 public:
  FailureTable(TestPlan plan, std::vector<std::int64_t> failures);

  const TestPlan& plan() const noexcept { return plan_; }
  std::int64_t failures(std::size_t i, std::size_t j) const {
    return failures_.at(i * plan_.time_count() + j);
  }
  std::span<const std::int64_t> failures() const noexcept { return failures_; }

  /// Observed failure fraction n_ij / K_ij.
  double failure_fraction(std::size_t i, std::size_t j) const {
    return static_cast<double>(failures(i, j)) /
           static_cast<double>(plan_.devices(i, j));
  }

  /// False when every count is zero or every cell is saturated; the
  /// minimiser then escapes to alpha0 -> 0 or alpha0 -> infinity.
  bool has_interior_data() const noexcept;

  friend bool operator==(const FailureTable&, const FailureTable&) = default;

 private:
  TestPlan plan_;
  std::vector<std::int64_t> failures_;
};

/// Probability vector of length 2*I*J ordered (failure, survival) per cell,
/// cells row-major over (stress, time).
using ProbabilityVector = std::vector<double>;

double hazard(const ModelParams& params, double w) noexcept;
double cdf(const ModelParams& params, double w, double t) noexcept;
double pdf(const ModelParams& params, double w, double t) noexcept;
double reliability(const ModelParams& params, double w, double t) noexcept;
double mean_lifetime(const ModelParams& params, double w) noexcept;

ProbabilityVector theoretical_probs(const ModelParams& params,
                                    const TestPlan& plan);
ProbabilityVector observed_probs(const FailureTable& table);

/// Quantities of a single cell at rate lambda and time t, computed with
/// expm1 so that F keeps full relative precision when lambda*t is small.
struct CellState {
  double exposure;  // u = lambda * t
  double cdf;       // F = 1 - exp(-u)
  double survival;  // 1 - F
  double density;   // f = lambda * exp(-u)
};

CellState cell_state(const ModelParams& params, double w, double t) noexcept;

}  // namespace oneshot
