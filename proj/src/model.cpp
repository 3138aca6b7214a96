#include "oneshot/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oneshot/error.hpp"

namespace oneshot {

ModelParams::ModelParams(double alpha0, double alpha1)
    : alpha0_(alpha0), alpha1_(alpha1), log_alpha0_(0.0) {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) {
    throw Error(ErrorCode::InvalidArgument,
                "alpha0 must be positive and finite, got " +
                    std::to_string(alpha0));
  }
  if (!std::isfinite(alpha1)) {
    throw Error(ErrorCode::InvalidArgument, "alpha1 must be finite");
  }
  log_alpha0_ = std::log(alpha0);
}

ModelParams ModelParams::from_log_scale(double log_alpha0, double alpha1) {
  ModelParams p(std::exp(log_alpha0), alpha1);
  p.log_alpha0_ = log_alpha0;
  return p;
}

TestPlan::TestPlan(std::vector<double> stresses, std::vector<double> times,
                   std::vector<std::int64_t> devices)
    : stresses_(std::move(stresses)),
      times_(std::move(times)),
      devices_(std::move(devices)) {
  if (stresses_.empty() || times_.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "test plan needs at least one stress level and one time");
  }
  if (devices_.size() != stresses_.size() * times_.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "device counts must have I*J entries");
  }
  for (double w : stresses_) {
    if (!std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "stress levels must be finite");
    }
  }
  for (std::size_t a = 0; a < stresses_.size(); ++a) {
    for (std::size_t b = a + 1; b < stresses_.size(); ++b) {
      if (stresses_[a] == stresses_[b]) {
        throw Error(ErrorCode::InvalidArgument,
                    "stress levels must be pairwise distinct");
      }
    }
  }
  for (double t : times_) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw Error(ErrorCode::InvalidArgument,
                  "inspection times must be positive and finite");
    }
  }
  for (std::int64_t k : devices_) {
    if (k < 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "every cell needs at least one device");
    }
  }
  mean_devices_ = static_cast<double>(total_devices()) /
                  static_cast<double>(devices_.size());
}

TestPlan TestPlan::balanced(std::vector<double> stresses,
                            std::vector<double> times, std::int64_t devices) {
  const std::size_t cells = stresses.size() * times.size();
  return TestPlan(std::move(stresses), std::move(times),
                  std::vector<std::int64_t>(cells, devices));
}

std::int64_t TestPlan::total_devices() const noexcept {
  return std::accumulate(devices_.begin(), devices_.end(), std::int64_t{0});
}

bool TestPlan::is_balanced() const noexcept {
  return std::all_of(devices_.begin(), devices_.end(),
                     [&](std::int64_t k) { return k == devices_.front(); });
}

TestPlan TestPlan::with_devices(std::int64_t devices) const {
  return balanced(stresses_, times_, devices);
}

FailureTable::FailureTable(TestPlan plan, std::vector<std::int64_t> failures)
    : plan_(std::move(plan)), failures_(std::move(failures)) {
  if (failures_.size() != plan_.cell_count()) {
    throw Error(ErrorCode::InvalidArgument,
                "failure counts do not match the plan dimensions");
  }
  const auto devices = plan_.devices();
  for (std::size_t c = 0; c < failures_.size(); ++c) {
    if (failures_[c] < 0 || failures_[c] > devices[c]) {
      throw Error(ErrorCode::InvalidArgument,
                  "failure count out of range [0, K] in cell " +
                      std::to_string(c));
    }
  }
}

bool FailureTable::has_interior_data() const noexcept {
  const auto devices = plan_.devices();
  bool all_zero = true;
  bool all_full = true;
  for (std::size_t c = 0; c < failures_.size(); ++c) {
    all_zero = all_zero && failures_[c] == 0;
    all_full = all_full && failures_[c] == devices[c];
  }
  return !all_zero && !all_full;
}

double hazard(const ModelParams& params, double w) noexcept {
  return params.alpha0() * std::exp(params.alpha1() * w);
}

CellState cell_state(const ModelParams& params, double w, double t) noexcept {
  const double lambda = hazard(params, w);
  const double u = lambda * t;
  const double survival = std::exp(-u);
  return {u, -std::expm1(-u), survival, lambda * survival};
}

double cdf(const ModelParams& params, double w, double t) noexcept {
  return -std::expm1(-hazard(params, w) * t);
}

double pdf(const ModelParams& params, double w, double t) noexcept {
  const double lambda = hazard(params, w);
  return lambda * std::exp(-lambda * t);
}

double reliability(const ModelParams& params, double w, double t) noexcept {
  return std::exp(-hazard(params, w) * t);
}

double mean_lifetime(const ModelParams& params, double w) noexcept {
  return 1.0 / hazard(params, w);
}

ProbabilityVector theoretical_probs(const ModelParams& params,
                                    const TestPlan& plan) {
  const double cells = static_cast<double>(plan.cell_count());
  ProbabilityVector p;
  p.reserve(2 * plan.cell_count());
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const CellState s = cell_state(params, plan.stress(i), plan.time(j));
      p.push_back(s.cdf / cells);
      p.push_back(s.survival / cells);
    }
  }
  return p;
}

ProbabilityVector observed_probs(const FailureTable& table) {
  const TestPlan& plan = table.plan();
  const double cells = static_cast<double>(plan.cell_count());
  ProbabilityVector p;
  p.reserve(2 * plan.cell_count());
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const double k = static_cast<double>(plan.devices(i, j));
      const double n = static_cast<double>(table.failures(i, j));
      p.push_back(n / (cells * k));
      p.push_back((k - n) / (cells * k));
    }
  }
  return p;
}

}  // namespace oneshot
