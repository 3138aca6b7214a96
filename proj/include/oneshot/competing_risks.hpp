#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "oneshot/estimator.hpp"
#include "oneshot/model.hpp"

namespace oneshot {

enum class Cause { Natural = 1, Tumour = 2 };

/// Per-cell outcome triples (sacrificed r=0, natural death r=1, tumour death
/// r=2); cell sizes are the triple sums.
class MultiOutcomeTable {
 public:
  using Triple = std::array<std::int64_t, 3>;

  MultiOutcomeTable(std::vector<double> stresses, std::vector<double> times,
                    std::vector<Triple> counts);

  const TestPlan& plan() const noexcept { return plan_; }
  const Triple& counts(std::size_t i, std::size_t j) const {
    return counts_.at(i * plan_.time_count() + j);
  }
  std::span<const Triple> counts() const noexcept { return counts_; }

 private:
  static TestPlan make_plan(std::vector<double> stresses,
                            std::vector<double> times,
                            const std::vector<Triple>& counts);

  TestPlan plan_;
  std::vector<Triple> counts_;
};

struct CauseFit {
  Cause cause;
  FitResult fit;
  /// 1 / hazard at each stress level of the plan, in plan order.
  std::vector<double> mean_lifetimes;
};

FailureTable cause_table(const MultiOutcomeTable& data, Cause cause);

CauseFit fit_cause(const MultiOutcomeTable& data, Cause cause,
                   TuningParam beta, const SolverConfig& config = {});

/// Mean of the minimum of independent exponential causes: 1 / sum hazards.
double combined_mean_lifetime(std::span<const CauseFit> fits, double w);

}  // namespace oneshot
