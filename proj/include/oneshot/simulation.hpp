#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oneshot/estimator.hpp"
#include "oneshot/inference.hpp"
#include "oneshot/model.hpp"

namespace oneshot {

enum class ContaminationMode { None, Alpha0Shift, Alpha1Shift };

/// One outlying cell generated under shifted parameters.
struct ContaminationScheme {
  std::size_t stress_index = 0;
  std::size_t time_index = 0;
  ContaminationMode mode = ContaminationMode::None;
  double value = 0.0;  // the shifted alpha0 or alpha1

  /// Parameters used to generate the outlying cell.
  ModelParams cell_params(const ModelParams& truth) const;
  void validate(const ModelParams& truth, const TestPlan& plan) const;
};

struct HypothesisSpec {
  LinearHypothesis hypothesis;
  double level = 0.05;
};

struct SimulationSpec {
  TestPlan plan;
  ModelParams true_params;
  ContaminationScheme contamination;
  std::vector<TuningParam> betas;
  std::size_t replications = 2000;
  std::uint64_t seed = 0;
  std::optional<HypothesisSpec> hypothesis;
  SolverConfig solver;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

struct BetaSummary {
  double beta = 0.0;
  std::size_t successes = 0;
  std::size_t failed_fits = 0;
  double rmse_alpha0 = 0.0;
  double rmse_alpha1 = 0.0;
  double rmse_combined = 0.0;
  /// Proportion of |Z| > z_{level/2}; present for level/power studies.
  std::optional<double> rejection_rate;
};

struct SimulationReport {
  std::vector<BetaSummary> rows;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  SimulationSpec spec;
};

/// Counter-style stream key: SplitMix64 mixing of (seed, replication).
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication);

FailureTable generate_table(const SimulationSpec& spec,
                            std::uint64_t replication);

SimulationReport rmse_study(const SimulationSpec& spec);
SimulationReport level_power_study(const SimulationSpec& spec);

/// One point of a plot-ready curve.
struct CurvePoint {
  double x = 0.0;
  BetaSummary summary;
};

enum class SweepAxis { None, ContaminationStrength, Devices };

/// Re-runs the study for each x: contamination strength 1 - shifted/true
/// (for the scheme's mode) or the balanced per-cell device count.
std::vector<CurvePoint> sweep(const SimulationSpec& spec, SweepAxis axis,
                              const std::vector<double>& values);

/// CSV with header x,beta,replications,successes,failed_fits,rmse_alpha0,
/// rmse_alpha1,rmse_combined,rejection_rate.
std::string curve_csv(const std::vector<CurvePoint>& points);

}  // namespace oneshot
