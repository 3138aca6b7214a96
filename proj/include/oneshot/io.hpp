#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "oneshot/competing_risks.hpp"
#include "oneshot/estimator.hpp"
#include "oneshot/model.hpp"
#include "oneshot/simulation.hpp"

namespace oneshot::io {

/// Header `w,t,K,n`, one row per (w, t) cell.
FailureTable read_failure_csv(const std::filesystem::path& path);
FailureTable parse_failure_csv(std::istream& in);

/// Header `w,t,n_sac,n_nat,n_tum`.
MultiOutcomeTable read_multioutcome_csv(const std::filesystem::path& path);
MultiOutcomeTable parse_multioutcome_csv(std::istream& in);

/// Comma-separated values, each either a number or a `start:step:stop`
/// range (inclusive, rounded to 12 decimals), e.g. "0:0.1:1,2,3,4".
std::vector<double> parse_number_list(std::string_view text);
std::vector<TuningParam> parse_beta_list(std::string_view text);

nlohmann::json to_json(const TestPlan& plan);
nlohmann::json to_json(const FailureTable& table);
nlohmann::json to_json(const Matrix2& m);
nlohmann::json to_json(const SandwichCovariance& cov);
nlohmann::json to_json(const FitResult& fit);
nlohmann::json to_json(const BetaSummary& row);
nlohmann::json to_json(const SimulationReport& report);
/// Curve points as objects: x plus the BetaSummary fields.
nlohmann::json to_json(const std::vector<CurvePoint>& points);
nlohmann::json to_json(const SimulationSpec& spec);

FitResult fit_from_json(const nlohmann::json& j);

/// Simulation spec document; see docs/formats.md.
struct SimulationRequest {
  SimulationSpec spec;
  enum class Study { Rmse, LevelPower } study = Study::Rmse;
  SweepAxis axis = SweepAxis::None;
  std::vector<double> sweep_values;
  bool seed_given = false;
};

SimulationRequest simulation_request_from_json(const nlohmann::json& j);

}  // namespace oneshot::io
