#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oneshot/error.hpp"
#include "oneshot/io.hpp"

using namespace oneshot;

namespace {

const std::filesystem::path kData = ONESHOT_DATA_DIR;

std::string parse_error(const std::string& text) {
  std::istringstream in(text);
  try {
    io::parse_failure_csv(in);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

}  // namespace

TEST_CASE("bundled temperature data") {
  const FailureTable t = io::read_failure_csv(kData / "table1.csv");
  CHECK(t.plan().stress_count() == 3);
  CHECK(t.plan().time_count() == 3);
  CHECK(t.plan().is_balanced());
  CHECK(t.plan().devices(0, 0) == 10);
  CHECK(t.failures(0, 0) == 3);
  CHECK(t == fixtures::table1());
}

TEST_CASE("bundled multi-outcome data") {
  const MultiOutcomeTable ed = io::read_multioutcome_csv(kData / "ed01.csv");
  CHECK(ed.plan().cell_count() == 6);
  CHECK(ed.plan().stress(0) == 0.0);
  CHECK(ed.plan().time(0) == 12.0);
  CHECK(ed.counts(0, 0) == MultiOutcomeTable::Triple{115, 22, 8});
  CHECK(ed.counts(1, 2) == MultiOutcomeTable::Triple{510, 64, 51});
  CHECK(ed.plan().total_devices() == 3355);

  const MultiOutcomeTable bz = io::read_multioutcome_csv(kData / "benzidine.csv");
  CHECK(bz.plan().stress(0) == 1.0);
  CHECK(bz.plan().time(0) == 9.37);
  CHECK(bz.counts(0, 0) == MultiOutcomeTable::Triple{70, 2, 0});
  CHECK(bz.counts(1, 2) == MultiOutcomeTable::Triple{1, 1, 9});
}

TEST_CASE("CSV rows may come in any order") {
  std::istringstream in("w,t,K,n\n2,5,4,1\n1,5,3,0\n2,1,4,2\n1,1,3,3\n");
  const FailureTable t = io::parse_failure_csv(in);
  CHECK(t.plan().stress(0) == 1.0);
  CHECK(t.plan().time(0) == 1.0);
  CHECK(t.failures(0, 0) == 3);
  CHECK(t.failures(1, 1) == 1);

  std::istringstream one("w , t , K , n\r\n40,10,5,2\r\n\n");
  const FailureTable single = io::parse_failure_csv(one);
  CHECK(single.plan().cell_count() == 1);
}

TEST_CASE("CSV errors name the row and column") {
  CHECK(parse_error("w,t,K,n\n1,2,10,12\n").find("row 2") != std::string::npos);
  CHECK(parse_error("w,t,K,n\n1,2,10,3\n1,3,10,x\n").find("row 3, column 'n'") !=
        std::string::npos);
  CHECK(parse_error("w,t,K,n\n1,2,10,3\n1,2,10,3\n").find("duplicate") !=
        std::string::npos);
  CHECK(parse_error("w,t,K,n\n1,2,10,3\n2,3,10,3\n").find("missing") !=
        std::string::npos);
  CHECK(parse_error("w,t,K,n\n1,2,10,-1\n").find("negative") != std::string::npos);
  CHECK(parse_error("w,t,K\n1,2,10\n").find("header") != std::string::npos);
  CHECK(parse_error("").find("header") != std::string::npos);
  CHECK(parse_error("w,t,K,n\n").find("no data") != std::string::npos);
  CHECK(parse_error("w,t,K,n\n1,0,10,1\n").find("column 't'") != std::string::npos);
  CHECK(parse_error("w,t,K,n\n1,2,2.5,1\n").find("column 'K'") != std::string::npos);

  std::istringstream neg("w,t,n_sac,n_nat,n_tum\n0,1,5,-2,0\n");
  CHECK_THROWS_AS(io::parse_multioutcome_csv(neg), Error);
  CHECK_THROWS_AS(io::read_failure_csv(kData / "missing.csv"), Error);
}

TEST_CASE("number lists") {
  const auto grid = io::parse_number_list("0:0.1:1,2,3,4");
  REQUIRE(grid.size() == 14);
  CHECK(grid[3] == 0.3);
  CHECK(grid[10] == 1.0);
  CHECK(grid[13] == 4.0);
  CHECK(io::parse_number_list("0.5").size() == 1);
  CHECK_THROWS_AS(io::parse_number_list("1:0:2"), Error);
  CHECK_THROWS_AS(io::parse_number_list("2:0.1:1"), Error);
  CHECK_THROWS_AS(io::parse_number_list("1,,2"), Error);
  CHECK_THROWS_AS(io::parse_number_list("1:2"), Error);
  CHECK_THROWS_AS(io::parse_beta_list("0,-1"), Error);
}

TEST_CASE("fit results survive a JSON round trip") {
  const FitResult f = fit(fixtures::table1(), TuningParam(0.3));
  const nlohmann::json j = io::to_json(f);
  const FitResult back = io::fit_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.beta.value() == f.beta.value());
  CHECK(back.params == f.params);
  CHECK(back.objective == f.objective);
  CHECK(back.grad_norm == f.grad_norm);
  CHECK(back.iterations == f.iterations);
  CHECK(back.converged == f.converged);
  REQUIRE(back.covariance.has_value());
  CHECK(back.covariance->sigma == f.covariance->sigma);
  CHECK(back.covariance->j_bar == f.covariance->j_bar);
  CHECK(back.covariance->k_bar == f.covariance->k_bar);
  CHECK(back.diagnostics.starts == f.diagnostics.starts);
  CHECK(io::to_json(back).dump() == j.dump());
  CHECK_THROWS_AS(io::fit_from_json(nlohmann::json::parse("{\"beta\": 1}")),
                  Error);
}

TEST_CASE("simulation requests") {
  const auto j = nlohmann::json::parse(R"({
    "plan": {"stresses": [35, 45], "times": [10, 20], "devices": [[5, 6], [7, 8]]},
    "true_params": {"alpha0": 0.004, "alpha1": 0.05},
    "contamination": {"mode": "alpha1_shift", "cell": [1, 0], "value": 0.01},
    "betas": "0:0.5:1",
    "replications": 30,
    "hypothesis": {"m": [0, 1], "d": 0.05},
    "sweep": {"axis": "strength"}
  })");
  const io::SimulationRequest req = io::simulation_request_from_json(j);
  CHECK(req.study == io::SimulationRequest::Study::LevelPower);
  CHECK_FALSE(req.seed_given);
  CHECK(req.spec.plan.devices(1, 0) == 7);
  CHECK(req.spec.betas.size() == 3);
  CHECK(req.spec.contamination.mode == ContaminationMode::Alpha1Shift);
  CHECK(req.spec.contamination.stress_index == 1);
  CHECK(req.spec.hypothesis->level == 0.05);
  CHECK(req.axis == SweepAxis::ContaminationStrength);
  CHECK(req.sweep_values.size() == 10);

  auto bad = j;
  bad["study"] = "rmse";
  bad["contamination"]["mode"] = "sideways";
  CHECK_THROWS_AS(io::simulation_request_from_json(bad), Error);
  auto missing = j;
  missing.erase("true_params");
  CHECK_THROWS_AS(io::simulation_request_from_json(missing), Error);
  auto no_hyp = j;
  no_hyp.erase("hypothesis");
  no_hyp["study"] = "level_power";
  CHECK_THROWS_AS(io::simulation_request_from_json(no_hyp), Error);

  // Echo of the spec parses back to the same plan and parameters.
  const auto echo = io::to_json(req.spec);
  CHECK(echo["plan"]["devices"][1][1] == 8);
  CHECK(echo["contamination"]["mode"] == "alpha1_shift");
}
