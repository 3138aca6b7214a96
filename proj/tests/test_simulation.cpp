#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oneshot/error.hpp"
#include "oneshot/io.hpp"
#include "oneshot/simulation.hpp"

using namespace oneshot;

namespace {

SimulationSpec base_spec(std::int64_t k, std::size_t reps) {
  SimulationSpec spec{fixtures::table1_plan(k), ModelParams(0.004, 0.05)};
  spec.betas = {TuningParam(0.0), TuningParam(0.6)};
  spec.replications = reps;
  spec.seed = 12345;
  return spec;
}

}  // namespace

TEST_CASE("replication seeds are deterministic and distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) {
    CHECK(replication_seed(1, r) == replication_seed(1, r));
    seen.insert(replication_seed(1, r));
    seen.insert(replication_seed(2, r));
  }
  CHECK(seen.size() == 2000);
}

TEST_CASE("spec validation") {
  SimulationSpec spec = base_spec(20, 10);
  CHECK_NOTHROW(spec.validate());
  spec.replications = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = base_spec(20, 10);
  spec.betas.clear();
  CHECK_THROWS_AS(spec.validate(), Error);

  spec = base_spec(20, 10);
  spec.contamination = {0, 0, ContaminationMode::Alpha0Shift, 0.005};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.contamination.value = 0.0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.contamination.value = 0.001;
  CHECK_NOTHROW(spec.validate());
  spec.contamination = {3, 0, ContaminationMode::Alpha0Shift, 0.001};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.contamination = {0, 0, ContaminationMode::Alpha1Shift, 0.06};
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.contamination.value = 0.01;
  CHECK_NOTHROW(spec.validate());
  // Level studies need a hypothesis.
  CHECK_THROWS_AS(level_power_study(base_spec(20, 10)), Error);
}

TEST_CASE("generated tables") {
  const SimulationSpec spec = base_spec(20, 1);
  CHECK(generate_table(spec, 7) == generate_table(spec, 7));
  CHECK_FALSE(generate_table(spec, 7) == generate_table(spec, 8));

  SimulationSpec dead = spec;
  dead.true_params = ModelParams(1e-300, 0.0);
  const FailureTable none = generate_table(dead, 0);
  for (std::int64_t n : none.failures()) CHECK(n == 0);

  // Shifting alpha0 to itself reproduces the clean stream exactly.
  SimulationSpec same = spec;
  same.contamination = {0, 0, ContaminationMode::Alpha0Shift, 0.004};
  for (std::uint64_t r = 0; r < 50; ++r) {
    CHECK(generate_table(same, r) == generate_table(spec, r));
  }

  SimulationSpec outlier = spec;
  outlier.contamination = {0, 0, ContaminationMode::Alpha0Shift, 0.0008};
  double clean = 0.0, shifted = 0.0;
  for (std::uint64_t r = 0; r < 2000; ++r) {
    clean += static_cast<double>(generate_table(spec, r).failures(0, 0));
    shifted += static_cast<double>(generate_table(outlier, r).failures(0, 0));
  }
  CHECK(shifted < 0.5 * clean);
}

TEST_CASE("binomial cell frequency matches the model") {
  SimulationSpec spec = base_spec(20, 1);
  spec.true_params = ModelParams(0.005, 0.05);
  const double F = cdf(spec.true_params, 35, 10);
  const int reps = 100000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    sum += static_cast<double>(generate_table(spec, r).failures(0, 0));
  }
  const double mean = sum / (20.0 * reps);
  const double sigma = std::sqrt(F * (1 - F) / (20.0 * reps));
  CHECK(std::fabs(mean - F) < 3 * sigma);
}

TEST_CASE("reports do not depend on the number of threads") {
  SimulationSpec spec = base_spec(20, 60);
  spec.contamination = {0, 0, ContaminationMode::Alpha0Shift, 0.002};
  spec.hypothesis = HypothesisSpec{LinearHypothesis(0, 1, 0.05), 0.05};
  std::string first;
  for (unsigned threads : {1u, 4u, 8u}) {
    spec.threads = threads;
    const std::string dump = io::to_json(level_power_study(spec)).dump();
    if (first.empty()) first = dump;
    CHECK(dump == first);
  }
}

TEST_CASE("RMSE study: efficiency without outliers, few failed fits") {
  SimulationSpec spec = base_spec(100, 1000);
  spec.betas = {TuningParam(0.0), TuningParam(1.0)};
  const SimulationReport clean = rmse_study(spec);
  REQUIRE(clean.rows.size() == 2);
  CHECK(clean.rows[0].rmse_combined <= clean.rows[1].rmse_combined);
  CHECK(clean.rows[0].rmse_alpha0 <= clean.rows[1].rmse_alpha0);
  CHECK_FALSE(clean.rows[0].rejection_rate.has_value());

  SimulationSpec small = base_spec(20, 1000);
  small.contamination = {0, 0, ContaminationMode::Alpha0Shift, 0.0008};
  for (const BetaSummary& row : rmse_study(small).rows) {
    CHECK(row.successes + row.failed_fits == 1000);
    CHECK(static_cast<double>(row.failed_fits) < 0.01 * 1000);
  }
}

TEST_CASE("beta = 0 RMSE grows with contamination strength") {
  SimulationSpec spec = base_spec(20, 1000);
  spec.betas = {TuningParam(0.0)};
  spec.contamination = {0, 0, ContaminationMode::Alpha0Shift, 0.004};
  const auto curve = sweep(spec, SweepAxis::ContaminationStrength,
                           {0.0, 0.2, 0.4, 0.6, 0.8});
  REQUIRE(curve.size() == 5);
  for (std::size_t k = 1; k < curve.size(); ++k) {
    // Combined RMSE of the vector; the alpha0 component alone shrinks because
    // the outlier drags the skewed alpha0 estimates toward zero.
    CHECK(curve[k].summary.rmse_combined >= curve[k - 1].summary.rmse_combined);
    CHECK(curve[k].summary.rmse_alpha1 >= curve[k - 1].summary.rmse_alpha1);
  }
}

TEST_CASE("power grows with the number of devices") {
  SimulationSpec spec = base_spec(10, 400);
  spec.true_params = ModelParams(0.004, 0.02);
  spec.hypothesis = HypothesisSpec{LinearHypothesis(0, 1, 0.05), 0.05};
  const auto curve = sweep(spec, SweepAxis::Devices, {10, 40, 150});
  REQUIRE(curve.size() == 6);
  for (std::size_t b = 0; b < 2; ++b) {
    CHECK(*curve[b].summary.rejection_rate < *curve[2 + b].summary.rejection_rate);
    CHECK(*curve[2 + b].summary.rejection_rate <
          *curve[4 + b].summary.rejection_rate);
  }
  CHECK(*curve[4].summary.rejection_rate > 0.9);
  CHECK_THROWS_AS(sweep(spec, SweepAxis::Devices, {2.5}), Error);
  CHECK_THROWS_AS(sweep(spec, SweepAxis::ContaminationStrength, {0.5}), Error);
}

TEST_CASE("curve CSV layout") {
  SimulationSpec spec = base_spec(20, 5);
  const auto points = sweep(spec, SweepAxis::None, {});
  const std::string csv = curve_csv(points);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "x,beta,replications,successes,failed_fits,rmse_alpha0,rmse_alpha1,"
        "rmse_combined,rejection_rate");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
  }
  CHECK(rows == 2);
}
