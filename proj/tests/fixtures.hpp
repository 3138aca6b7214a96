#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "oneshot/model.hpp"

namespace fixtures {

inline oneshot::TestPlan table1_plan(std::int64_t k = 10) {
  return oneshot::TestPlan::balanced({35, 45, 55}, {10, 20, 30}, k);
}

// Temperature accelerated test with three temperatures and three
// inspection times, ten devices per cell.
inline oneshot::FailureTable table1() {
  return oneshot::FailureTable(table1_plan(), {3, 3, 7, 1, 5, 7, 6, 7, 9});
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

// Random plan: 1-4 stresses in [0, 60], 1-4 times in (0, 40], cells of
// 1-60 devices, optionally balanced.
inline oneshot::TestPlan random_plan(std::mt19937_64& rng,
                                     bool balanced = false) {
  std::uniform_int_distribution<int> size(1, 4);
  std::uniform_real_distribution<double> stress(0.0, 60.0);
  std::uniform_real_distribution<double> time(0.5, 40.0);
  std::uniform_int_distribution<std::int64_t> devices(1, 60);
  const int ni = size(rng), nj = size(rng);
  std::vector<double> w, t;
  while (static_cast<int>(w.size()) < ni) {
    const double x = std::round(stress(rng) * 10) / 10;
    if (std::find(w.begin(), w.end(), x) == w.end()) w.push_back(x);
  }
  for (int j = 0; j < nj; ++j) t.push_back(std::round(time(rng) * 10) / 10);
  std::vector<std::int64_t> k(ni * nj);
  const std::int64_t common = devices(rng);
  for (auto& c : k) c = balanced ? common : devices(rng);
  return oneshot::TestPlan(w, t, k);
}

// Parameters giving failure probabilities away from 0 and 1 on plans from
// random_plan.
inline oneshot::ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a0(std::log(1e-3), std::log(2e-2));
  std::uniform_real_distribution<double> a1(-0.03, 0.05);
  return oneshot::ModelParams(std::exp(a0(rng)), a1(rng));
}

// Random counts with every cell's fraction drawn near the model value.
inline oneshot::FailureTable random_table(std::mt19937_64& rng,
                                          const oneshot::TestPlan& plan,
                                          const oneshot::ModelParams& truth) {
  std::vector<std::int64_t> n;
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      std::binomial_distribution<std::int64_t> draw(
          plan.devices(i, j), oneshot::cdf(truth, plan.stress(i), plan.time(j)));
      n.push_back(draw(rng));
    }
  }
  return oneshot::FailureTable(plan, n);
}

}  // namespace fixtures
