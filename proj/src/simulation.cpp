#include "oneshot/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <string>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "oneshot/error.hpp"
#include "oneshot/numeric.hpp"

namespace oneshot {

ModelParams ContaminationScheme::cell_params(const ModelParams& truth) const {
  switch (mode) {
    case ContaminationMode::None: return truth;
    case ContaminationMode::Alpha0Shift: return {value, truth.alpha1()};
    case ContaminationMode::Alpha1Shift: return {truth.alpha0(), value};
  }
  return truth;
}

void ContaminationScheme::validate(const ModelParams& truth,
                                   const TestPlan& plan) const {
  if (mode == ContaminationMode::None) return;
  if (stress_index >= plan.stress_count() || time_index >= plan.time_count()) {
    throw Error(ErrorCode::InvalidArgument,
                "contaminated cell lies outside the plan");
  }
  if (mode == ContaminationMode::Alpha0Shift &&
      !(value > 0.0 && value <= truth.alpha0())) {
    throw Error(ErrorCode::InvalidArgument,
                "alpha0 contamination needs 0 < value <= alpha0");
  }
  if (mode == ContaminationMode::Alpha1Shift &&
      !(std::isfinite(value) && value <= truth.alpha1())) {
    throw Error(ErrorCode::InvalidArgument,
                "alpha1 contamination needs value <= alpha1");
  }
}

void SimulationSpec::validate() const {
  if (replications < 1) {
    throw Error(ErrorCode::InvalidArgument, "replications must be >= 1");
  }
  if (betas.empty()) {
    throw Error(ErrorCode::InvalidArgument, "need at least one beta");
  }
  contamination.validate(true_params, plan);
  solver.validate();
  if (hypothesis) critical_value(hypothesis->level);
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(seed) ^ replication);
}

FailureTable generate_table(const SimulationSpec& spec,
                            std::uint64_t replication) {
  const TestPlan& plan = spec.plan;
  std::mt19937_64 engine(replication_seed(spec.seed, replication));
  const ModelParams outlier = spec.contamination.cell_params(spec.true_params);
  std::vector<std::int64_t> counts;
  counts.reserve(plan.cell_count());
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      const bool contaminated =
          spec.contamination.mode != ContaminationMode::None &&
          i == spec.contamination.stress_index &&
          j == spec.contamination.time_index;
      const double f = cdf(contaminated ? outlier : spec.true_params,
                           plan.stress(i), plan.time(j));
      std::int64_t n = 0;
      for (std::int64_t k = 0; k < plan.devices(i, j); ++k) {
        const double u = static_cast<double>(engine() >> 11) * 0x1p-53;
        n += u < f ? 1 : 0;
      }
      counts.push_back(n);
    }
  }
  return FailureTable(plan, std::move(counts));
}

namespace {

struct ReplicationOutcome {
  bool ok = false;
  double err0 = 0.0;
  double err1 = 0.0;
  bool reject = false;
};

template <typename Work>
void parallel_for(std::size_t count, unsigned threads, Work work) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        work(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

SimulationReport run_study(const SimulationSpec& spec, bool with_test) {
  spec.validate();
  const std::size_t nb = spec.betas.size();
  const std::size_t reps = spec.replications;
  std::vector<ReplicationOutcome> outcomes(reps * nb);
  const double crit =
      with_test ? critical_value(spec.hypothesis->level) : 0.0;

  parallel_for(reps, spec.threads, [&](std::size_t r) {
    const FailureTable table = generate_table(spec, r);
    for (std::size_t b = 0; b < nb; ++b) {
      ReplicationOutcome& o = outcomes[r * nb + b];
      try {
        const FitResult f = fit(table, spec.betas[b], spec.solver);
        if (!f.converged) continue;
        o.err0 = f.params.alpha0() - spec.true_params.alpha0();
        o.err1 = f.params.alpha1() - spec.true_params.alpha1();
        if (with_test) {
          const ZTestResult z =
              z_statistic(f, spec.plan, spec.hypothesis->hypothesis);
          o.reject = std::fabs(z.statistic) > crit;
        }
        o.ok = true;
      } catch (const Error&) {
        o.ok = false;
      }
    }
  });

  SimulationReport report{{}, reps, spec.seed, spec};
  for (std::size_t b = 0; b < nb; ++b) {
    std::vector<double> sq0, sq1, sq, rej;
    for (std::size_t r = 0; r < reps; ++r) {
      const ReplicationOutcome& o = outcomes[r * nb + b];
      if (!o.ok) continue;
      sq0.push_back(o.err0 * o.err0);
      sq1.push_back(o.err1 * o.err1);
      sq.push_back(o.err0 * o.err0 + o.err1 * o.err1);
      rej.push_back(o.reject ? 1.0 : 0.0);
    }
    BetaSummary row;
    row.beta = spec.betas[b].value();
    row.successes = sq0.size();
    row.failed_fits = reps - row.successes;
    const double n = static_cast<double>(row.successes);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.rmse_alpha0 = n > 0 ? std::sqrt(pairwise_sum(sq0) / n) : nan;
    row.rmse_alpha1 = n > 0 ? std::sqrt(pairwise_sum(sq1) / n) : nan;
    row.rmse_combined = n > 0 ? std::sqrt(pairwise_sum(sq) / n) : nan;
    if (with_test) row.rejection_rate = n > 0 ? pairwise_sum(rej) / n : nan;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace

SimulationReport rmse_study(const SimulationSpec& spec) {
  return run_study(spec, false);
}

SimulationReport level_power_study(const SimulationSpec& spec) {
  if (!spec.hypothesis) {
    throw Error(ErrorCode::InvalidArgument,
                "level/power study needs a hypothesis");
  }
  return run_study(spec, true);
}

std::vector<CurvePoint> sweep(const SimulationSpec& spec, SweepAxis axis,
                              const std::vector<double>& values) {
  std::vector<CurvePoint> points;
  auto run = [&](const SimulationSpec& s, double x) {
    const SimulationReport rep =
        s.hypothesis ? level_power_study(s) : rmse_study(s);
    for (const BetaSummary& row : rep.rows) points.push_back({x, row});
  };
  if (axis == SweepAxis::None) {
    run(spec, 0.0);
    return points;
  }
  for (double x : values) {
    SimulationSpec s = spec;
    if (axis == SweepAxis::ContaminationStrength) {
      switch (spec.contamination.mode) {
        case ContaminationMode::Alpha0Shift:
          s.contamination.value = (1.0 - x) * spec.true_params.alpha0();
          break;
        case ContaminationMode::Alpha1Shift:
          s.contamination.value = (1.0 - x) * spec.true_params.alpha1();
          break;
        case ContaminationMode::None:
          throw Error(ErrorCode::InvalidArgument,
                      "strength sweep needs a contamination mode");
      }
    } else {
      if (!(x >= 1.0) || x != std::floor(x)) {
        throw Error(ErrorCode::InvalidArgument,
                    "device sweep values must be positive integers");
      }
      s.plan = spec.plan.with_devices(static_cast<std::int64_t>(x));
    }
    run(s, x);
  }
  return points;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  // Shortest representation that round-trips.
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("nan");
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
  };
  std::string out =
      "x,beta,replications,successes,failed_fits,rmse_alpha0,rmse_alpha1,"
      "rmse_combined,rejection_rate\n";
  for (const CurvePoint& p : points) {
    const BetaSummary& s = p.summary;
    out += num(p.x) + ',' + num(s.beta) + ',' +
           std::to_string(s.successes + s.failed_fits) + ',' +
           std::to_string(s.successes) + ',' + std::to_string(s.failed_fits) +
           ',' + num(s.rmse_alpha0) + ',' + num(s.rmse_alpha1) + ',' +
           num(s.rmse_combined) + ',';
    if (s.rejection_rate) out += num(*s.rejection_rate);
    out += '\n';
  }
  return out;
}

}  // namespace oneshot
