#include "oneshot/competing_risks.hpp"

#include "oneshot/error.hpp"

namespace oneshot {

TestPlan MultiOutcomeTable::make_plan(std::vector<double> stresses,
                                      std::vector<double> times,
                                      const std::vector<Triple>& counts) {
  std::vector<std::int64_t> devices;
  devices.reserve(counts.size());
  for (const Triple& c : counts) {
    if (c[0] < 0 || c[1] < 0 || c[2] < 0) {
      throw Error(ErrorCode::InvalidArgument, "outcome counts must be >= 0");
    }
    devices.push_back(c[0] + c[1] + c[2]);
  }
  return TestPlan(std::move(stresses), std::move(times), std::move(devices));
}

MultiOutcomeTable::MultiOutcomeTable(std::vector<double> stresses,
                                     std::vector<double> times,
                                     std::vector<Triple> counts)
    : plan_(make_plan(std::move(stresses), std::move(times), counts)),
      counts_(std::move(counts)) {}

FailureTable cause_table(const MultiOutcomeTable& data, Cause cause) {
  const std::size_t r = static_cast<std::size_t>(cause);
  std::vector<std::int64_t> n;
  n.reserve(data.counts().size());
  for (const auto& c : data.counts()) n.push_back(c[r]);
  return FailureTable(data.plan(), std::move(n));
}

CauseFit fit_cause(const MultiOutcomeTable& data, Cause cause,
                   TuningParam beta, const SolverConfig& config) {
  CauseFit out{cause, fit(cause_table(data, cause), beta, config), {}};
  for (double w : data.plan().stresses()) {
    out.mean_lifetimes.push_back(mean_lifetime(out.fit.params, w));
  }
  return out;
}

double combined_mean_lifetime(std::span<const CauseFit> fits, double w) {
  if (fits.empty()) {
    throw Error(ErrorCode::InvalidArgument, "need at least one cause fit");
  }
  double total = 0.0;
  for (const CauseFit& f : fits) total += hazard(f.fit.params, w);
  return 1.0 / total;
}

}  // namespace oneshot
