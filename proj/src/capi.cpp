#include "oneshot/oneshot.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "oneshot/competing_risks.hpp"
#include "oneshot/error.hpp"
#include "oneshot/estimator.hpp"
#include "oneshot/inference.hpp"
#include "oneshot/io.hpp"
#include "oneshot/model.hpp"
#include "oneshot/simulation.hpp"

struct osd_plan {
  oneshot::TestPlan plan;
};
struct osd_table {
  oneshot::FailureTable table;
};
struct osd_multi {
  oneshot::MultiOutcomeTable data;
};
struct osd_fit {
  oneshot::FitResult fit;
};
struct osd_sim {
  oneshot::io::SimulationRequest request;
};

namespace {

thread_local std::string last_error;

osd_status to_status(oneshot::ErrorCode code) {
  using oneshot::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return OSD_INVALID_ARGUMENT;
    case ErrorCode::ParseError: return OSD_PARSE_ERROR;
    case ErrorCode::NoInteriorData: return OSD_NO_INTERIOR_DATA;
    case ErrorCode::SingularInformation: return OSD_SINGULAR_INFORMATION;
    case ErrorCode::DegenerateVariance: return OSD_DEGENERATE_VARIANCE;
    case ErrorCode::InfeasibleDesign: return OSD_INFEASIBLE_DESIGN;
    case ErrorCode::Unsupported: return OSD_UNSUPPORTED;
  }
  return OSD_INTERNAL;
}

template <typename F>
osd_status guarded(F&& body) noexcept {
  try {
    body();
    last_error.clear();
    return OSD_OK;
  } catch (const oneshot::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return OSD_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return OSD_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return OSD_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw oneshot::Error(oneshot::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

oneshot::SolverConfig solver_config(const osd_solver_config* c) {
  oneshot::SolverConfig config;
  if (c) {
    config.max_iters = c->max_iters;
    config.grad_tol = c->grad_tol;
    config.step_tol = c->step_tol;
    config.grid_init = c->grid_init != 0;
  }
  config.validate();
  return config;
}

oneshot::Cause to_cause(int cause) {
  require(cause == 1 || cause == 2, "cause must be 1 or 2");
  return static_cast<oneshot::Cause>(cause);
}

}  // namespace

extern "C" {

const char* osd_status_name(osd_status status) {
  switch (status) {
    case OSD_OK: return "OK";
    case OSD_INVALID_ARGUMENT: return "InvalidArgument";
    case OSD_PARSE_ERROR: return "ParseError";
    case OSD_NO_INTERIOR_DATA: return "NoInteriorData";
    case OSD_SINGULAR_INFORMATION: return "SingularInformation";
    case OSD_DEGENERATE_VARIANCE: return "DegenerateVariance";
    case OSD_INFEASIBLE_DESIGN: return "InfeasibleDesign";
    case OSD_UNSUPPORTED: return "Unsupported";
    case OSD_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* osd_last_error(void) { return last_error.c_str(); }

void osd_string_free(char* s) { std::free(s); }

const char* osd_version(void) { return "0.1.0"; }

void osd_solver_config_default(osd_solver_config* config) {
  if (!config) return;
  const oneshot::SolverConfig d;
  *config = {d.max_iters, d.grad_tol, d.step_tol, d.grid_init ? 1 : 0};
}

osd_status osd_parse_number_list(const char* text, double** values,
                                 size_t* count) {
  return guarded([&] {
    require(text && values && count, "null argument");
    *values = nullptr;
    *count = 0;
    const std::vector<double> list = oneshot::io::parse_number_list(text);
    if (list.empty()) return;
    auto* out = static_cast<double*>(std::malloc(list.size() * sizeof(double)));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, list.data(), list.size() * sizeof(double));
    *values = out;
    *count = list.size();
  });
}

void osd_values_free(double* values) { std::free(values); }

osd_status osd_plan_create(size_t stress_count, const double* stresses,
                           size_t time_count, const double* times,
                           const int64_t* devices, osd_plan** out) {
  return guarded([&] {
    require(out && stresses && times && devices, "null argument");
    *out = nullptr;
    oneshot::TestPlan plan(
        std::vector<double>(stresses, stresses + stress_count),
        std::vector<double>(times, times + time_count),
        std::vector<std::int64_t>(devices,
                                  devices + stress_count * time_count));
    *out = new osd_plan{std::move(plan)};
  });
}

void osd_plan_free(osd_plan* plan) { delete plan; }

size_t osd_plan_stress_count(const osd_plan* plan) {
  return plan ? plan->plan.stress_count() : 0;
}

size_t osd_plan_time_count(const osd_plan* plan) {
  return plan ? plan->plan.time_count() : 0;
}

osd_status osd_table_read_csv(const char* path, osd_table** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    *out = new osd_table{oneshot::io::read_failure_csv(path)};
  });
}

osd_status osd_table_create(const osd_plan* plan, const int64_t* failures,
                            osd_table** out) {
  return guarded([&] {
    require(plan && failures && out, "null argument");
    *out = nullptr;
    const std::size_t cells = plan->plan.cell_count();
    *out = new osd_table{oneshot::FailureTable(
        plan->plan, std::vector<std::int64_t>(failures, failures + cells))};
  });
}

void osd_table_free(osd_table* table) { delete table; }

osd_status osd_table_plan(const osd_table* table, osd_plan** out) {
  return guarded([&] {
    require(table && out, "null argument");
    *out = new osd_plan{table->table.plan()};
  });
}

osd_status osd_table_to_json(const osd_table* table, char** out) {
  return guarded([&] {
    require(table && out, "null argument");
    *out = dup_string(oneshot::io::to_json(table->table).dump());
  });
}

osd_status osd_reliability(double alpha0, double alpha1, double w, double t,
                           double* out) {
  return guarded([&] {
    require(out, "null argument");
    require(t >= 0.0, "mission time must be >= 0");
    *out = oneshot::reliability(oneshot::ModelParams(alpha0, alpha1), w, t);
  });
}

osd_status osd_mean_lifetime(double alpha0, double alpha1, double w,
                             double* out) {
  return guarded([&] {
    require(out, "null argument");
    *out = oneshot::mean_lifetime(oneshot::ModelParams(alpha0, alpha1), w);
  });
}

osd_status osd_fit_table(const osd_table* table, double beta,
                         const osd_solver_config* config, osd_fit** out) {
  return guarded([&] {
    require(table && out, "null argument");
    *out = nullptr;
    *out = new osd_fit{oneshot::fit(table->table, oneshot::TuningParam(beta),
                                    solver_config(config))};
  });
}

osd_status osd_fit_path(const osd_table* table, const double* betas,
                        size_t count, const osd_solver_config* config,
                        osd_fit** out) {
  return guarded([&] {
    require(table && betas && out, "null argument");
    std::vector<oneshot::TuningParam> grid;
    for (size_t k = 0; k < count; ++k) grid.emplace_back(betas[k]);
    auto fits = oneshot::fit_path(table->table, grid, solver_config(config));
    for (size_t k = 0; k < count; ++k) out[k] = nullptr;
    for (size_t k = 0; k < count; ++k) {
      out[k] = new osd_fit{std::move(fits[k])};
    }
  });
}

void osd_fit_free(osd_fit* fit) { delete fit; }

osd_status osd_fit_params(const osd_fit* fit, double* alpha0, double* alpha1) {
  return guarded([&] {
    require(fit && alpha0 && alpha1, "null argument");
    *alpha0 = fit->fit.params.alpha0();
    *alpha1 = fit->fit.params.alpha1();
  });
}

int osd_fit_converged(const osd_fit* fit) {
  return fit && fit->fit.converged ? 1 : 0;
}

osd_status osd_fit_covariance(const osd_fit* fit, double sigma[4]) {
  return guarded([&] {
    require(fit && sigma, "null argument");
    if (!fit->fit.covariance) {
      throw oneshot::Error(oneshot::ErrorCode::SingularInformation,
                           "no covariance available for this fit");
    }
    for (int k = 0; k < 4; ++k) sigma[k] = fit->fit.covariance->sigma.v[k];
  });
}

osd_status osd_fit_to_json(const osd_fit* fit, char** out) {
  return guarded([&] {
    require(fit && out, "null argument");
    *out = dup_string(oneshot::io::to_json(fit->fit).dump());
  });
}

osd_status osd_ztest(const osd_fit* fit, const osd_table* table, double m0,
                     double m1, double d, double level,
                     osd_ztest_result* out) {
  return guarded([&] {
    require(fit && table && out, "null argument");
    const oneshot::ZTestResult z = oneshot::z_statistic(
        fit->fit, table->table.plan(), oneshot::LinearHypothesis(m0, m1, d));
    *out = {z.statistic, z.p_value, z.variance,
            oneshot::critical_value(level), z.rejects(level) ? 1 : 0};
  });
}

osd_status osd_power(double alpha0, double alpha1, const osd_plan* plan,
                     double beta, double m0, double m1, double d,
                     int64_t devices, double level, int abs_effect,
                     double* out) {
  return guarded([&] {
    require(plan && out, "null argument");
    *out = oneshot::approximate_power(
        oneshot::ModelParams(alpha0, alpha1), plan->plan,
        oneshot::TuningParam(beta), oneshot::LinearHypothesis(m0, m1, d),
        devices, level, abs_effect != 0);
  });
}

osd_status osd_required_devices(double alpha0, double alpha1,
                                const osd_plan* plan, double beta, double m0,
                                double m1, double d, double target_power,
                                double level, int64_t* out) {
  return guarded([&] {
    require(plan && out, "null argument");
    *out = oneshot::required_devices(
        oneshot::ModelParams(alpha0, alpha1), plan->plan,
        oneshot::TuningParam(beta), oneshot::LinearHypothesis(m0, m1, d),
        target_power, level);
  });
}

osd_status osd_multi_read_csv(const char* path, osd_multi** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = nullptr;
    *out = new osd_multi{oneshot::io::read_multioutcome_csv(path)};
  });
}

void osd_multi_free(osd_multi* data) { delete data; }

osd_status osd_multi_cause_table(const osd_multi* data, int cause,
                                 osd_table** out) {
  return guarded([&] {
    require(data && out, "null argument");
    *out = new osd_table{oneshot::cause_table(data->data, to_cause(cause))};
  });
}

osd_status osd_competing_fit_json(const osd_multi* data, const double* betas,
                                  size_t count,
                                  const osd_solver_config* config,
                                  char** out) {
  return guarded([&] {
    require(data && betas && out, "null argument");
    const oneshot::SolverConfig cfg = solver_config(config);
    const oneshot::TestPlan& plan = data->data.plan();
    nlohmann::json rows = nlohmann::json::array();
    for (size_t k = 0; k < count; ++k) {
      const oneshot::TuningParam beta(betas[k]);
      std::vector<oneshot::CauseFit> fits;
      nlohmann::json causes = nlohmann::json::array();
      for (int c : {1, 2}) {
        fits.push_back(oneshot::fit_cause(data->data, to_cause(c), beta, cfg));
        nlohmann::json jc = oneshot::io::to_json(fits.back().fit);
        jc["cause"] = c;
        jc["mean_lifetimes"] = fits.back().mean_lifetimes;
        causes.push_back(jc);
      }
      std::vector<double> combined;
      for (double w : plan.stresses()) {
        combined.push_back(oneshot::combined_mean_lifetime(fits, w));
      }
      rows.push_back({{"beta", beta.value()},
                      {"causes", causes},
                      {"combined_mean_lifetimes", combined}});
    }
    nlohmann::json doc{
        {"stresses",
         std::vector<double>(plan.stresses().begin(), plan.stresses().end())},
        {"rows", rows}};
    *out = dup_string(doc.dump());
  });
}

osd_status osd_sim_parse(const char* json_text, osd_sim** out) {
  return guarded([&] {
    require(json_text && out, "null argument");
    *out = nullptr;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      throw oneshot::Error(oneshot::ErrorCode::ParseError,
                           std::string("simulation spec: ") + e.what());
    }
    auto request = oneshot::io::simulation_request_from_json(j);
    *out = new osd_sim{std::move(request)};
  });
}

void osd_sim_free(osd_sim* sim) { delete sim; }

int osd_sim_has_seed(const osd_sim* sim) {
  return sim && sim->request.seed_given ? 1 : 0;
}

void osd_sim_set_seed(osd_sim* sim, uint64_t seed) {
  if (!sim) return;
  sim->request.spec.seed = seed;
  sim->request.seed_given = true;
}

uint64_t osd_sim_seed(const osd_sim* sim) {
  return sim ? sim->request.spec.seed : 0;
}

void osd_sim_set_threads(osd_sim* sim, unsigned threads) {
  if (sim) sim->request.spec.threads = threads;
}

osd_status osd_sim_set_replications(osd_sim* sim, size_t replications) {
  return guarded([&] {
    require(sim, "null argument");
    require(replications > 0, "replications must be positive");
    sim->request.spec.replications = replications;
  });
}

osd_status osd_sim_run(const osd_sim* sim, char** report_json,
                       char** curve_csv) {
  return guarded([&] {
    require(sim && report_json, "null argument");
    *report_json = nullptr;
    if (curve_csv) *curve_csv = nullptr;
    const auto& req = sim->request;
    req.spec.validate();
    const auto points = oneshot::sweep(req.spec, req.axis, req.sweep_values);
    const char* axis = req.axis == oneshot::SweepAxis::None ? "none"
                       : req.axis == oneshot::SweepAxis::Devices
                           ? "devices"
                           : "strength";
    nlohmann::json doc{
        {"study", req.study == oneshot::io::SimulationRequest::Study::Rmse
                      ? "rmse"
                      : "level_power"},
        {"spec", oneshot::io::to_json(req.spec)},
        {"axis", axis},
        {"points", oneshot::io::to_json(points)}};
    const std::string csv = oneshot::curve_csv(points);
    char* report = dup_string(doc.dump());
    if (curve_csv) {
      try {
        *curve_csv = dup_string(csv);
      } catch (...) {
        std::free(report);
        throw;
      }
    }
    *report_json = report;
  });
}

}  // extern "C"
