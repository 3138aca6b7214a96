// Command-line front end. Talks to the library only through oneshot.h.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "oneshot/oneshot.h"

using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

struct Failure {
  osd_status status;
  std::string message;
};

void check(osd_status s) {
  if (s != OSD_OK) throw Failure{s, osd_last_error()};
}

[[noreturn]] void config_error(const std::string& message) {
  throw Failure{OSD_INVALID_ARGUMENT, message};
}

int exit_code(osd_status s) {
  return s == OSD_PARSE_ERROR || s == OSD_INVALID_ARGUMENT ? kExitConfig
                                                           : kExitCompute;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using TablePtr = std::unique_ptr<osd_table, Deleter<osd_table, osd_table_free>>;
using PlanPtr = std::unique_ptr<osd_plan, Deleter<osd_plan, osd_plan_free>>;
using FitPtr = std::unique_ptr<osd_fit, Deleter<osd_fit, osd_fit_free>>;
using MultiPtr = std::unique_ptr<osd_multi, Deleter<osd_multi, osd_multi_free>>;
using SimPtr = std::unique_ptr<osd_sim, Deleter<osd_sim, osd_sim_free>>;

std::string take(char* s) {
  std::string out(s ? s : "");
  osd_string_free(s);
  return out;
}

std::vector<double> number_list(const std::string& text) {
  double* values = nullptr;
  std::size_t count = 0;
  check(osd_parse_number_list(text.c_str(), &values, &count));
  std::vector<double> out(values, values + count);
  osd_values_free(values);
  return out;
}

TablePtr read_table(const std::string& path) {
  osd_table* t = nullptr;
  check(osd_table_read_csv(path.c_str(), &t));
  return TablePtr(t);
}

json fit_json(const osd_fit* fit) {
  char* s = nullptr;
  check(osd_fit_to_json(fit, &s));
  return json::parse(take(s));
}

// Options shared by several subcommands.
struct Options {
  std::string input;
  std::string output;
  double beta = 0.0;
  std::string betas;
  std::string mission_times;
  std::optional<double> w0;
  std::optional<double> alpha0, alpha1;
  std::string m = "0,1";
  double d = 0.0;
  double level = 0.05;
  std::string stresses, times;
  std::int64_t devices = 0;
  double target_power = 0.8;
  bool abs_effect = false;
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  unsigned threads = 0;
  std::string format = "json";
  std::string curve;
  int max_iters = 0;
};

struct Report {
  json config = json::object();
  json results = nullptr;
  json warnings = json::array();
  std::string raw;  // non-JSON output (simulate --format csv)
};

void collect_fit_warnings(const json& fit, Report& report) {
  std::ostringstream where;
  where << "beta=" << fit.at("beta").get<double>();
  if (!fit.at("converged").get<bool>()) {
    report.warnings.push_back(where.str() + ": solver did not converge");
  }
  const json& d = fit.at("diagnostics");
  if (d.at("multistart_disagreement").get<bool>()) {
    report.warnings.push_back(where.str() +
                              ": starting points reached different optima");
  }
  if (d.at("clamped").get<bool>()) {
    report.warnings.push_back(where.str() +
                              ": model probability clamped near 0");
  }
  if (fit.at("covariance").is_null()) {
    report.warnings.push_back(where.str() + ": covariance unavailable");
  }
}

osd_solver_config solver(const Options& o) {
  osd_solver_config c;
  osd_solver_config_default(&c);
  if (o.max_iters > 0) c.max_iters = o.max_iters;
  return c;
}

void add_predictions(json& fit, const std::vector<double>& times,
                     std::optional<double> w0) {
  if (!w0) return;
  const double a0 = fit.at("alpha0").get<double>();
  const double a1 = fit.at("alpha1").get<double>();
  json rel = json::array();
  for (double t : times) {
    double r = 0.0;
    check(osd_reliability(a0, a1, *w0, t, &r));
    rel.push_back({{"t", t}, {"value", r}});
  }
  double e = 0.0;
  check(osd_mean_lifetime(a0, a1, *w0, &e));
  fit["w0"] = *w0;
  fit["reliability"] = rel;
  fit["mean_lifetime"] = e;
}

std::vector<double> mission_times(const Options& o) {
  if (o.mission_times.empty()) return {};
  if (!o.w0) config_error("--mission-times needs --w0");
  return number_list(o.mission_times);
}

void run_fit(const Options& o, Report& r) {
  const auto times = mission_times(o);
  r.config["input"] = o.input;
  r.config["beta"] = o.beta;
  auto table = read_table(o.input);
  const osd_solver_config cfg = solver(o);
  osd_fit* raw = nullptr;
  check(osd_fit_table(table.get(), o.beta, &cfg, &raw));
  FitPtr fit(raw);
  json j = fit_json(fit.get());
  collect_fit_warnings(j, r);
  add_predictions(j, times, o.w0);
  r.results = j;
}

void run_fit_path(const Options& o, Report& r) {
  const auto times = mission_times(o);
  const auto betas = number_list(o.betas);
  r.config["input"] = o.input;
  r.config["betas"] = betas;
  auto table = read_table(o.input);
  const osd_solver_config cfg = solver(o);
  std::vector<osd_fit*> raw(betas.size(), nullptr);
  const osd_status s =
      osd_fit_path(table.get(), betas.data(), betas.size(), &cfg, raw.data());
  std::vector<FitPtr> fits;
  for (osd_fit* f : raw) fits.emplace_back(f);
  check(s);
  json rows = json::array();
  for (const auto& f : fits) {
    json j = fit_json(f.get());
    collect_fit_warnings(j, r);
    add_predictions(j, times, o.w0);
    rows.push_back(j);
  }
  r.results = rows;
}

void run_reliability(const Options& o, Report& r) {
  if (!o.w0) config_error("reliability needs --w0");
  const auto times = mission_times(o);
  double a0 = 0.0, a1 = 0.0;
  if (!o.input.empty()) {
    if (o.alpha0 || o.alpha1) {
      config_error("give either --input or --alpha0/--alpha1, not both");
    }
    r.config["input"] = o.input;
    r.config["beta"] = o.beta;
    auto table = read_table(o.input);
    const osd_solver_config cfg = solver(o);
    osd_fit* raw = nullptr;
    check(osd_fit_table(table.get(), o.beta, &cfg, &raw));
    FitPtr fit(raw);
    check(osd_fit_params(fit.get(), &a0, &a1));
    collect_fit_warnings(fit_json(fit.get()), r);
  } else {
    if (!o.alpha0 || !o.alpha1) {
      config_error("reliability needs --input or both --alpha0 and --alpha1");
    }
    a0 = *o.alpha0;
    a1 = *o.alpha1;
  }
  r.config["w0"] = *o.w0;
  r.config["mission_times"] = times;
  json j{{"alpha0", a0}, {"alpha1", a1}};
  add_predictions(j, times, o.w0);
  r.results = j;
}

std::pair<double, double> hypothesis_vector(const Options& o) {
  const auto m = number_list(o.m);
  if (m.size() != 2) config_error("--m needs two comma-separated values");
  return {m[0], m[1]};
}

void run_ztest(const Options& o, Report& r) {
  const auto [m0, m1] = hypothesis_vector(o);
  r.config["input"] = o.input;
  r.config["beta"] = o.beta;
  r.config["hypothesis"] = {{"m", {m0, m1}}, {"d", o.d}, {"level", o.level}};
  auto table = read_table(o.input);
  const osd_solver_config cfg = solver(o);
  osd_fit* raw = nullptr;
  check(osd_fit_table(table.get(), o.beta, &cfg, &raw));
  FitPtr fit(raw);
  json fj = fit_json(fit.get());
  collect_fit_warnings(fj, r);
  osd_ztest_result z{};
  check(osd_ztest(fit.get(), table.get(), m0, m1, o.d, o.level, &z));
  r.results = {{"fit", fj},
               {"statistic", z.statistic},
               {"p_value", z.p_value},
               {"variance", z.variance},
               {"critical_value", z.critical_value},
               {"reject", z.rejects != 0}};
}

PlanPtr design_plan(const Options& o, Report& r, std::int64_t devices) {
  osd_plan* plan = nullptr;
  if (!o.input.empty()) {
    auto table = read_table(o.input);
    check(osd_table_plan(table.get(), &plan));
    r.config["input"] = o.input;
    return PlanPtr(plan);
  }
  if (o.stresses.empty() || o.times.empty()) {
    config_error("give --input or both --stresses and --times");
  }
  const auto w = number_list(o.stresses);
  const auto t = number_list(o.times);
  std::vector<std::int64_t> k(w.size() * t.size(), devices);
  check(osd_plan_create(w.size(), w.data(), t.size(), t.data(), k.data(),
                        &plan));
  r.config["stresses"] = w;
  r.config["times"] = t;
  return PlanPtr(plan);
}

void require_alphas(const Options& o) {
  if (!o.alpha0 || !o.alpha1) {
    config_error("--alpha0 and --alpha1 (alternative parameters) are required");
  }
}

void run_power(const Options& o, Report& r) {
  require_alphas(o);
  if (o.devices < 1) config_error("--devices must be >= 1");
  const auto [m0, m1] = hypothesis_vector(o);
  auto plan = design_plan(o, r, o.devices);
  r.config["alternative"] = {{"alpha0", *o.alpha0}, {"alpha1", *o.alpha1}};
  r.config["beta"] = o.beta;
  r.config["devices"] = o.devices;
  r.config["hypothesis"] = {{"m", {m0, m1}}, {"d", o.d}, {"level", o.level}};
  r.config["abs_effect"] = o.abs_effect;
  double power = 0.0;
  check(osd_power(*o.alpha0, *o.alpha1, plan.get(), o.beta, m0, m1, o.d,
                  o.devices, o.level, o.abs_effect ? 1 : 0, &power));
  r.results = {{"devices", o.devices}, {"power", power}};
}

void run_samplesize(const Options& o, Report& r) {
  require_alphas(o);
  const auto [m0, m1] = hypothesis_vector(o);
  auto plan = design_plan(o, r, 1);
  r.config["alternative"] = {{"alpha0", *o.alpha0}, {"alpha1", *o.alpha1}};
  r.config["beta"] = o.beta;
  r.config["target_power"] = o.target_power;
  r.config["hypothesis"] = {{"m", {m0, m1}}, {"d", o.d}, {"level", o.level}};
  std::int64_t k = 0;
  check(osd_required_devices(*o.alpha0, *o.alpha1, plan.get(), o.beta, m0, m1,
                             o.d, o.target_power, o.level, &k));
  // The device formula depends on the squared effect, so report power with
  // |m'alpha - d| to match it for alternatives on either side.
  double at_k = 0.0;
  check(osd_power(*o.alpha0, *o.alpha1, plan.get(), o.beta, m0, m1, o.d, k,
                  o.level, 1, &at_k));
  json res{{"devices", k}, {"power_at_devices", at_k}};
  if (k > 1) {
    double below = 0.0;
    check(osd_power(*o.alpha0, *o.alpha1, plan.get(), o.beta, m0, m1, o.d,
                    k - 1, o.level, 1, &below));
    res["power_at_devices_minus_one"] = below;
  }
  r.results = res;
}

std::uint64_t generated_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void run_simulate(const Options& o, Report& r) {
  if (o.format != "json" && o.format != "csv") {
    config_error("--format must be json or csv");
  }
  std::ifstream in(o.spec);
  if (!in) throw Failure{OSD_PARSE_ERROR, "cannot open " + o.spec};
  std::stringstream text;
  text << in.rdbuf();
  osd_sim* raw = nullptr;
  check(osd_sim_parse(text.str().c_str(), &raw));
  SimPtr sim(raw);
  if (o.seed) {
    osd_sim_set_seed(sim.get(), *o.seed);
  } else if (!osd_sim_has_seed(sim.get())) {
    const std::uint64_t seed = generated_seed();
    osd_sim_set_seed(sim.get(), seed);
    std::cerr << "seed: " << seed << '\n';
  }
  if (o.replications) check(osd_sim_set_replications(sim.get(), *o.replications));
  osd_sim_set_threads(sim.get(), o.threads);
  r.config["spec_file"] = o.spec;
  r.config["seed"] = osd_sim_seed(sim.get());
  char* report = nullptr;
  char* csv = nullptr;
  check(osd_sim_run(sim.get(), &report, &csv));
  const std::string report_text = take(report);
  const std::string csv_text = take(csv);
  if (!o.curve.empty()) {
    std::ofstream out(o.curve, std::ios::binary);
    if (!out) config_error("cannot write " + o.curve);
    out << csv_text;
  }
  json doc = json::parse(report_text);
  for (const json& p : doc.at("points")) {
    if (p.at("failed_fits").get<std::size_t>() > 0) {
      std::ostringstream msg;
      msg << "x=" << p.at("x").get<double>()
          << " beta=" << p.at("beta").get<double>() << ": "
          << p.at("failed_fits").get<std::size_t>() << " failed fits";
      r.warnings.push_back(msg.str());
    }
  }
  r.results = doc;
  if (o.format == "csv") r.raw = csv_text;
}

void run_competing(const Options& o, Report& r) {
  const auto betas = number_list(o.betas);
  r.config["input"] = o.input;
  r.config["betas"] = betas;
  osd_multi* raw = nullptr;
  check(osd_multi_read_csv(o.input.c_str(), &raw));
  MultiPtr data(raw);
  const osd_solver_config cfg = solver(o);
  char* out = nullptr;
  check(osd_competing_fit_json(data.get(), betas.data(), betas.size(), &cfg,
                               &out));
  json doc = json::parse(take(out));
  for (const json& row : doc.at("rows")) {
    for (const json& c : row.at("causes")) collect_fit_warnings(c, r);
  }
  r.results = doc;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << path << '\n';
    return;
  }
  out << text;
}

json document(const Report& r, const json& errors) {
  return {{"config", r.config},
          {"results", r.results},
          {"diagnostics",
           {{"library_version", osd_version()}, {"warnings", r.warnings}}},
          {"errors", errors}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density power divergence estimation for one-shot device tests"};
  app.require_subcommand(1);
  Options o;

  auto add_output = [&](CLI::App* c) {
    c->add_option("-o,--output", o.output, "Write output here (default stdout)");
    c->add_option("--max-iters", o.max_iters, "Solver iteration limit")
        ->check(CLI::PositiveNumber);
  };
  auto add_input = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option("-i,--input", o.input, "Failure table CSV (w,t,K,n)")
                    ->check(CLI::ExistingFile);
    if (required) opt->required();
  };
  auto add_prediction = [&](CLI::App* c) {
    c->add_option("--mission-times", o.mission_times,
                  "Mission times for R(t) at w0, e.g. 10,20,30");
    c->add_option("--w0", o.w0, "Normal operating stress");
  };
  auto add_hypothesis = [&](CLI::App* c) {
    c->add_option("--m", o.m, "Hypothesis vector m (two values)");
    c->add_option("--d", o.d, "Hypothesised value of m'alpha");
    c->add_option("--level", o.level, "Significance level")
        ->check(CLI::Range(0.0, 1.0));
  };

  auto* fit = app.add_subcommand("fit", "Fit the MDPDE for one beta");
  add_input(fit, true);
  fit->add_option("--beta", o.beta, "Tuning parameter (>= 0)");
  add_prediction(fit);
  add_output(fit);

  auto* path = app.add_subcommand("fit-path", "Fit over a list of betas");
  add_input(path, true);
  path->add_option("--betas", o.betas, "Betas, e.g. 0:0.1:1,2,3,4")->required();
  add_prediction(path);
  add_output(path);

  auto* rel = app.add_subcommand("reliability",
                                 "Reliability and mean lifetime at w0");
  add_input(rel, false);
  rel->add_option("--beta", o.beta, "Tuning parameter when fitting --input");
  rel->add_option("--alpha0", o.alpha0, "alpha0 (instead of --input)");
  rel->add_option("--alpha1", o.alpha1, "alpha1 (instead of --input)");
  add_prediction(rel);
  add_output(rel);

  auto* zt = app.add_subcommand("ztest", "Z-type test of m'alpha = d");
  add_input(zt, true);
  zt->add_option("--beta", o.beta, "Tuning parameter (>= 0)");
  add_hypothesis(zt);
  add_output(zt);

  auto add_design = [&](CLI::App* c) {
    add_input(c, false);
    c->add_option("--stresses", o.stresses, "Stress levels (instead of --input)");
    c->add_option("--times", o.times, "Inspection times (instead of --input)");
    c->add_option("--alpha0", o.alpha0, "alpha0 under the alternative");
    c->add_option("--alpha1", o.alpha1, "alpha1 under the alternative");
    c->add_option("--beta", o.beta, "Tuning parameter (>= 0)");
    add_hypothesis(c);
    add_output(c);
  };
  auto* power = app.add_subcommand("power", "Approximate power for K devices");
  add_design(power);
  power->add_option("--devices", o.devices, "Devices per cell")->required();
  power->add_flag("--abs-effect", o.abs_effect,
                  "Use |m'alpha - d| (two-sided alternatives)");

  auto* size = app.add_subcommand("samplesize",
                                  "Devices per cell for a target power");
  add_design(size);
  size->add_option("--target-power", o.target_power, "Target power")
      ->check(CLI::Range(0.0, 1.0));

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo study from a JSON spec");
  sim->add_option("--spec", o.spec, "Simulation spec (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--seed", o.seed, "Master seed (overrides the spec)");
  sim->add_option("--replications", o.replications, "Override replications");
  sim->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  sim->add_option("--format", o.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  sim->add_option("--curve", o.curve, "Also write the curve CSV here");
  sim->add_option("-o,--output", o.output, "Write output here (default stdout)");

  auto* comp = app.add_subcommand("competing-fit",
                                  "Per-cause fits for two competing causes");
  comp->add_option("-i,--input", o.input, "CSV with w,t,n_sac,n_nat,n_tum")
      ->required()
      ->check(CLI::ExistingFile);
  comp->add_option("--betas", o.betas, "Betas, e.g. 0,0.1,0.5")->required();
  add_output(comp);

  Report report;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    const json err = json::array(
        {{{"code", "ParseError"}, {"message", std::string(e.what())}}});
    std::cout << document(report, err).dump(2) << '\n';
    return kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  report.config["command"] = chosen->get_name();
  int status = 0;
  json errors = json::array();
  try {
    const std::string name = chosen->get_name();
    if (name == "fit") run_fit(o, report);
    else if (name == "fit-path") run_fit_path(o, report);
    else if (name == "reliability") run_reliability(o, report);
    else if (name == "ztest") run_ztest(o, report);
    else if (name == "power") run_power(o, report);
    else if (name == "samplesize") run_samplesize(o, report);
    else if (name == "simulate") run_simulate(o, report);
    else run_competing(o, report);
  } catch (const Failure& f) {
    errors.push_back({{"code", osd_status_name(f.status)}, {"message", f.message}});
    report.results = nullptr;
    report.raw.clear();
    std::cerr << osd_status_name(f.status) << ": " << f.message << '\n';
    status = exit_code(f.status);
  }
  if (!report.raw.empty()) {
    emit(report.raw, o.output);
  } else {
    emit(document(report, errors).dump(2) + "\n", o.output);
  }
  return status;
}
