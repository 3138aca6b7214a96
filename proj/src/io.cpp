#include "oneshot/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "oneshot/error.hpp"

namespace oneshot::io {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line, std::string_view column,
                             const std::string& what) {
  std::ostringstream msg;
  msg << "row " << line;
  if (!column.empty()) msg << ", column '" << column << "'";
  msg << ": " << what;
  throw Error(ErrorCode::ParseError, msg.str());
}

double parse_real(const std::string& field, std::size_t line,
                  std::string_view column) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    parse_fail(line, column, "not a number: '" + field + "'");
  }
  return v;
}

std::int64_t parse_count(const std::string& field, std::size_t line,
                         std::string_view column) {
  std::int64_t v = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    parse_fail(line, column, "not an integer: '" + field + "'");
  }
  if (v < 0) parse_fail(line, column, "negative count");
  return v;
}

struct Grid {
  std::vector<double> stresses;
  std::vector<double> times;
};

// Rows of (w, t, payload) arranged into the I x J grid; every (w, t) pair
// must occur exactly once.
template <typename Row>
std::pair<Grid, std::vector<Row>> arrange(
    const std::vector<std::tuple<double, double, Row, std::size_t>>& rows) {
  std::set<double> ws, ts;
  for (const auto& r : rows) {
    ws.insert(std::get<0>(r));
    ts.insert(std::get<1>(r));
  }
  Grid grid{{ws.begin(), ws.end()}, {ts.begin(), ts.end()}};
  std::map<std::pair<double, double>, std::pair<Row, std::size_t>> cells;
  for (const auto& [w, t, payload, line] : rows) {
    if (!cells.emplace(std::pair{w, t}, std::pair{payload, line}).second) {
      parse_fail(line, "", "duplicate (w, t) pair");
    }
  }
  std::vector<Row> out;
  for (double w : grid.stresses) {
    for (double t : grid.times) {
      auto it = cells.find({w, t});
      if (it == cells.end()) {
        std::ostringstream msg;
        msg << "missing cell for w=" << w << ", t=" << t;
        throw Error(ErrorCode::ParseError, msg.str());
      }
      out.push_back(it->second.first);
    }
  }
  return {grid, out};
}

std::vector<std::string> read_header(std::istream& in,
                                     const std::vector<std::string>& expected) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ParseError, "empty input: header row missing");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  auto header = split(line);
  if (header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw Error(ErrorCode::ParseError,
                "row 1: expected header '" + want + "'");
  }
  return header;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  }
  return in;
}

}  // namespace

FailureTable parse_failure_csv(std::istream& in) {
  const auto header = read_header(in, {"w", "t", "K", "n"});
  std::vector<std::tuple<double, double, std::pair<std::int64_t, std::int64_t>,
                         std::size_t>>
      rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 4) parse_fail(line_no, "", "expected 4 fields");
    const double w = parse_real(f[0], line_no, "w");
    const double t = parse_real(f[1], line_no, "t");
    if (!(t > 0.0)) parse_fail(line_no, "t", "inspection time must be > 0");
    const std::int64_t k = parse_count(f[2], line_no, "K");
    const std::int64_t n = parse_count(f[3], line_no, "n");
    if (k < 1) parse_fail(line_no, "K", "cell needs at least one device");
    if (n > k) parse_fail(line_no, "n", "more failures than devices");
    rows.emplace_back(w, t, std::pair{k, n}, line_no);
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "no data rows");
  auto [grid, cells] = arrange(rows);
  std::vector<std::int64_t> devices, failures;
  for (const auto& [k, n] : cells) {
    devices.push_back(k);
    failures.push_back(n);
  }
  return FailureTable(
      TestPlan(std::move(grid.stresses), std::move(grid.times),
               std::move(devices)),
      std::move(failures));
}

FailureTable read_failure_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_failure_csv(in);
}

MultiOutcomeTable parse_multioutcome_csv(std::istream& in) {
  read_header(in, {"w", "t", "n_sac", "n_nat", "n_tum"});
  using Triple = MultiOutcomeTable::Triple;
  std::vector<std::tuple<double, double, Triple, std::size_t>> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) parse_fail(line_no, "", "expected 5 fields");
    const double w = parse_real(f[0], line_no, "w");
    const double t = parse_real(f[1], line_no, "t");
    if (!(t > 0.0)) parse_fail(line_no, "t", "inspection time must be > 0");
    Triple c{parse_count(f[2], line_no, "n_sac"),
             parse_count(f[3], line_no, "n_nat"),
             parse_count(f[4], line_no, "n_tum")};
    if (c[0] + c[1] + c[2] < 1) parse_fail(line_no, "", "empty cell");
    rows.emplace_back(w, t, c, line_no);
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "no data rows");
  auto [grid, cells] = arrange(rows);
  return MultiOutcomeTable(std::move(grid.stresses), std::move(grid.times),
                           std::move(cells));
}

MultiOutcomeTable read_multioutcome_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_multioutcome_csv(in);
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  for (const std::string& token : split(text)) {
    if (token.empty()) {
      throw Error(ErrorCode::ParseError, "empty entry in number list");
    }
    const auto parts = split(token, ':');
    if (parts.size() == 1) {
      out.push_back(parse_real(parts[0], 0, "list"));
    } else if (parts.size() == 3) {
      const double start = parse_real(parts[0], 0, "list");
      const double step = parse_real(parts[1], 0, "list");
      const double stop = parse_real(parts[2], 0, "list");
      if (!(step > 0.0) || stop < start) {
        throw Error(ErrorCode::ParseError,
                    "range '" + token + "' needs step > 0 and stop >= start");
      }
      const auto n = static_cast<long long>(
          std::floor((stop - start) / step + 1e-9));
      for (long long k = 0; k <= n; ++k) {
        const double v = start + static_cast<double>(k) * step;
        out.push_back(std::round(v * 1e12) / 1e12);
      }
    } else {
      throw Error(ErrorCode::ParseError, "malformed range '" + token + "'");
    }
  }
  return out;
}

std::vector<TuningParam> parse_beta_list(std::string_view text) {
  std::vector<TuningParam> betas;
  for (double b : parse_number_list(text)) {
    try {
      betas.emplace_back(b);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
  }
  return betas;
}

json to_json(const TestPlan& plan) {
  json devices = json::array();
  for (std::size_t i = 0; i < plan.stress_count(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < plan.time_count(); ++j) {
      row.push_back(plan.devices(i, j));
    }
    devices.push_back(row);
  }
  return {{"stresses", std::vector<double>(plan.stresses().begin(),
                                           plan.stresses().end())},
          {"times",
           std::vector<double>(plan.times().begin(), plan.times().end())},
          {"devices", devices}};
}

json to_json(const FailureTable& table) {
  json j = to_json(table.plan());
  json failures = json::array();
  for (std::size_t i = 0; i < table.plan().stress_count(); ++i) {
    json row = json::array();
    for (std::size_t t = 0; t < table.plan().time_count(); ++t) {
      row.push_back(table.failures(i, t));
    }
    failures.push_back(row);
  }
  j["failures"] = failures;
  return j;
}

json to_json(const Matrix2& m) {
  return json::array({json::array({m(0, 0), m(0, 1)}),
                      json::array({m(1, 0), m(1, 1)})});
}

json to_json(const SandwichCovariance& cov) {
  return {{"j_bar", to_json(cov.j_bar)},
          {"k_bar", to_json(cov.k_bar)},
          {"sigma", to_json(cov.sigma)}};
}

json to_json(const FitResult& fit) {
  json j{{"beta", fit.beta.value()},
         {"alpha0", fit.params.alpha0()},
         {"alpha1", fit.params.alpha1()},
         {"objective", fit.objective},
         {"grad_norm", fit.grad_norm},
         {"iterations", fit.iterations},
         {"converged", fit.converged}};
  j["covariance"] = fit.covariance ? to_json(*fit.covariance) : json(nullptr);
  j["diagnostics"] = {
      {"clamped", fit.diagnostics.clamped},
      {"multistart_disagreement", fit.diagnostics.multistart_disagreement},
      {"multistart_spread", fit.diagnostics.multistart_spread},
      {"starts", fit.diagnostics.starts}};
  return j;
}

namespace {

Matrix2 matrix_from_json(const json& j) {
  return {{j.at(0).at(0).get<double>(), j.at(0).at(1).get<double>(),
           j.at(1).at(0).get<double>(), j.at(1).at(1).get<double>()}};
}

}  // namespace

FitResult fit_from_json(const json& j) {
  try {
    FitResult r{TuningParam(j.at("beta").get<double>()),
                ModelParams(j.at("alpha0").get<double>(),
                            j.at("alpha1").get<double>())};
    r.objective = j.at("objective").get<double>();
    r.grad_norm = j.at("grad_norm").get<double>();
    r.iterations = j.at("iterations").get<int>();
    r.converged = j.at("converged").get<bool>();
    if (const json& c = j.at("covariance"); !c.is_null()) {
      r.covariance = SandwichCovariance{
          matrix_from_json(c.at("j_bar")), matrix_from_json(c.at("k_bar")),
          matrix_from_json(c.at("sigma")), r.params, r.beta};
    }
    if (j.contains("diagnostics")) {
      const json& d = j.at("diagnostics");
      r.diagnostics.clamped = d.value("clamped", false);
      r.diagnostics.multistart_disagreement =
          d.value("multistart_disagreement", false);
      r.diagnostics.multistart_spread = d.value("multistart_spread", 0.0);
      r.diagnostics.starts = d.value("starts", 0);
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("fit JSON: ") + e.what());
  }
}

namespace {

std::string mode_name(ContaminationMode m) {
  switch (m) {
    case ContaminationMode::None: return "none";
    case ContaminationMode::Alpha0Shift: return "alpha0_shift";
    case ContaminationMode::Alpha1Shift: return "alpha1_shift";
  }
  return "none";
}

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const SimulationSpec& spec) {
  json betas = json::array();
  for (const auto& b : spec.betas) betas.push_back(b.value());
  json j{{"plan", to_json(spec.plan)},
         {"true_params",
          {{"alpha0", spec.true_params.alpha0()},
           {"alpha1", spec.true_params.alpha1()}}},
         {"contamination",
          {{"mode", mode_name(spec.contamination.mode)},
           {"cell", {spec.contamination.stress_index,
                     spec.contamination.time_index}},
           {"value", spec.contamination.value}}},
         {"betas", betas},
         {"replications", spec.replications},
         {"seed", spec.seed},
         {"solver",
          {{"max_iters", spec.solver.max_iters},
           {"grad_tol", spec.solver.grad_tol},
           {"step_tol", spec.solver.step_tol},
           {"grid_init", spec.solver.grid_init}}}};
  if (spec.hypothesis) {
    const auto& h = spec.hypothesis->hypothesis;
    j["hypothesis"] = {{"m", {h.m0(), h.m1()}},
                       {"d", h.d()},
                       {"level", spec.hypothesis->level}};
  }
  return j;
}

json to_json(const BetaSummary& s) {
  json row{{"beta", s.beta},
           {"successes", s.successes},
           {"failed_fits", s.failed_fits},
           {"rmse_alpha0", nan_safe(s.rmse_alpha0)},
           {"rmse_alpha1", nan_safe(s.rmse_alpha1)},
           {"rmse_combined", nan_safe(s.rmse_combined)}};
  row["rejection_rate"] =
      s.rejection_rate ? nan_safe(*s.rejection_rate) : json(nullptr);
  return row;
}

json to_json(const SimulationReport& report) {
  json rows = json::array();
  for (const BetaSummary& s : report.rows) rows.push_back(to_json(s));
  return {{"replications", report.replications},
          {"seed", report.seed},
          {"spec", to_json(report.spec)},
          {"rows", rows}};
}

json to_json(const std::vector<CurvePoint>& points) {
  json out = json::array();
  for (const CurvePoint& p : points) {
    json row = to_json(p.summary);
    row["x"] = p.x;
    out.push_back(row);
  }
  return out;
}

SimulationRequest simulation_request_from_json(const json& j) {
  try {
    const json& p = j.at("plan");
    auto stresses = p.at("stresses").get<std::vector<double>>();
    auto times = p.at("times").get<std::vector<double>>();
    std::vector<std::int64_t> devices;
    const json& d = p.at("devices");
    if (d.is_number_integer()) {
      devices.assign(stresses.size() * times.size(), d.get<std::int64_t>());
    } else {
      for (const json& row : d) {
        if (row.is_array()) {
          for (const json& k : row) devices.push_back(k.get<std::int64_t>());
        } else {
          devices.push_back(row.get<std::int64_t>());
        }
      }
    }
    TestPlan plan(std::move(stresses), std::move(times), std::move(devices));

    const json& tp = j.at("true_params");
    ModelParams truth(tp.at("alpha0").get<double>(),
                      tp.at("alpha1").get<double>());

    std::vector<TuningParam> betas;
    const json& jb = j.at("betas");
    if (jb.is_string()) {
      betas = parse_beta_list(jb.get<std::string>());
    } else {
      for (const json& b : jb) betas.emplace_back(b.get<double>());
    }

    SimulationRequest req{SimulationSpec{std::move(plan), truth}};
    SimulationSpec& spec = req.spec;
    spec.betas = std::move(betas);
    spec.replications = j.value("replications", std::size_t{2000});
    if (j.contains("seed")) {
      spec.seed = j.at("seed").get<std::uint64_t>();
      req.seed_given = true;
    }
    spec.threads = j.value("threads", 0u);

    if (j.contains("contamination")) {
      const json& c = j.at("contamination");
      const std::string mode = c.value("mode", "none");
      if (mode == "none") {
        spec.contamination.mode = ContaminationMode::None;
      } else if (mode == "alpha0_shift") {
        spec.contamination.mode = ContaminationMode::Alpha0Shift;
      } else if (mode == "alpha1_shift") {
        spec.contamination.mode = ContaminationMode::Alpha1Shift;
      } else {
        throw Error(ErrorCode::ParseError,
                    "unknown contamination mode '" + mode + "'");
      }
      if (c.contains("cell")) {
        spec.contamination.stress_index = c.at("cell").at(0).get<std::size_t>();
        spec.contamination.time_index = c.at("cell").at(1).get<std::size_t>();
      }
      spec.contamination.value = c.value("value", 0.0);
    }
    if (j.contains("hypothesis")) {
      const json& h = j.at("hypothesis");
      spec.hypothesis = HypothesisSpec{
          LinearHypothesis(h.at("m").at(0).get<double>(),
                           h.at("m").at(1).get<double>(),
                           h.at("d").get<double>()),
          h.value("level", 0.05)};
    }
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      spec.solver.max_iters = s.value("max_iters", spec.solver.max_iters);
      spec.solver.grad_tol = s.value("grad_tol", spec.solver.grad_tol);
      spec.solver.step_tol = s.value("step_tol", spec.solver.step_tol);
      spec.solver.grid_init = s.value("grid_init", spec.solver.grid_init);
    }

    const std::string study = j.value("study", spec.hypothesis ? "level_power"
                                                                : "rmse");
    if (study == "rmse") {
      req.study = SimulationRequest::Study::Rmse;
    } else if (study == "level_power") {
      req.study = SimulationRequest::Study::LevelPower;
      if (!spec.hypothesis) {
        throw Error(ErrorCode::ParseError,
                    "level_power study needs a 'hypothesis' object");
      }
    } else {
      throw Error(ErrorCode::ParseError, "unknown study '" + study + "'");
    }
    if (req.study == SimulationRequest::Study::Rmse) spec.hypothesis.reset();

    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      const std::string axis = s.value("axis", "none");
      if (axis == "none") {
        req.axis = SweepAxis::None;
      } else if (axis == "strength") {
        req.axis = SweepAxis::ContaminationStrength;
        req.sweep_values = parse_number_list("0:0.1:0.9");
      } else if (axis == "devices") {
        req.axis = SweepAxis::Devices;
      } else {
        throw Error(ErrorCode::ParseError, "unknown sweep axis '" + axis + "'");
      }
      if (s.contains("values")) {
        const json& v = s.at("values");
        req.sweep_values = v.is_string()
                               ? parse_number_list(v.get<std::string>())
                               : v.get<std::vector<double>>();
      }
      if (req.axis == SweepAxis::Devices && req.sweep_values.empty()) {
        throw Error(ErrorCode::ParseError, "device sweep needs 'values'");
      }
    }
    return req;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError,
                std::string("simulation spec: ") + e.what());
  }
}

}  // namespace oneshot::io
