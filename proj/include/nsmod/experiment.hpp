#pragma once

// Multistart experiment driver: one solver run per (start, h_max) pair,
// dispatched to a bounded worker pool, with CSV/JSON exports.
//
// Output layout (in the configured directory):
//   front.csv        run_id,problem,h_max,start_label,J1,J2,iters,status,wall_ms,max_xi_set
//   trace_<id>.csv   iter,f1..fk,norm_v,step,xi_set_size,func_evals,subgrad_evals
//   field_<id>.csv   node_id,x1,x2,u,y,psi,active   (obstacle problems only)
//   summary.json

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "nsmod/analytic.hpp"
#include "nsmod/error.hpp"
#include "nsmod/fem/obstacle.hpp"
#include "nsmod/solver.hpp"

namespace nsmod::experiment {

namespace fs = std::filesystem;

/// `analytic:<name>` or `obstacle:<constant|piecewise>`.
struct ProblemSpec {
  enum class Family { Analytic, Obstacle };
  Family family = Family::Obstacle;
  std::string name;

  static ProblemSpec parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ArgumentError("problem must look like family:name, got '" + text + "'");
    const std::string family = text.substr(0, colon);
    ProblemSpec spec;
    spec.name = text.substr(colon + 1);
    if (family == "analytic") {
      spec.family = Family::Analytic;
      analytic::make_problem(spec.name);  // validates the name
    } else if (family == "obstacle") {
      spec.family = Family::Obstacle;
      fem::parse_obstacle_kind(spec.name);
    } else {
      throw ArgumentError("unknown problem family '" + family + "'");
    }
    return spec;
  }

  std::string str() const { return (family == Family::Analytic ? "analytic:" : "obstacle:") + name; }
};

struct ExperimentConfig {
  std::string problem = "obstacle:constant";
  std::vector<double> h_max{0.4, 0.2};
  std::vector<double> u0{1, 2, 3, 4, 5, 6, 7, 8};
  // Analytic problems: explicit start points, else `starts` seeded uniform
  // draws from [-box, box]^n.
  std::vector<std::vector<double>> start_points;
  int starts = 5;
  double box = 5.0;
  std::uint64_t seed = 1;

  double eps_bar = 1e-4;
  double delta_bar = 1e-4;
  double c = 0.1;
  double t0 = 1.0;
  double control_weight = fem::kDefaultControlWeight;
  int max_iters = 10000;
  std::string schedule = "constant";  // constant | inverse-sqrt

  fs::path out = "results";
  int jobs = 1;
  bool timing = true;  // false writes wall_ms = 0 for byte-reproducible output

  void validate() const {
    const ProblemSpec spec = ProblemSpec::parse(problem);
    if (spec.family == ProblemSpec::Family::Obstacle) {
      if (h_max.empty()) throw ArgumentError("hmax list is empty");
      for (double h : h_max)
        if (!(h > 0.0)) throw ArgumentError("hmax values must be positive");
      if (u0.empty()) throw ArgumentError("u0 list is empty");
    } else if (start_points.empty() && starts < 1) {
      throw ArgumentError("starts must be at least 1");
    }
    if (!(box > 0.0)) throw ArgumentError("box must be positive");
    if (!(eps_bar > 0.0) || !(delta_bar > 0.0)) throw ArgumentError("eps-bar and delta-bar must be positive");
    if (!(c > 0.0 && c < 1.0)) throw ArgumentError("c must lie in (0, 1)");
    if (!(t0 > 0.0)) throw ArgumentError("t0 must be positive");
    if (!(control_weight > 0.0)) throw ArgumentError("C must be positive");
    if (max_iters < 1) throw ArgumentError("max-iters must be at least 1");
    if (jobs < 1) throw ArgumentError("jobs must be at least 1");
    if (schedule != "constant" && schedule != "inverse-sqrt")
      throw ArgumentError("schedule must be constant or inverse-sqrt");
    if (out.empty()) throw ArgumentError("output directory is empty");
  }

  SolverConfig solver_config() const {
    SolverConfig cfg = SolverConfig::constant(eps_bar, delta_bar, c, t0);
    if (schedule == "inverse-sqrt") {
      // Start at 1e-1 and decay; the stop test fires once eps_j <= eps_bar.
      cfg.eps_seq = ToleranceSchedule::inverse_sqrt(std::max(eps_bar, 1e-1));
      cfg.delta_seq = ToleranceSchedule::inverse_sqrt(std::max(delta_bar, 1e-1));
    }
    cfg.max_outer_iters = max_iters;
    return cfg;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("invalid number '" + s + "' for " + key);
  }
}

inline long long parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("invalid integer '" + s + "' for " + key);
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_double(key, item));
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  const std::string v = trim(s);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ArgumentError("invalid boolean '" + s + "' for " + key);
}

/// Shortest round-trip decimal form, so files are stable and exact.
inline std::string fmt(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

/// Applies one `key = value` setting; keys match the CLI flag names.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key_in, const std::string& value) {
  const std::string key = detail::trim(key_in);
  if (key == "problem") cfg.problem = detail::trim(value);
  else if (key == "hmax") cfg.h_max = detail::parse_list(key, value);
  else if (key == "u0") cfg.u0 = detail::parse_list(key, value);
  else if (key == "start") {
    cfg.start_points.clear();
    for (const auto& pt : detail::split(value, ';')) cfg.start_points.push_back(detail::parse_list(key, pt));
  } else if (key == "starts") cfg.starts = static_cast<int>(detail::parse_int(key, value));
  else if (key == "box") cfg.box = detail::parse_double(key, value);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_int(key, value));
  else if (key == "eps-bar") cfg.eps_bar = detail::parse_double(key, value);
  else if (key == "delta-bar") cfg.delta_bar = detail::parse_double(key, value);
  else if (key == "c") cfg.c = detail::parse_double(key, value);
  else if (key == "t0") cfg.t0 = detail::parse_double(key, value);
  else if (key == "C") cfg.control_weight = detail::parse_double(key, value);
  else if (key == "max-iters") cfg.max_iters = static_cast<int>(detail::parse_int(key, value));
  else if (key == "schedule") cfg.schedule = detail::trim(value);
  else if (key == "out") cfg.out = detail::trim(value);
  else if (key == "jobs") cfg.jobs = static_cast<int>(detail::parse_int(key, value));
  else if (key == "timing") cfg.timing = detail::parse_bool(key, value);
  else throw ArgumentError("unknown setting '" + key + "'");
}

/// Reads `key = value` lines; '#' starts a comment.
inline ExperimentConfig load_config(const fs::path& path, ExperimentConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ArgumentError& e) {
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

struct RunOutcome {
  std::string run_id;
  std::string problem;
  double h_max = 0.0;  // 0 for mesh-free problems
  std::string start_label;
  std::size_t num_objectives = 0;
  std::optional<RunRecord> record;  // empty if the run threw
  std::string error;

  bool completed() const { return record.has_value(); }
  std::string status() const { return record ? to_string(record->status) : "Error"; }
  int iters() const { return record ? static_cast<int>(record->rows.size()) : 0; }
};

struct ExperimentSummary {
  std::vector<RunOutcome> runs;
  bool all_completed() const {
    return std::all_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.completed(); });
  }
};

// ---- exports ---------------------------------------------------------------

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

inline std::string front_csv(std::vector<const RunOutcome*> runs, bool timing = true) {
  if (runs.empty()) throw ArgumentError("front export needs at least one run");
  std::stable_sort(runs.begin(), runs.end(), [](const RunOutcome* a, const RunOutcome* b) {
    if (a->h_max != b->h_max) return a->h_max < b->h_max;
    return false;  // plan order within one h_max is the start order
  });
  std::ostringstream os;
  os << "run_id,problem,h_max,start_label,J1,J2,iters,status,wall_ms,max_xi_set\n";
  for (const RunOutcome* r : runs) {
    std::string j1 = "nan", j2 = "nan";
    if (r->record && r->record->f_final.size() >= 1) j1 = detail::fmt(r->record->f_final(0));
    if (r->record && r->record->f_final.size() >= 2) j2 = detail::fmt(r->record->f_final(1));
    const double wall = (timing && r->record) ? r->record->wall_ms : 0.0;
    char wall_buf[32];
    std::snprintf(wall_buf, sizeof wall_buf, "%.3f", wall);
    os << r->run_id << ',' << r->problem << ',' << detail::fmt(r->h_max) << ',' << r->start_label << ',' << j1
       << ',' << j2 << ',' << r->iters() << ',' << r->status() << ',' << wall_buf << ','
       << (r->record ? r->record->max_xi_set_size() : 0) << '\n';
  }
  return os.str();
}

inline void export_front(const fs::path& path, const std::vector<RunOutcome>& runs, bool timing = true) {
  std::vector<const RunOutcome*> ptrs;
  for (const auto& r : runs) ptrs.push_back(&r);
  write_file(path, front_csv(std::move(ptrs), timing));
}

inline std::string trace_csv(const RunRecord& rec, std::size_t k) {
  std::ostringstream os;
  os << "iter";
  for (std::size_t i = 1; i <= k; ++i) os << ",f" << i;
  os << ",norm_v,step,xi_set_size,func_evals,subgrad_evals\n";
  for (const auto& row : rec.rows) {
    os << row.iter;
    for (Eigen::Index i = 0; i < row.f.size(); ++i) os << ',' << detail::fmt(row.f(i));
    os << ',' << detail::fmt(row.norm_v) << ',' << detail::fmt(row.step) << ',' << row.xi_set_size << ','
       << row.func_evals << ',' << row.subgrad_evals << '\n';
  }
  return os.str();
}

inline void export_trace(const fs::path& path, const RunRecord& rec, std::size_t k) {
  write_file(path, trace_csv(rec, k));
}

inline std::string field_csv(const fem::Mesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& psi, const std::vector<char>& active) {
  const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
  if (u.size() != n || y.size() != n || psi.size() != n || active.size() != mesh.num_nodes())
    throw DimensionError("field export: vector lengths must equal the node count");
  std::ostringstream os;
  os << "node_id,x1,x2,u,y,psi,active\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = mesh.nodes[static_cast<std::size_t>(i)];
    os << i << ',' << detail::fmt(p.x()) << ',' << detail::fmt(p.y()) << ',' << detail::fmt(u(i)) << ','
       << detail::fmt(y(i)) << ',' << detail::fmt(psi(i)) << ',' << (active[static_cast<std::size_t>(i)] ? 1 : 0)
       << '\n';
  }
  return os.str();
}

inline void export_field(const fs::path& path, const fem::Mesh& mesh, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& psi, const std::vector<char>& active) {
  write_file(path, field_csv(mesh, u, y, psi, active));
}

inline nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentSummary& summary) {
  nlohmann::json j;
  j["config"] = {{"problem", cfg.problem},     {"hmax", cfg.h_max},         {"u0", cfg.u0},
                 {"starts", cfg.starts},       {"box", cfg.box},            {"seed", cfg.seed},
                 {"eps_bar", cfg.eps_bar},     {"delta_bar", cfg.delta_bar}, {"c", cfg.c},
                 {"t0", cfg.t0},               {"C", cfg.control_weight},   {"max_iters", cfg.max_iters},
                 {"schedule", cfg.schedule},   {"jobs", cfg.jobs}};
  j["config"]["start_points"] = cfg.start_points;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : summary.runs) {
    nlohmann::json rj{{"run_id", r.run_id}, {"problem", r.problem}, {"h_max", r.h_max},
                      {"start_label", r.start_label}, {"status", r.status()}, {"iters", r.iters()}};
    if (r.record) {
      std::vector<double> f(r.record->f_final.data(), r.record->f_final.data() + r.record->f_final.size());
      rj["objectives"] = f;
      rj["max_xi_set"] = r.record->max_xi_set_size();
      rj["final_norm_v"] = r.record->rows.empty() ? 0.0 : r.record->rows.back().norm_v;
      rj["wall_ms"] = cfg.timing ? r.record->wall_ms : 0.0;
      if (!r.record->message.empty()) rj["message"] = r.record->message;
    } else {
      rj["error"] = r.error;
    }
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);
  j["all_completed"] = summary.all_completed();
  return j;
}

// ---- driver ----------------------------------------------------------------

namespace detail {

using AnyProblem = std::variant<analytic::AnalyticProblem, fem::ObstacleControlProblem>;

struct PlannedRun {
  std::string run_id;
  double h_max = 0.0;
  std::string start_label;
  std::size_t problem_index = 0;
  Eigen::VectorXd x0;
};

inline std::string label_for_u0(double v) { return "u0=" + fmt(v); }

}  // namespace detail

inline ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProblemSpec spec = ProblemSpec::parse(cfg.problem);
  const SolverConfig solver_cfg = cfg.solver_config();

  std::vector<detail::AnyProblem> problems;
  std::vector<detail::PlannedRun> plan;
  auto next_id = [&plan] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "r%03zu", plan.size());
    return std::string(buf);
  };

  if (spec.family == ProblemSpec::Family::Obstacle) {
    std::vector<double> hs = cfg.h_max;
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    std::vector<double> us = cfg.u0;
    std::sort(us.begin(), us.end());
    const fem::ObstacleKind kind = fem::parse_obstacle_kind(spec.name);
    for (double h : hs) {
      problems.emplace_back(fem::make_benchmark(h, kind, cfg.control_weight));
      const auto& p = std::get<fem::ObstacleControlProblem>(problems.back());
      for (double u : us)
        plan.push_back({next_id(), h, detail::label_for_u0(u), problems.size() - 1, p.constant_control(u).coeffs});
    }
  } else {
    problems.emplace_back(analytic::make_problem(spec.name));
    const auto& p = std::get<analytic::AnalyticProblem>(problems.back());
    const Eigen::Index n = p.dim();
    char buf[16];
    if (!cfg.start_points.empty()) {
      for (std::size_t s = 0; s < cfg.start_points.size(); ++s) {
        const auto& pt = cfg.start_points[s];
        if (static_cast<Eigen::Index>(pt.size()) != n)
          throw ArgumentError("start point " + std::to_string(s) + " has dimension " + std::to_string(pt.size()) +
                              ", problem needs " + std::to_string(n));
        std::snprintf(buf, sizeof buf, "p%02zu", s);
        plan.push_back({next_id(), 0.0, buf, 0, Eigen::Map<const Eigen::VectorXd>(pt.data(), n)});
      }
    } else {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> dist(-cfg.box, cfg.box);
      for (int s = 0; s < cfg.starts; ++s) {
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = dist(rng);
        std::snprintf(buf, sizeof buf, "s%02d", s);
        plan.push_back({next_id(), 0.0, buf, 0, std::move(x)});
      }
    }
  }

  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw Error("cannot create output directory " + cfg.out.string() + ": " + ec.message());

  ExperimentSummary summary;
  summary.runs.resize(plan.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t idx = next++; idx < plan.size(); idx = next++) {
      const auto& pr = plan[idx];
      RunOutcome& out = summary.runs[idx];
      out.run_id = pr.run_id;
      out.problem = spec.str();
      out.h_max = pr.h_max;
      out.start_label = pr.start_label;
      try {
        std::visit(
            [&](const auto& problem) {
              out.num_objectives = problem.num_objectives();
              RunRecord rec = solve(problem, problem.space()->primal(pr.x0), solver_cfg);
              export_trace(cfg.out / ("trace_" + pr.run_id + ".csv"), rec, problem.num_objectives());
              if constexpr (std::is_same_v<std::decay_t<decltype(problem)>, fem::ObstacleControlProblem>) {
                const fem::ObstacleState st = problem.solve_state(rec.x_final);
                export_field(cfg.out / ("field_" + pr.run_id + ".csv"), problem.mesh(), rec.x_final.coeffs,
                             st.y.coeffs, problem.psi(), st.active);
              }
              out.record = std::move(rec);
            },
            problems[pr.problem_index]);
      } catch (const std::exception& e) {
        out.record.reset();
        out.error = e.what();
      }
    }
  };

  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(std::max<std::size_t>(plan.size(), 1)));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  export_front(cfg.out / "front.csv", summary.runs, cfg.timing);
  write_file(cfg.out / "summary.json", summary_json(cfg, summary).dump(2) + "\n");
  return summary;
}

}  // namespace nsmod::experiment
