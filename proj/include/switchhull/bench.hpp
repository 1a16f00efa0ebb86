#pragma once

// Benchmark driver: JSON config, per-grid runs of the exact solver and the
// relaxations, fine-grid re-evaluation, CSV and convergence-log output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "switchhull/errors.hpp"
#include "switchhull/fem_heat.hpp"
#include "switchhull/global_solver.hpp"
#include "switchhull/reference_problem.hpp"
#include "switchhull/relax_engine.hpp"
#include "switchhull/switch_poly.hpp"

namespace switchhull {

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

enum class InitialKind { Zero, Desired, Random };

struct BenchConfig {
  std::vector<int> n_x{10};
  std::vector<int> n_t{20};
  double horizon = 2.0;
  int sigma_max = 2;
  double tikhonov = 0.0;

  bool dwell = false;
  double min_dwell = 0.5;
  bool leading_zero = true;
  std::vector<std::uint32_t> allowed{0u, 1u};

  InitialKind initial = InitialKind::Zero;
  double initial_amplitude = 1.0;

  int n_x_fine = 100;
  int n_t_fine = 200;

  double qp_tolerance = 1e-8;
  double fw_tolerance = 1e-4;
  int fw_max_iterations = 5000;
  bool fw_away_steps = true;
  double cut_relative_change = 1e-3;
  int cut_stall_iterations = 3;
  std::size_t enumeration_cap = 1'000'000;

  std::vector<Method> methods{Method::Exact, Method::Naive, Method::Tailored};
  std::string csv_path = "results.csv";
  std::string log_path = "convergence.csv";
  std::string coarse_csv_path;  // empty: not written
  std::uint64_t seed = 0;

  bool wants(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) throw ConfigError("config: unknown field '" + where + key + "'");
}

template <class T>
T field(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: field '" + where + key + "' has the wrong type");
  }
}

inline std::vector<int> int_or_list(const json& obj, const std::string& key, std::vector<int> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_integer()) return {v.get<int>()};
  if (v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); }))
    return v.get<std::vector<int>>();
  throw ConfigError("config: field '" + key + "' must be an integer or a nonempty list of integers");
}

}  // namespace detail

inline void validate(const BenchConfig& cfg) {
  for (int nx : cfg.n_x)
    if (nx < 3) throw ConfigError("config: field 'n_x' must be >= 3");
  for (int nt : cfg.n_t) {
    if (nt < 1) throw ConfigError("config: field 'n_t' must be >= 1");
    if (cfg.n_t_fine % nt != 0) throw ConfigError("config: field 'n_t_fine' must be a multiple of every n_t");
  }
  if (cfg.n_x_fine < 3) throw ConfigError("config: field 'n_x_fine' must be >= 3");
  if (!(cfg.horizon > 0.0)) throw ConfigError("config: field 'T' must be > 0");
  if (cfg.sigma_max < 0) throw ConfigError("config: field 'sigma_max' must be >= 0");
  if (cfg.tikhonov < 0.0) throw ConfigError("config: field 'alpha' must be >= 0");
  if (cfg.dwell && !(cfg.min_dwell > 0.0 && cfg.min_dwell <= cfg.horizon))
    throw ConfigError("config: field 'constraint.s' must satisfy 0 < s <= T");
  if (cfg.allowed.empty()) throw ConfigError("config: field 'constraint.allowed' must be nonempty");
  if (cfg.methods.empty()) throw ConfigError("config: field 'methods' must be nonempty");
  if (!(cfg.qp_tolerance > 0.0) || !(cfg.fw_tolerance > 0.0))
    throw ConfigError("config: field 'tolerances' entries must be > 0");
  if (cfg.fw_max_iterations < 1 || cfg.cut_stall_iterations < 1)
    throw ConfigError("config: field 'tolerances' iteration counts must be >= 1");
}

inline BenchConfig parse_config(const nlohmann::json& j) {
  using detail::field;
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  detail::reject_unknown(j, {"n_x", "n_t", "T", "sigma_max", "alpha", "constraint", "y0", "n_x_fine", "n_t_fine",
                             "tolerances", "methods", "output", "seed"},
                         "");
  BenchConfig cfg;
  cfg.n_x = detail::int_or_list(j, "n_x", cfg.n_x);
  cfg.n_t = detail::int_or_list(j, "n_t", cfg.n_t);
  cfg.horizon = field(j, "T", "", cfg.horizon);
  cfg.sigma_max = field(j, "sigma_max", "", cfg.sigma_max);
  cfg.tikhonov = field(j, "alpha", "", cfg.tikhonov);
  cfg.n_x_fine = field(j, "n_x_fine", "", cfg.n_x_fine);
  cfg.n_t_fine = field(j, "n_t_fine", "", cfg.n_t_fine);
  cfg.seed = field<std::uint64_t>(j, "seed", "", cfg.seed);

  if (j.contains("constraint")) {
    const auto& c = j.at("constraint");
    if (!c.is_object()) throw ConfigError("config: field 'constraint' must be an object");
    detail::reject_unknown(c, {"kind", "leading_zero", "allowed", "s"}, "constraint.");
    const std::string kind = field<std::string>(c, "kind", "constraint.", "bounded");
    if (kind == "dwell") {
      cfg.dwell = true;
      if (!c.contains("s")) throw ConfigError("config: field 'constraint.s' is required for dwell constraints");
      cfg.min_dwell = field(c, "s", "constraint.", cfg.min_dwell);
    } else if (kind != "bounded") {
      throw ConfigError("config: field 'constraint.kind' must be 'bounded' or 'dwell'");
    }
    cfg.leading_zero = field(c, "leading_zero", "constraint.", cfg.leading_zero);
    if (c.contains("allowed")) {
      const auto states = field<std::vector<int>>(c, "allowed", "constraint.", {});
      cfg.allowed.clear();
      for (int s : states) {
        if (s != 0 && s != 1) throw ConfigError("config: field 'constraint.allowed' entries must be 0 or 1");
        cfg.allowed.push_back(static_cast<std::uint32_t>(s));
      }
    }
  }

  if (j.contains("y0")) {
    const auto& y = j.at("y0");
    std::string kind;
    if (y.is_string()) {
      kind = y.get<std::string>();
    } else if (y.is_object()) {
      detail::reject_unknown(y, {"kind", "amplitude"}, "y0.");
      kind = field<std::string>(y, "kind", "y0.", "zero");
      cfg.initial_amplitude = field(y, "amplitude", "y0.", cfg.initial_amplitude);
    } else {
      throw ConfigError("config: field 'y0' must be a string or an object");
    }
    if (kind == "zero")
      cfg.initial = InitialKind::Zero;
    else if (kind == "desired")
      cfg.initial = InitialKind::Desired;
    else if (kind == "random")
      cfg.initial = InitialKind::Random;
    else
      throw ConfigError("config: field 'y0' must be 'zero', 'desired' or 'random'");
  }

  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (!t.is_object()) throw ConfigError("config: field 'tolerances' must be an object");
    detail::reject_unknown(t, {"qp", "fw_gap", "fw_max_iterations", "fw_away_steps", "cut_relative_change",
                               "cut_stall_iterations", "enumeration_cap"},
                           "tolerances.");
    cfg.qp_tolerance = field(t, "qp", "tolerances.", cfg.qp_tolerance);
    cfg.fw_tolerance = field(t, "fw_gap", "tolerances.", cfg.fw_tolerance);
    cfg.fw_max_iterations = field(t, "fw_max_iterations", "tolerances.", cfg.fw_max_iterations);
    cfg.fw_away_steps = field(t, "fw_away_steps", "tolerances.", cfg.fw_away_steps);
    cfg.cut_relative_change = field(t, "cut_relative_change", "tolerances.", cfg.cut_relative_change);
    cfg.cut_stall_iterations = field(t, "cut_stall_iterations", "tolerances.", cfg.cut_stall_iterations);
    cfg.enumeration_cap = field<std::size_t>(t, "enumeration_cap", "tolerances.", cfg.enumeration_cap);
  }

  if (j.contains("methods")) {
    const auto names = field<std::vector<std::string>>(j, "methods", "", {});
    cfg.methods.clear();
    for (const auto& n : names) {
      const auto m = parse_method(n);
      if (!m) throw ConfigError("config: field 'methods' has unknown method '" + n + "'");
      if (!cfg.wants(*m)) cfg.methods.push_back(*m);
    }
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    if (!o.is_object()) throw ConfigError("config: field 'output' must be an object");
    detail::reject_unknown(o, {"csv", "log", "coarse_csv"}, "output.");
    cfg.csv_path = field(o, "csv", "output.", cfg.csv_path);
    cfg.log_path = field(o, "log", "output.", cfg.log_path);
    cfg.coarse_csv_path = field(o, "coarse_csv", "output.", cfg.coarse_csv_path);
  }
  validate(cfg);
  return cfg;
}

inline BenchConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_config(j);
}

/// Initial temperature: zero, the target at t = 0, or a seeded random
/// combination of the lowest sine modes.
inline ScalarField initial_field(const BenchConfig& cfg) {
  constexpr double pi = std::numbers::pi;
  switch (cfg.initial) {
    case InitialKind::Zero: return {};
    case InitialKind::Desired:
      return [](double x1, double x2) { return reference_desired_state(0.0, x1, x2); };
    case InitialKind::Random: {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> coef(-1.0, 1.0);
      std::array<double, 9> a{};
      for (double& v : a) v = cfg.initial_amplitude * coef(rng);
      return [a](double x1, double x2) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) s += a[3 * k + l] * std::sin((k + 1) * pi * x1) * std::sin((l + 1) * pi * x2);
        return s;
      };
    }
  }
  return {};
}

inline std::shared_ptr<const HeatControlProblem> build_reference_problem(const BenchConfig& cfg) {
  auto p = std::make_shared<HeatControlProblem>();
  p->horizon = cfg.horizon;
  p->forms = {reference_form_function};
  p->desired = reference_desired_state;
  p->initial = initial_field(cfg);
  p->tikhonov = cfg.tikhonov;
  if (cfg.dwell) {
    p->constraint = DwellTime{cfg.min_dwell};
  } else {
    BoundedSwitchings b = BoundedSwitchings::full_cube(1, cfg.sigma_max, cfg.leading_zero);
    b.allowed = cfg.allowed;
    std::sort(b.allowed.begin(), b.allowed.end());
    b.allowed.erase(std::unique(b.allowed.begin(), b.allowed.end()), b.allowed.end());
    p->constraint = b;
  }
  return p;
}

inline Instance build_reference_instance(const BenchConfig& cfg, int n_x, int n_t) {
  return Instance::discretize(build_reference_problem(cfg), n_x, n_t);
}

// Table arithmetic.

inline double gap_percent(double exact_objective, double bound) {
  return 100.0 * (exact_objective - bound) / exact_objective;
}

/// Share of the exact-vs-naive gap closed by `bound`; nothing when the naive
/// gap vanishes.
inline std::optional<double> filled_gap_percent(double exact_objective, double naive_bound, double bound) {
  const double denom = exact_objective - naive_bound;
  if (std::abs(denom) <= 1e-9 * std::max(1.0, std::abs(exact_objective))) return std::nullopt;
  return 100.0 * (bound - naive_bound) / denom;
}

struct ResultRow {
  int n_x = 0;
  int n_t = 0;
  Method method = Method::Exact;
  std::optional<double> objective;
  std::optional<double> bound;
  std::optional<double> gap;
  std::optional<double> filled_gap;
  std::optional<int> cuts;
  std::optional<int> cuts_to_exceed_naive;
  std::optional<long long> iterations;
  double wall_time = 0.0;
  std::string error;

  static ResultRow at(int nx, int nt, Method m) {
    ResultRow r;
    r.n_x = nx;
    r.n_t = nt;
    r.method = m;
    return r;
  }
};

inline constexpr const char* kCsvHeader =
    "nx,nt,method,objective,bound,gap_pct,filled_gap_pct,cuts,cuts_to_exceed_naive,iterations,wall_time_s,error";

namespace detail {

inline std::string sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string pct2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string format_row(const ResultRow& r) {
  auto num = [](const std::optional<double>& v) { return v ? detail::sig6(*v) : std::string(); };
  auto pct = [](const std::optional<double>& v) { return v ? detail::pct2(*v) : std::string(); };
  auto integer = [](const auto& v) { return v ? std::to_string(*v) : std::string(); };
  std::ostringstream os;
  os << r.n_x << ',' << r.n_t << ',' << method_name(r.method) << ',' << num(r.objective) << ',' << num(r.bound) << ','
     << pct(r.gap) << ',' << pct(r.filled_gap) << ',' << integer(r.cuts) << ',' << integer(r.cuts_to_exceed_naive)
     << ',' << integer(r.iterations) << ',' << detail::sig6(r.wall_time) << ',' << detail::csv_escape(r.error);
  return os.str();
}

struct CellOutcome {
  std::vector<ResultRow> rows;         // fine-grid values
  std::vector<ResultRow> coarse_rows;  // same runs, coarse values
  std::vector<std::string> log;        // convergence records
  std::vector<std::string> failures;   // violated invariants
};

struct BenchOutcome {
  std::vector<ResultRow> rows;
  std::vector<ResultRow> coarse_rows;
  std::vector<std::string> log;
  std::vector<std::string> failures;
};

inline constexpr const char* kLogHeader = "nx,nt,method,iteration,cuts,bound,measure";

namespace detail {

/// Without a binding budget, naive and tailored both reduce to the box and
/// there is no gap to fill.
inline void fill_gaps(std::vector<ResultRow>& rows, bool vacuous_budget = false) {
  std::optional<double> exact, naive;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    if (r.method == Method::Exact) exact = r.objective;
    if (r.method == Method::Naive) naive = r.bound;
  }
  for (auto& r : rows) {
    if (r.method == Method::Exact || !r.bound || !exact) continue;
    r.gap = gap_percent(*exact, *r.bound);
    if ((r.method == Method::Tailored || r.method == Method::FrankWolfe) && naive && !vacuous_budget)
      r.filled_gap = filled_gap_percent(*exact, *naive, *r.bound);
  }
}

}  // namespace detail

/// One grid cell: every requested method on the (n_x, n_t) discretization,
/// values re-evaluated on `fine`.
inline CellOutcome run_cell(const BenchConfig& cfg, std::shared_ptr<const HeatControlProblem> problem,
                            const Instance& fine, int n_x, int n_t) {
  CellOutcome out;
  const Instance inst = Instance::discretize(problem, n_x, n_t);
  const ReducedQuadratic rq = assemble_reduced_quadratic(inst);
  const int factor = cfg.n_t_fine / n_t;
  auto fine_value = [&](const ControlMatrix& u) { return fine.objective(prolong_control(u, factor)); };
  auto log = [&](Method m, const IterationRecord& rec) {
    std::ostringstream os;
    os << n_x << ',' << n_t << ',' << method_name(m) << ',' << rec.iteration << ',' << rec.cuts << ','
       << detail::sig6(rec.bound) << ',' << detail::sig6(rec.violation);
    out.log.push_back(os.str());
  };
  const auto* bounded = std::get_if<BoundedSwitchings>(&inst.constraint());

  QpOptions qp_opt;
  qp_opt.tolerance = cfg.qp_tolerance;
  std::optional<double> naive_coarse, exact_coarse;

  for (Method m : {Method::Exact, Method::Naive, Method::Tailored, Method::FrankWolfe}) {
    if (!cfg.wants(m)) continue;
    ResultRow row = ResultRow::at(n_x, n_t, m);
    ResultRow coarse = ResultRow::at(n_x, n_t, m);
    try {
      if (m == Method::Exact) {
        const ExactResult r = solve_exact(rq, inst.constraint(), inst.grid(), cfg.enumeration_cap);
        if (!r.complete) row.error = "node limit reached";
        coarse.objective = r.value;
        row.objective = fine_value(r.pattern.to_control());
        row.iterations = coarse.iterations = static_cast<long long>(r.nodes);
        row.wall_time = r.wall_time;
        exact_coarse = r.value;
      } else {
        BoundReport rep;
        if (m == Method::FrankWolfe) {
          FrankWolfeOptions fo;
          fo.tolerance = cfg.fw_tolerance;
          fo.max_iterations = cfg.fw_max_iterations;
          fo.away_steps = cfg.fw_away_steps;
          rep = bounded ? frank_wolfe_bound(rq, *bounded, fo)
                        : frank_wolfe_dwell(rq, std::get<DwellTime>(inst.constraint()), inst.grid(), fo);
          if (!rep.converged) row.error = "FW iteration limit reached";
        } else {
          if (!bounded) throw InvalidArgument(std::string(method_name(m)) + " relaxation needs bounded switchings");
          if (m == Method::Naive) {
            rep = naive_relaxation(rq, *bounded, qp_opt);
            naive_coarse = rep.lower_bound;
          } else {
            TailoredOptions to;
            to.relative_change = cfg.cut_relative_change;
            to.stall_iterations = cfg.cut_stall_iterations;
            to.qp = qp_opt;
            rep = tailored_relaxation(rq, *bounded, naive_coarse, to);
            row.cuts = coarse.cuts = rep.cuts_added;
            row.cuts_to_exceed_naive = coarse.cuts_to_exceed_naive = rep.cuts_to_exceed_naive;
            for (const auto& rec : rep.log) log(m, rec);
          }
        }
        if (m == Method::FrankWolfe)
          for (const auto& rec : rep.log) log(m, rec);
        coarse.bound = rep.lower_bound;
        coarse.objective = rep.incumbent_value;
        row.bound = fine_value(rep.relaxed_solution);
        if (rep.incumbent) row.objective = fine_value(rep.incumbent->to_control());
        row.iterations = coarse.iterations = rep.iterations;
        row.wall_time = rep.wall_time;
        if (rep.incumbent_value && *rep.incumbent_value < rep.lower_bound - 1e-8)
          out.failures.push_back(std::string(method_name(m)) + ": incumbent below bound");
        if (exact_coarse && rep.lower_bound > *exact_coarse + 1e-6)
          out.failures.push_back(std::string(method_name(m)) + ": bound above exact optimum");
        if (m == Method::Tailored && naive_coarse && rep.lower_bound < *naive_coarse - 1e-6)
          out.failures.push_back("tailored bound below naive bound");
      }
    } catch (const std::exception& e) {
      row.error = coarse.error = e.what();
    }
    coarse.wall_time = row.wall_time;
    out.rows.push_back(row);
    out.coarse_rows.push_back(coarse);
  }
  const bool vacuous =
      bounded && bounded->sigma_max >= bounded->switches * (bounded->leading_zero ? n_t : n_t - 1);
  detail::fill_gaps(out.rows, vacuous);
  detail::fill_gaps(out.coarse_rows, vacuous);
  for (const auto& r : out.rows)
    if (r.filled_gap && (*r.filled_gap < 0.0 || *r.filled_gap > 100.0))
      out.failures.push_back(std::string(method_name(r.method)) + ": filled gap outside [0, 100]");
  for (auto& f : out.failures) f = "nx=" + std::to_string(n_x) + " nt=" + std::to_string(n_t) + ": " + f;
  return out;
}

/// All grid cells, in parallel, collected in (n_x, n_t, method) order.
inline BenchOutcome run_benchmark(const BenchConfig& cfg) {
  validate(cfg);
  const auto problem = build_reference_problem(cfg);
  const Instance fine = Instance::discretize(problem, cfg.n_x_fine, cfg.n_t_fine);
  std::vector<std::pair<int, int>> cells;
  for (int nx : cfg.n_x)
    for (int nt : cfg.n_t) cells.emplace_back(nx, nt);
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

  std::vector<CellOutcome> results(cells.size());
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      std::size_t k;
      {
        std::lock_guard lock(mu);
        if (next >= cells.size()) return;
        k = next++;
      }
      try {
        results[k] = run_cell(cfg, problem, fine, cells[k].first, cells[k].second);
      } catch (const std::exception& e) {
        CellOutcome failed;
        for (Method m : cfg.methods) {
          ResultRow r = ResultRow::at(cells[k].first, cells[k].second, m);
          r.error = e.what();
          failed.rows.push_back(r);
          failed.coarse_rows.push_back(r);
        }
        results[k] = std::move(failed);
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(worker_count(), cells.size());
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  BenchOutcome out;
  for (auto& r : results) {
    out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    out.coarse_rows.insert(out.coarse_rows.end(), r.coarse_rows.begin(), r.coarse_rows.end());
    out.log.insert(out.log.end(), r.log.begin(), r.log.end());
    out.failures.insert(out.failures.end(), r.failures.begin(), r.failures.end());
  }
  return out;
}

inline void write_rows(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
  f << kCsvHeader << '\n';
  for (const auto& r : rows) f << format_row(r) << '\n';
}

inline void write_log(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
  f << kLogHeader << '\n';
  for (const auto& l : lines) f << l << '\n';
}

/// Reads one value in [0, 1] per line; blank lines are skipped.
inline std::vector<double> read_point_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::istringstream is(line);
    double v;
    std::string rest;
    if (!(is >> v) || (is >> rest) || !(v >= 0.0 && v <= 1.0))
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected one number in [0, 1]");
    values.push_back(v);
  }
  if (values.empty()) throw InvalidArgument(path + ": no values");
  return values;
}

/// Most violated alternating inequality for the point, described in words.
inline std::string separate_debug(const BenchConfig& cfg, const std::vector<double>& point) {
  if (cfg.dwell) throw InvalidArgument("separate: needs a bounded-switching constraint");
  BoundedSwitchings c = BoundedSwitchings::full_cube(1, cfg.sigma_max, cfg.leading_zero);
  const ControlMatrix v = Eigen::Map<const Eigen::RowVectorXd>(point.data(), static_cast<Eigen::Index>(point.size()));
  const auto cut = separate_alternating(v, c);
  if (!cut) return "feasible for all known cuts";
  std::ostringstream os;
  os << "cut: " << cut->describe() << " violation " << detail::sig6(cut->violation(v));
  return os.str();
}

}  // namespace switchhull
