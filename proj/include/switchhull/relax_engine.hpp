#pragma once

// Lower bounds for the switching problem: the box + linearized BV
// relaxation, the cutting-plane loop over alternating inequalities, and
// Frank-Wolfe over the convex hull of feasible patterns.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "switchhull/errors.hpp"
#include "switchhull/fem_heat.hpp"
#include "switchhull/qp_active_set.hpp"
#include "switchhull/switch_poly.hpp"

namespace switchhull {

enum class Method { Exact, Naive, Tailored, FrankWolfe };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::Naive: return "naive";
    case Method::Tailored: return "tailored";
    case Method::FrankWolfe: return "fw";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  for (Method m : {Method::Exact, Method::Naive, Method::Tailored, Method::FrankWolfe})
    if (method_name(m) == s) return m;
  return std::nullopt;
}

struct IterationRecord {
  int iteration = 0;
  double bound = 0.0;
  int cuts = 0;
  double violation = 0.0;  // of the cut added in this iteration, 0 if none
};

struct BoundReport {
  Method method = Method::Naive;
  double lower_bound = 0.0;
  std::optional<double> incumbent_value;
  std::optional<BinaryPattern> incumbent;
  ControlMatrix relaxed_solution;
  int cuts_added = 0;
  std::optional<int> cuts_to_exceed_naive;
  int iterations = 0;
  double wall_time = 0.0;
  bool converged = true;
  std::string stop_reason;
  std::vector<IterationRecord> log;
};

/// Reduced quadratic over the controls plus auxiliary variables appended
/// after them, with [0,1] bounds on the controls and extra linear rows.
struct QuadraticModel {
  ReducedQuadratic objective;
  int auxiliary = 0;
  std::vector<LinearRow> rows;

  int controls() const { return objective.switches * objective.intervals; }
  int variables() const { return controls() + auxiliary; }

  void add_cut(const AlternatingCut& cut) {
    rows.push_back({cut.coefficients(objective.switches), cut.rhs_on_v()});
  }

  QpProblem to_qp() const {
    QpProblem qp;
    const int d = variables();
    qp.hessian = Eigen::MatrixXd::Zero(d, d);
    qp.hessian.topLeftCorner(controls(), controls()) = objective.hessian;
    qp.linear = Eigen::VectorXd::Zero(d);
    qp.linear.head(controls()) = objective.linear;
    qp.constant = objective.constant;
    qp.add_box(0, controls(), 0.0, 1.0);
    qp.rows.insert(qp.rows.end(), rows.begin(), rows.end());
    return qp;
  }
};

/// Box-only model.
inline QuadraticModel box_model(const ReducedQuadratic& rq) { return {rq, 0, {}}; }

/// Box plus z_{j,i} >= |v_{j,i} - v_{j,i-1}| and one total budget row
/// sum_j v_{j,0} (if leading zero) + sum z <= sigma_max.
inline QuadraticModel naive_model(const ReducedQuadratic& rq, const BoundedSwitchings& c) {
  const int n = rq.switches, m = rq.intervals;
  QuadraticModel model{rq, n * (m - 1), {}};
  LinearRow budget;
  budget.rhs = c.sigma_max;
  if (c.leading_zero)
    for (int j = 0; j < n; ++j) budget.coefficients.emplace_back(j, 1.0);
  for (int i = 1; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const int cur = j + n * i, prev = j + n * (i - 1), z = n * m + j + n * (i - 1);
      model.rows.push_back({{{cur, 1.0}, {prev, -1.0}, {z, -1.0}}, 0.0});
      model.rows.push_back({{{cur, -1.0}, {prev, 1.0}, {z, -1.0}}, 0.0});
      budget.coefficients.emplace_back(z, 1.0);
    }
  model.rows.push_back(std::move(budget));
  return model;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline void require_full_cube(const BoundedSwitchings& c, const ReducedQuadratic& rq, const char* who) {
  c.validate();
  if (!c.is_full_cube()) throw InvalidArgument(std::string(who) + ": only U = {0,1}^n is supported");
  if (c.switches != rq.switches) throw InvalidArgument(std::string(who) + ": switch count mismatch");
}

inline void round_incumbent(BoundReport& r, const ReducedQuadratic& rq, const BoundedSwitchings& c) {
  const ControlMatrix clipped = r.relaxed_solution.cwiseMax(0.0).cwiseMin(1.0);
  BinaryPattern p = nearest_feasible(clipped, c);
  r.incumbent_value = rq.value(p.to_control());
  r.incumbent = std::move(p);
}

}  // namespace detail

inline BoundReport naive_relaxation(const ReducedQuadratic& rq, const BoundedSwitchings& c,
                                    const QpOptions& qp_opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::require_full_cube(c, rq, "naive_relaxation");
  const QuadraticModel model = naive_model(rq, c);
  const QpResult res = solve_qp(model.to_qp(), Eigen::VectorXd::Zero(model.variables()), qp_opt);
  BoundReport r;
  r.method = Method::Naive;
  r.lower_bound = res.objective;
  r.relaxed_solution = rq.unflatten(res.x.head(model.controls()));
  r.iterations = res.iterations;
  r.stop_reason = "optimal";
  r.log.push_back({0, r.lower_bound, 0, 0.0});
  detail::round_incumbent(r, rq, c);
  r.wall_time = detail::seconds_since(start);
  return r;
}

struct TailoredOptions {
  double relative_change = 1e-3;  // stop when the bound moves less than this ...
  int stall_iterations = 3;       // ... this many times in a row
  int max_cuts = 100000;
  QpOptions qp;
};

/// Cutting-plane loop: box QP plus accumulated most violated alternating
/// inequalities.
inline BoundReport tailored_relaxation(const ReducedQuadratic& rq, const BoundedSwitchings& c,
                                       std::optional<double> naive_bound = std::nullopt,
                                       const TailoredOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::require_full_cube(c, rq, "tailored_relaxation");
  QuadraticModel model = box_model(rq);
  QpProblem qp = model.to_qp();
  QpResult res = solve_qp(qp, Eigen::VectorXd::Zero(model.variables()), opt.qp);

  BoundReport r;
  r.method = Method::Tailored;
  r.lower_bound = res.objective;
  r.iterations = 1;
  r.log.push_back({0, res.objective, 0, 0.0});
  if (naive_bound && res.objective >= *naive_bound) r.cuts_to_exceed_naive = 0;

  int small_steps = 0;
  while (true) {
    const auto cut = separate_alternating(rq.unflatten(res.x), c);
    if (!cut) {
      r.stop_reason = "no violated cut";
      break;
    }
    if (r.cuts_added >= opt.max_cuts) {
      r.stop_reason = "cut limit";
      r.converged = false;
      break;
    }
    const double violation = cut->violation(rq.unflatten(res.x));
    model.add_cut(*cut);
    qp.rows.push_back(model.rows.back());
    ++r.cuts_added;

    // Warm start: pull the previous optimum towards the origin until it is feasible.
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(model.variables());
    const double theta = feasible_fraction(qp, origin, res.x);
    const double previous = res.objective;
    res = solve_qp(qp, Eigen::VectorXd(theta * res.x), opt.qp);
    ++r.iterations;

    const double bound = res.objective;
    if (bound < previous - 1e-8 * std::max(1.0, std::abs(previous)))
      throw InternalError("tailored_relaxation: bound decreased after adding a cut");
    r.lower_bound = std::max(r.lower_bound, bound);
    r.log.push_back({r.iterations - 1, bound, r.cuts_added, violation});
    if (naive_bound && !r.cuts_to_exceed_naive && bound >= *naive_bound) r.cuts_to_exceed_naive = r.cuts_added;

    const double change = (bound - previous) / std::max(std::abs(bound), 1e-12);
    small_steps = change < opt.relative_change ? small_steps + 1 : 0;
    if (small_steps >= opt.stall_iterations) {
      r.stop_reason = "relative change below threshold";
      break;
    }
  }
  r.relaxed_solution = rq.unflatten(res.x);
  detail::round_incumbent(r, rq, c);
  r.wall_time = detail::seconds_since(start);
  return r;
}

struct FrankWolfeOptions {
  double tolerance = 1e-4;  // gap <= tolerance * (1 + |f|)
  int max_iterations = 5000;
  bool away_steps = true;
};

/// Linear minimization oracle over the flattened controls: returns a vertex
/// minimizing grad^T p.
using LinearOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd& grad)>;

/// Conditional gradient with exact line search. The certified bound is
/// max_k f(u_k) + grad_k^T (p_k - u_k). With `away_steps` the iterate is kept
/// as a convex combination of visited vertices and mass can be moved away
/// from the worst one.
inline BoundReport frank_wolfe(const ReducedQuadratic& rq, const LinearOracle& lmo, const FrankWolfeOptions& opt = {},
                               const std::optional<Eigen::VectorXd>& start_vertex = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index d = rq.linear.size();
  BoundReport r;
  r.method = Method::FrankWolfe;

  std::vector<Eigen::VectorXd> verts;
  std::vector<double> weights;
  auto vertex_index = [&](const Eigen::VectorXd& p) {
    for (std::size_t k = 0; k < verts.size(); ++k)
      if (verts[k] == p) return static_cast<int>(k);
    verts.push_back(p);
    weights.push_back(0.0);
    return static_cast<int>(verts.size()) - 1;
  };

  Eigen::VectorXd x = start_vertex ? *start_vertex : lmo(rq.gradient(Eigen::VectorXd::Zero(d)));
  vertex_index(x);
  weights[0] = 1.0;

  double bound = -std::numeric_limits<double>::infinity();
  r.converged = false;
  r.stop_reason = "iteration limit";
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::VectorXd grad = rq.gradient(x);
    const double f = rq.value(x);
    const Eigen::VectorXd p = lmo(grad);
    const double gap = grad.dot(x - p);
    bound = std::max(bound, f - gap);
    r.iterations = it + 1;
    r.log.push_back({it, bound, 0, gap});
    if (gap <= opt.tolerance * (1.0 + std::abs(f))) {
      r.converged = true;
      r.stop_reason = "gap below tolerance";
      break;
    }
    Eigen::VectorXd dir = p - x;
    double max_step = 1.0;
    int away = -1;
    if (opt.away_steps) {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < verts.size(); ++k)
        if (weights[k] > 0.0) {
          const double s = grad.dot(verts[k]);
          if (s > worst) {
            worst = s;
            away = static_cast<int>(k);
          }
        }
      const double away_gap = worst - grad.dot(x);
      if (away >= 0 && away_gap > gap && weights[away] < 1.0) {
        dir = x - verts[away];
        max_step = weights[away] / (1.0 - weights[away]);
      } else {
        away = -1;
      }
    }
    const double slope = grad.dot(dir);
    const double curv = dir.dot(rq.hessian * dir);
    double step = curv > 0.0 ? std::min(-slope / curv, max_step) : max_step;
    step = std::max(step, 0.0);
    x += step * dir;
    if (opt.away_steps) {
      if (away < 0) {
        const int k = vertex_index(p);
        for (double& w : weights) w *= (1.0 - step);
        weights[k] += step;
      } else {
        for (double& w : weights) w *= (1.0 + step);
        weights[away] -= step;
        if (step >= max_step) weights[away] = 0.0;
      }
    }
  }
  r.lower_bound = bound;
  r.relaxed_solution = rq.unflatten(x);
  // Best visited vertex as incumbent value.
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : verts) best = std::min(best, rq.value(v));
  if (std::isfinite(best)) r.incumbent_value = best;
  r.wall_time = detail::seconds_since(start);
  return r;
}

/// Frank-Wolfe over conv of bounded-switching patterns, optionally with a
/// fixed prefix of columns.
inline BoundReport frank_wolfe_bound(const ReducedQuadratic& rq, const BoundedSwitchings& c,
                                     const FrankWolfeOptions& opt = {},
                                     std::span<const std::uint32_t> fixed_prefix = {}) {
  c.validate();
  if (c.switches != rq.switches) throw InvalidArgument("frank_wolfe_bound: switch count mismatch");
  std::optional<BinaryPattern> best_pattern;
  double best_value = std::numeric_limits<double>::infinity();
  auto lmo = [&](const Eigen::VectorXd& grad) {
    const LmoResult res = lmo_bounded(rq.unflatten(grad), c, fixed_prefix);
    const ControlMatrix v = res.pattern.to_control();
    const double value = rq.value(v);
    if (value < best_value || (value == best_value && best_pattern && res.pattern < *best_pattern)) {
      best_value = value;
      best_pattern = res.pattern;
    }
    return Eigen::VectorXd(ReducedQuadratic::flatten(v));
  };
  BoundReport r = frank_wolfe(rq, lmo, opt);
  r.incumbent = best_pattern;
  r.incumbent_value = best_value;
  return r;
}

/// Frank-Wolfe over the projected dwell-time polytope (single switch).
inline BoundReport frank_wolfe_dwell(const ReducedQuadratic& rq, const DwellTime& c, const TimeGrid& grid,
                                     const FrankWolfeOptions& opt = {}) {
  if (rq.switches != 1) throw InvalidArgument("frank_wolfe_dwell: single switch only");
  auto lmo = [&](const Eigen::VectorXd& grad) { return lmo_dwell(grad, c.min_dwell, grid).projection; };
  BoundReport r = frank_wolfe(rq, lmo, opt);
  r.incumbent_value.reset();
  return r;
}

// Instance-level entry points.

inline BoundReport naive_relaxation(const Instance& inst) {
  return naive_relaxation(assemble_reduced_quadratic(inst), std::get<BoundedSwitchings>(inst.constraint()));
}

inline BoundReport tailored_relaxation(const Instance& inst, std::optional<double> naive_bound = std::nullopt) {
  return tailored_relaxation(assemble_reduced_quadratic(inst), std::get<BoundedSwitchings>(inst.constraint()),
                             naive_bound);
}

inline BoundReport frank_wolfe_bound(const Instance& inst, const FrankWolfeOptions& opt = {}) {
  const auto rq = assemble_reduced_quadratic(inst);
  if (const auto* d = std::get_if<DwellTime>(&inst.constraint())) return frank_wolfe_dwell(rq, *d, inst.grid(), opt);
  return frank_wolfe_bound(rq, std::get<BoundedSwitchings>(inst.constraint()), opt);
}

}  // namespace switchhull
