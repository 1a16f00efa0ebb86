#pragma once

// Dense primal active-set method for convex QPs
//   min 1/2 x^T H x + g^T x + c   s.t.  a_r^T x <= b_r
// with H positive semidefinite. Zero-curvature directions of the reduced
// Hessian are followed as rays until a constraint blocks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "switchhull/errors.hpp"

namespace switchhull {

struct LinearRow {
  std::vector<std::pair<int, double>> coefficients;  // (variable, value)
  double rhs = 0.0;

  double lhs(const Eigen::VectorXd& x) const {
    double s = 0.0;
    for (const auto& [k, a] : coefficients) s += a * x[k];
    return s;
  }
};

struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  std::vector<LinearRow> rows;

  int variables() const { return static_cast<int>(linear.size()); }
  double value(const Eigen::VectorXd& x) const { return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant; }

  /// Adds lo <= x_k <= hi for every variable in [first, first + count).
  void add_box(int first, int count, double lo, double hi) {
    for (int k = first; k < first + count; ++k) {
      rows.push_back({{{k, 1.0}}, hi});
      rows.push_back({{{k, -1.0}}, -lo});
    }
  }
};

struct QpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd multipliers;  // one per row, >= 0
  double kkt_residual = 0.0;
  int iterations = 0;
  std::vector<int> active;  // working set at the solution
};

struct QpOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
};

/// Max-norm KKT residual: stationarity, primal and dual feasibility,
/// complementarity.
inline double kkt_residual(const QpProblem& qp, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda) {
  Eigen::VectorXd stat = qp.hessian * x + qp.linear;
  double res = 0.0;
  for (std::size_t r = 0; r < qp.rows.size(); ++r) {
    for (const auto& [k, a] : qp.rows[r].coefficients) stat[k] += lambda[r] * a;
    const double slack = qp.rows[r].lhs(x) - qp.rows[r].rhs;
    res = std::max({res, slack, -lambda[r], std::abs(lambda[r] * slack)});
  }
  return std::max(res, stat.lpNorm<Eigen::Infinity>());
}

namespace detail {

inline Eigen::VectorXd dense_row(const LinearRow& row, int d) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
  for (const auto& [k, v] : row.coefficients) a[k] += v;
  return a;
}

class ActiveSetSolver {
 public:
  ActiveSetSolver(const QpProblem& qp, const QpOptions& opt) : qp_(qp), opt_(opt), d_(qp.variables()) {
    dense_.reserve(qp.rows.size());
    for (const auto& row : qp.rows) dense_.push_back(dense_row(row, d_));
  }

  QpResult run(Eigen::VectorXd x) {
    std::vector<int> work = initial_working_set(x);
    const double feas_tol = 1e-10;
    Eigen::VectorXd best_lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dense_.size()));
    double best_res = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt_.max_iterations; ++it) {
      const Eigen::VectorXd grad = qp_.hessian * x + qp_.linear;
      const Basis basis = factor(work);
      const Eigen::VectorXd p = step_direction(basis, grad);
      const bool ray = last_was_ray_;
      if (p.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
        Eigen::VectorXd lambda = multipliers(basis, work, grad);
        int drop = -1;
        double most_negative = 0.0;
        for (std::size_t w = 0; w < work.size(); ++w)
          if (lambda[work[w]] < most_negative) {
            most_negative = lambda[work[w]];
            drop = static_cast<int>(w);
          }
        const double res = kkt_residual(qp_, x, lambda.cwiseMax(0.0));
        if (res < best_res) {
          best_res = res;
          best_lambda = lambda;
        }
        if (drop < 0 || most_negative > -0.1 * opt_.tolerance) {
          lambda = lambda.cwiseMax(0.0);
          QpResult out{x, qp_.value(x), lambda, kkt_residual(qp_, x, lambda), it + 1, work};
          if (out.kkt_residual > opt_.tolerance) polish(out);
          return out;
        }
        work.erase(work.begin() + drop);
        continue;
      }
      // Ratio test over the inactive rows.
      double step = ray ? std::numeric_limits<double>::infinity() : 1.0;
      int blocking = -1;
      for (std::size_t r = 0; r < dense_.size(); ++r) {
        if (std::find(work.begin(), work.end(), static_cast<int>(r)) != work.end()) continue;
        const double ap = dense_[r].dot(p);
        if (ap <= 1e-14 * p.lpNorm<Eigen::Infinity>() * std::max(1.0, dense_[r].lpNorm<Eigen::Infinity>())) continue;
        const double slack = std::max(qp_.rows[r].rhs - dense_[r].dot(x), 0.0);
        const double t = slack / ap;
        if (t < step - feas_tol * 1e-3) {
          step = t;
          blocking = static_cast<int>(r);
        }
      }
      if (!std::isfinite(step)) throw SolverError("solve_qp: objective unbounded below on the feasible set", 0.0);
      x += step * p;
      if (blocking >= 0) work.push_back(blocking);
    }
    throw SolverError("solve_qp: iteration limit reached", best_res);
  }

 private:
  struct Basis {
    Eigen::MatrixXd range;     // d x w, orthonormal basis of span(A_W^T)
    Eigen::MatrixXd upper;     // w x w, R factor of A_W^T
    Eigen::MatrixXd null;      // d x (d - w)
  };

  std::vector<int> initial_working_set(const Eigen::VectorXd& x) {
    std::vector<int> work;
    for (std::size_t r = 0; r < dense_.size(); ++r) {
      const double slack = qp_.rows[r].rhs - dense_[r].dot(x);
      if (slack < -1e-9 * std::max(1.0, std::abs(qp_.rows[r].rhs)))
        throw InvalidArgument("solve_qp: start point is infeasible");
      if (std::abs(slack) > 1e-12 * std::max(1.0, std::abs(qp_.rows[r].rhs))) continue;
      if (static_cast<int>(work.size()) == d_) break;
      std::vector<int> trial = work;
      trial.push_back(static_cast<int>(r));
      if (independent(trial)) work = std::move(trial);
    }
    return work;
  }

  bool independent(const std::vector<int>& work) const {
    Eigen::MatrixXd a(d_, static_cast<Eigen::Index>(work.size()));
    for (std::size_t w = 0; w < work.size(); ++w) a.col(static_cast<Eigen::Index>(w)) = dense_[work[w]];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    return qr.rank() == static_cast<Eigen::Index>(work.size());
  }

  Basis factor(const std::vector<int>& work) const {
    const auto w = static_cast<Eigen::Index>(work.size());
    Basis b;
    if (w == 0) {
      b.range.resize(d_, 0);
      b.upper.resize(0, 0);
      b.null = Eigen::MatrixXd::Identity(d_, d_);
      return b;
    }
    Eigen::MatrixXd a(d_, w);
    for (Eigen::Index k = 0; k < w; ++k) a.col(k) = dense_[work[k]];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d_, d_);
    b.range = q.leftCols(w);
    b.null = q.rightCols(d_ - w);
    b.upper = qr.matrixQR().topRows(w).triangularView<Eigen::Upper>();
    return b;
  }

  Eigen::VectorXd step_direction(const Basis& b, const Eigen::VectorXd& grad) {
    last_was_ray_ = false;
    const Eigen::Index nz = b.null.cols();
    if (nz == 0) return Eigen::VectorXd::Zero(d_);
    const Eigen::VectorXd r = b.null.transpose() * grad;
    const Eigen::MatrixXd reduced = b.null.transpose() * qp_.hessian * b.null;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
    const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(nz);
    Eigen::VectorXd newton = Eigen::VectorXd::Zero(nz);
    for (Eigen::Index k = 0; k < nz; ++k) {
      const Eigen::VectorXd v = es.eigenvectors().col(k);
      const double c = v.dot(r);
      if (es.eigenvalues()[k] > 1e-11 * top)
        newton -= (c / es.eigenvalues()[k]) * v;
      else
        flat -= c * v;
    }
    if (flat.lpNorm<Eigen::Infinity>() > 1e-12 * std::max(1.0, grad.lpNorm<Eigen::Infinity>())) {
      last_was_ray_ = true;
      return b.null * flat;
    }
    return b.null * newton;
  }

  Eigen::VectorXd multipliers(const Basis& b, const std::vector<int>& work, const Eigen::VectorXd& grad) const {
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dense_.size()));
    if (work.empty()) return lambda;
    // A_W^T lambda_W = -grad, A_W^T = range * upper.
    const Eigen::VectorXd rhs = -(b.range.transpose() * grad);
    const Eigen::VectorXd lw = b.upper.triangularView<Eigen::Upper>().solve(rhs);
    for (std::size_t w = 0; w < work.size(); ++w) lambda[work[w]] = lw[static_cast<Eigen::Index>(w)];
    return lambda;
  }

  // One least-squares refinement of the multipliers on the final working set.
  void polish(QpResult& out) const {
    const Basis b = factor(out.active);
    const Eigen::VectorXd grad = qp_.hessian * out.x + qp_.linear;
    Eigen::VectorXd lambda = multipliers(b, out.active, grad).cwiseMax(0.0);
    const double res = kkt_residual(qp_, out.x, lambda);
    if (res < out.kkt_residual) {
      out.multipliers = lambda;
      out.kkt_residual = res;
    }
  }

  const QpProblem& qp_;
  QpOptions opt_;
  int d_;
  std::vector<Eigen::VectorXd> dense_;
  bool last_was_ray_ = false;
};

/// Phase one: a feasible point of the rows, or InvalidArgument if none exists.
inline Eigen::VectorXd find_feasible_point(const QpProblem& qp, const QpOptions& opt) {
  const int d = qp.variables();
  // min s  s.t.  a^T x - s <= b,  -s <= 0, started from x = 0.
  QpProblem lp;
  lp.hessian = Eigen::MatrixXd::Zero(d + 1, d + 1);
  lp.linear = Eigen::VectorXd::Zero(d + 1);
  lp.linear[d] = 1.0;
  double s0 = 0.0;
  for (const auto& row : qp.rows) {
    LinearRow r = row;
    r.coefficients.emplace_back(d, -1.0);
    lp.rows.push_back(std::move(r));
    s0 = std::max(s0, -row.rhs);
  }
  lp.rows.push_back({{{d, -1.0}}, 0.0});
  Eigen::VectorXd start = Eigen::VectorXd::Zero(d + 1);
  start[d] = s0;
  const QpResult res = ActiveSetSolver(lp, opt).run(start);
  if (res.x[d] > 1e-9) throw InvalidArgument("solve_qp: constraints are infeasible");
  Eigen::VectorXd x = res.x.head(d);
  return x;
}

}  // namespace detail

/// Solves the QP from `start` (must be feasible) or from a phase-one point.
inline QpResult solve_qp(const QpProblem& qp, const std::optional<Eigen::VectorXd>& start = std::nullopt,
                         const QpOptions& opt = {}) {
  const int d = qp.variables();
  if (qp.hessian.rows() != d || qp.hessian.cols() != d) throw InvalidArgument("solve_qp: hessian size mismatch");
  for (const auto& row : qp.rows)
    for (const auto& [k, a] : row.coefficients)
      if (k < 0 || k >= d) throw InvalidArgument("solve_qp: row refers to a missing variable");
  Eigen::VectorXd x0 = start ? *start : detail::find_feasible_point(qp, opt);
  if (x0.size() != d) throw InvalidArgument("solve_qp: start point size mismatch");
  QpResult out = detail::ActiveSetSolver(qp, opt).run(std::move(x0));
  if (out.kkt_residual > opt.tolerance)
    throw SolverError("solve_qp: KKT residual above tolerance", out.kkt_residual);
  return out;
}

/// Largest theta in [0, 1] with from + theta (to - from) feasible, assuming
/// `from` is feasible.
inline double feasible_fraction(const QpProblem& qp, const Eigen::VectorXd& from, const Eigen::VectorXd& to) {
  double theta = 1.0;
  for (const auto& row : qp.rows) {
    const double a0 = row.lhs(from);
    const double a1 = row.lhs(to);
    if (a1 > row.rhs && a1 > a0) theta = std::min(theta, std::max(0.0, (row.rhs - a0) / (a1 - a0)));
  }
  return theta;
}

}  // namespace switchhull
