#pragma once

// P1 finite elements on the unit square with homogeneous Dirichlet boundary,
// Crank-Nicolson in time, piecewise-constant controls. Everything downstream
// (relaxations, exact solvers) works with the reduced objective
//
//   f(u) = 1/2 ||y(u) - y_d||^2_{L2(Q)} + alpha/2 ||u - 1/2||^2_{L2(0,T)}
//
// where y(u) is the discrete state, piecewise linear in time.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "switchhull/errors.hpp"
#include "switchhull/switch_poly.hpp"
#include "switchhull/time_grid.hpp"

namespace switchhull {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(double, double)>;
using SpaceTimeField = std::function<double(double, double, double)>;  // (t, x1, x2)

/// Node values at every time node, interior nodes only: column k is y(t_k).
using Trajectory = Eigen::MatrixXd;

/// Uniform triangulation of [0,1]^2 with n_x nodes per side; each square cell
/// is split along its lower-left to upper-right diagonal.
class SpaceMesh {
 public:
  explicit SpaceMesh(int nodes_per_side) : n_(nodes_per_side) {
    if (nodes_per_side < 3) throw InvalidArgument("SpaceMesh: need at least 3 nodes per side");
    const int cells = n_ - 1;
    triangles_.reserve(static_cast<std::size_t>(2 * cells * cells));
    for (int iy = 0; iy < cells; ++iy)
      for (int ix = 0; ix < cells; ++ix) {
        const int a = node_id(ix, iy), b = node_id(ix + 1, iy);
        const int c = node_id(ix + 1, iy + 1), d = node_id(ix, iy + 1);
        triangles_.push_back({a, b, c});
        triangles_.push_back({a, c, d});
      }
    interior_of_.assign(static_cast<std::size_t>(n_ * n_), -1);
    for (int iy = 1; iy < n_ - 1; ++iy)
      for (int ix = 1; ix < n_ - 1; ++ix) {
        interior_of_[node_id(ix, iy)] = static_cast<int>(interior_.size());
        interior_.push_back(node_id(ix, iy));
      }
  }

  int nodes_per_side() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / (n_ - 1); }
  int node_count() const noexcept { return n_ * n_; }
  int interior_count() const noexcept { return static_cast<int>(interior_.size()); }

  int node_id(int ix, int iy) const noexcept { return ix + n_ * iy; }
  Eigen::Vector2d node(int id) const noexcept {
    return {(id % n_) * spacing(), (id / n_) * spacing()};
  }

  const std::vector<std::array<int, 3>>& triangles() const noexcept { return triangles_; }
  const std::vector<int>& interior_nodes() const noexcept { return interior_; }
  /// Interior index of a node, -1 on the boundary.
  int interior_index(int id) const noexcept { return interior_of_[id]; }

  Eigen::VectorXd restrict_to_interior(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(interior_count());
    for (int k = 0; k < interior_count(); ++k) out[k] = full[interior_[k]];
    return out;
  }

 private:
  int n_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> interior_;
  std::vector<int> interior_of_;
};

struct FemMatrices {
  SparseMatrix mass;
  SparseMatrix stiffness;
  SparseMatrix mass_interior;
  SparseMatrix stiffness_interior;
};

namespace detail {

inline SparseMatrix restrict_matrix(const SparseMatrix& full, const SpaceMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int col = 0; col < full.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
      const int r = mesh.interior_index(static_cast<int>(it.row()));
      const int c = mesh.interior_index(static_cast<int>(it.col()));
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  SparseMatrix out(mesh.interior_count(), mesh.interior_count());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace detail

/// Mass and stiffness matrices with exact P1 element integrals.
inline FemMatrices assemble_fem(const SpaceMesh& mesh) {
  std::vector<Eigen::Triplet<double>> mass_trips, stiff_trips;
  mass_trips.reserve(mesh.triangles().size() * 9);
  stiff_trips.reserve(mesh.triangles().size() * 9);
  for (const auto& tri : mesh.triangles()) {
    Eigen::Matrix<double, 3, 2> p;
    for (int a = 0; a < 3; ++a) p.row(a) = mesh.node(tri[a]).transpose();
    const Eigen::Vector2d e1 = p.row(1) - p.row(0);
    const Eigen::Vector2d e2 = p.row(2) - p.row(0);
    const double area = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    // Barycentric gradients: grad lambda_a = rot90(opposite edge) / (2 area).
    Eigen::Matrix<double, 3, 2> grad;
    for (int a = 0; a < 3; ++a) {
      const Eigen::Vector2d edge = p.row((a + 2) % 3) - p.row((a + 1) % 3);
      grad.row(a) << -edge.y() / (2.0 * area), edge.x() / (2.0 * area);
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        mass_trips.emplace_back(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
        stiff_trips.emplace_back(tri[a], tri[b], area * grad.row(a).dot(grad.row(b)));
      }
  }
  FemMatrices fm;
  fm.mass.resize(mesh.node_count(), mesh.node_count());
  fm.stiffness.resize(mesh.node_count(), mesh.node_count());
  fm.mass.setFromTriplets(mass_trips.begin(), mass_trips.end());
  fm.stiffness.setFromTriplets(stiff_trips.begin(), stiff_trips.end());
  fm.mass_interior = detail::restrict_matrix(fm.mass, mesh);
  fm.stiffness_interior = detail::restrict_matrix(fm.stiffness, mesh);
  return fm;
}

namespace detail {

/// Values of f at the three edge midpoints of every triangle, in triangle order.
inline Eigen::VectorXd midpoint_samples(const SpaceMesh& mesh, const ScalarField& f) {
  Eigen::VectorXd s(3 * mesh.triangles().size());
  Eigen::Index at = 0;
  for (const auto& tri : mesh.triangles())
    for (int e = 0; e < 3; ++e) {
      const Eigen::Vector2d mid = 0.5 * (mesh.node(tri[e]) + mesh.node(tri[(e + 1) % 3]));
      s[at++] = f(mid.x(), mid.y());
    }
  return s;
}

inline double midpoint_weight(const SpaceMesh& mesh) { return mesh.spacing() * mesh.spacing() / 6.0; }

/// b_i = int f phi_i from midpoint samples.
inline Eigen::VectorXd load_from_samples(const SpaceMesh& mesh, const Eigen::VectorXd& samples) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.node_count());
  const double w = midpoint_weight(mesh);
  Eigen::Index at = 0;
  for (const auto& tri : mesh.triangles())
    for (int e = 0; e < 3; ++e) {
      // phi_a = phi_c = 1/2 at the midpoint, the third basis function vanishes.
      const double contrib = 0.5 * w * samples[at++];
      b[tri[e]] += contrib;
      b[tri[(e + 1) % 3]] += contrib;
    }
  return b;
}

}  // namespace detail

/// b_i = int psi phi_i over all nodes, edge-midpoint rule per triangle.
inline Eigen::VectorXd assemble_load(const SpaceMesh& mesh, const ScalarField& psi) {
  return detail::load_from_samples(mesh, detail::midpoint_samples(mesh, psi));
}

/// Continuous problem data; discretized on demand at any resolution.
struct HeatControlProblem {
  double horizon = 2.0;
  std::vector<ScalarField> forms;  // one per switch
  SpaceTimeField desired;          // empty means zero
  ScalarField initial;             // empty means zero
  double tikhonov = 0.0;
  SwitchingConstraint constraint = BoundedSwitchings::full_cube(1, 2);

  int switches() const { return static_cast<int>(forms.size()); }
};

/// A discretized problem. Immutable after construction; all member functions
/// are const and safe to call concurrently.
class Instance {
 public:
  static Instance discretize(std::shared_ptr<const HeatControlProblem> problem, int nodes_per_side,
                             int intervals) {
    if (!problem) throw InvalidArgument("Instance: null problem");
    if (problem->forms.empty()) throw InvalidArgument("Instance: need at least one form function");
    if (problem->tikhonov < 0.0) throw InvalidArgument("Instance: tikhonov weight must be >= 0");
    if (switch_count(problem->constraint) != problem->switches())
      throw InvalidArgument("Instance: constraint switch count does not match form functions");
    return Instance(std::move(problem), nodes_per_side, intervals);
  }

  const HeatControlProblem& problem() const noexcept { return *problem_; }
  std::shared_ptr<const HeatControlProblem> problem_ptr() const noexcept { return problem_; }
  const SpaceMesh& mesh() const noexcept { return mesh_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const FemMatrices& matrices() const noexcept { return *fem_; }
  int switches() const noexcept { return static_cast<int>(loads_.cols()); }
  int intervals() const noexcept { return grid_.intervals(); }
  int variables() const noexcept { return switches() * intervals(); }
  double tikhonov() const noexcept { return problem_->tikhonov; }
  const SwitchingConstraint& constraint() const noexcept { return problem_->constraint; }

  /// Interior load vectors, one column per switch.
  const Eigen::MatrixXd& loads() const noexcept { return loads_; }
  /// Column k holds int y_d(t_k) phi_i for the interior nodes.
  const Eigen::MatrixXd& desired_load() const noexcept { return desired_load_; }
  const Eigen::VectorXd& initial_state() const noexcept { return y0_; }

  /// Copy whose desired state is the piecewise-linear field with the given
  /// interior node values (interior nodes x (m+1)).
  Instance with_desired_samples(const Eigen::MatrixXd& samples) const {
    if (samples.rows() != desired_load_.rows() || samples.cols() != desired_load_.cols())
      throw InvalidArgument("with_desired_samples: dimension mismatch");
    Instance copy = *this;
    copy.desired_load_ = fem_->mass_interior * samples;
    for (int k = 0; k <= intervals(); ++k) {
      copy.desired_sq_[k] = samples.col(k).dot(copy.desired_load_.col(k));
      if (k < intervals()) copy.desired_cross_[k] = samples.col(k + 1).dot(copy.desired_load_.col(k));
    }
    return copy;
  }

  void check_control(const ControlMatrix& u) const {
    if (u.rows() != switches() || u.cols() != intervals())
      throw InvalidArgument("control has wrong dimensions");
  }

  Trajectory solve_state(const ControlMatrix& u) const {
    check_control(u);
    Trajectory y(mesh_.interior_count(), intervals() + 1);
    y.col(0) = y0_;
    for (int i = 0; i < intervals(); ++i) {
      const Eigen::VectorXd rhs = explicit_part_ * y.col(i) + loads_ * u.col(i);
      y.col(i + 1) = solve(rhs);
    }
    return y;
  }

  /// 1/2 int_Q (y - y_d)^2 for a given trajectory, exact in time for the
  /// piecewise-linear interpolants; y_d enters through midpoint quadrature.
  double tracking_term(const Trajectory& y) const {
    const Eigen::MatrixXd my = fem_->mass_interior * y;
    const double dt = grid_.step();
    auto inner = [&](int a, int b) {
      return y.col(a).dot(my.col(b)) - y.col(a).dot(desired_load_.col(b)) - y.col(b).dot(desired_load_.col(a));
    };
    double sum = 0.0;
    for (int i = 0; i < intervals(); ++i) {
      const double a = inner(i, i) + desired_sq_[i];
      const double ab = inner(i, i + 1) + desired_cross_[i];
      const double b = inner(i + 1, i + 1) + desired_sq_[i + 1];
      sum += dt / 3.0 * (a + ab + b);
    }
    return 0.5 * sum;
  }

  double tikhonov_term(const ControlMatrix& u) const {
    return 0.5 * tikhonov() * grid_.step() * (u.array() - 0.5).square().sum();
  }

  double objective(const ControlMatrix& u) const { return tracking_term(solve_state(u)) + tikhonov_term(u); }

  /// Exact gradient of the discrete objective via the discrete adjoint of the
  /// Crank-Nicolson recursion.
  ControlMatrix reduced_gradient(const ControlMatrix& u) const {
    const Trajectory y = solve_state(u);
    const int m = intervals();
    const double dt = grid_.step();
    const Eigen::MatrixXd me = fem_->mass_interior * y - desired_load_;
    ControlMatrix grad(switches(), m);
    Eigen::VectorXd lambda_next = Eigen::VectorXd::Zero(mesh_.interior_count());
    for (int k = m; k >= 1; --k) {
      // d(tracking)/d y_k
      Eigen::VectorXd r = (dt / 6.0) * me.col(k - 1);
      r += (dt / 6.0) * (k < m ? 4.0 : 2.0) * me.col(k);
      if (k < m) r += (dt / 6.0) * me.col(k + 1);
      if (k < m) r += explicit_part_ * lambda_next;
      const Eigen::VectorXd lambda = solve(r);
      grad.col(k - 1) = loads_.transpose() * lambda;
      lambda_next = lambda;
    }
    grad.array() += tikhonov() * dt * (u.array() - 0.5);
    return grad;
  }

  /// Unit-step responses: column k of response(j) is the state at t_k for the
  /// control that is 1 on the first interval of switch j and 0 elsewhere, with
  /// zero initial state.
  std::vector<Trajectory> unit_responses() const {
    std::vector<Trajectory> out;
    for (int j = 0; j < switches(); ++j) {
      Trajectory y = Trajectory::Zero(mesh_.interior_count(), intervals() + 1);
      y.col(1) = solve(loads_.col(j));
      for (int k = 2; k <= intervals(); ++k) y.col(k) = solve(explicit_part_ * y.col(k - 1));
      out.push_back(std::move(y));
    }
    return out;
  }

 private:
  using Factorization = Eigen::SimplicialLDLT<SparseMatrix>;

  Instance(std::shared_ptr<const HeatControlProblem> problem, int nodes_per_side, int intervals)
      : problem_(std::move(problem)), mesh_(nodes_per_side), grid_(problem_->horizon, intervals) {
    validate(problem_->constraint, grid_);
    fem_ = std::make_shared<const FemMatrices>(assemble_fem(mesh_));
    const int n = problem_->switches();
    const int N = mesh_.interior_count();

    loads_.resize(N, n);
    for (int j = 0; j < n; ++j) loads_.col(j) = mesh_.restrict_to_interior(assemble_load(mesh_, problem_->forms[j]));

    desired_load_ = Eigen::MatrixXd::Zero(N, intervals + 1);
    desired_sq_ = Eigen::VectorXd::Zero(intervals + 1);
    desired_cross_ = Eigen::VectorXd::Zero(intervals);
    if (problem_->desired) {
      const double w = detail::midpoint_weight(mesh_);
      Eigen::VectorXd prev;
      for (int t = 0; t <= intervals; ++t) {
        const double time = grid_.node(t);
        Eigen::VectorXd s = detail::midpoint_samples(
            mesh_, [&](double x1, double x2) { return problem_->desired(time, x1, x2); });
        desired_load_.col(t) = mesh_.restrict_to_interior(detail::load_from_samples(mesh_, s));
        desired_sq_[t] = w * s.squaredNorm();
        if (t > 0) desired_cross_[t - 1] = w * s.dot(prev);
        prev = std::move(s);
      }
    }
    y0_ = Eigen::VectorXd::Zero(N);
    if (problem_->initial)
      for (int k = 0; k < N; ++k) {
        const Eigen::Vector2d x = mesh_.node(mesh_.interior_nodes()[k]);
        y0_[k] = problem_->initial(x.x(), x.y());
      }

    const double dt = grid_.step();
    implicit_part_ = fem_->mass_interior / dt + 0.5 * fem_->stiffness_interior;
    explicit_part_ = fem_->mass_interior / dt - 0.5 * fem_->stiffness_interior;
    auto factor = std::make_shared<Factorization>(implicit_part_);
    if (factor->info() != Eigen::Success) throw SolverError("Crank-Nicolson matrix factorization failed", 0.0);
    factor_ = std::move(factor);
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = factor_->solve(rhs);
    const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    double residual = (implicit_part_ * x - rhs).lpNorm<Eigen::Infinity>();
    if (residual > 1e-10 * scale) {
      x -= factor_->solve(implicit_part_ * x - rhs);
      residual = (implicit_part_ * x - rhs).lpNorm<Eigen::Infinity>();
      if (residual > 1e-10 * scale) throw SolverError("Crank-Nicolson step did not converge", residual);
    }
    return x;
  }

  std::shared_ptr<const HeatControlProblem> problem_;
  SpaceMesh mesh_;
  TimeGrid grid_;
  std::shared_ptr<const FemMatrices> fem_;
  Eigen::MatrixXd loads_;
  Eigen::MatrixXd desired_load_;
  Eigen::VectorXd desired_sq_;     // int y_d(t_k)^2
  Eigen::VectorXd desired_cross_;  // int y_d(t_k) y_d(t_{k+1})
  Eigen::VectorXd y0_;
  SparseMatrix implicit_part_;
  SparseMatrix explicit_part_;
  std::shared_ptr<const Factorization> factor_;
};

inline constexpr int kMaxDenseVariables = 4096;

/// f(x) = 1/2 x^T H x + g^T x + c over the flattened control (index j + n*i).
struct ReducedQuadratic {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  int switches = 1;
  int intervals = 1;

  double value(const Eigen::VectorXd& x) const { return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return hessian * x + linear; }
  double value(const ControlMatrix& u) const { return value(flatten(u)); }

  static Eigen::VectorXd flatten(const ControlMatrix& u) {
    return Eigen::Map<const Eigen::VectorXd>(u.data(), u.size());
  }
  ControlMatrix unflatten(const Eigen::VectorXd& x) const {
    return Eigen::Map<const ControlMatrix>(x.data(), switches, intervals);
  }
};

/// Explicit quadratic form of the reduced objective. Uses the time-shift
/// invariance of the scheme: the response to a unit control on interval i is
/// the response to interval 0 delayed by i steps.
inline ReducedQuadratic assemble_reduced_quadratic(const Instance& inst) {
  const int n = inst.switches();
  const int m = inst.intervals();
  const int dim = n * m;
  if (dim > kMaxDenseVariables) throw ResourceLimit("assemble_reduced_quadratic: n*m exceeds dense size guard");
  const double dt = inst.grid().step();

  const auto responses = inst.unit_responses();
  // gram[j][k](a, b) = Y^j_a . M Y^k_b
  std::vector<std::vector<Eigen::MatrixXd>> gram(n, std::vector<Eigen::MatrixXd>(n));
  for (int k = 0; k < n; ++k) {
    const Eigen::MatrixXd my = inst.matrices().mass_interior * responses[k];
    for (int j = 0; j < n; ++j) gram[j][k] = responses[j].transpose() * my;
  }
  // Tridiagonal time weights of the exact piecewise-linear L2 product.
  auto weight = [&](int p, int q) {
    if (p == q) return (p == 0 || p == m) ? dt / 3.0 : 2.0 * dt / 3.0;
    return dt / 6.0;
  };

  ReducedQuadratic rq;
  rq.switches = n;
  rq.intervals = m;
  rq.hessian.resize(dim, dim);
  for (int i0 = 0; i0 < m; ++i0)
    for (int l0 = 0; l0 < m; ++l0)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const auto& g = gram[j][k];
          double h = 0.0;
          for (int p = std::max(i0, l0 - 1); p <= m; ++p)
            for (int q = std::max({p - 1, l0, 0}); q <= std::min(p + 1, m); ++q)
              h += weight(p, q) * g(p - i0, q - l0);
          rq.hessian(j + n * i0, k + n * l0) = h;
        }
  rq.hessian = 0.5 * (rq.hessian + rq.hessian.transpose()).eval();
  rq.hessian.diagonal().array() += inst.tikhonov() * dt;

  const ControlMatrix zero = ControlMatrix::Zero(n, m);
  rq.linear = ReducedQuadratic::flatten(inst.reduced_gradient(zero));
  rq.constant = inst.objective(zero);
  return rq;
}

/// Repeats every interval value `factor` times.
inline ControlMatrix prolong_control(const ControlMatrix& u, int factor) {
  if (factor < 1) throw InvalidArgument("prolong_control: factor must be >= 1");
  ControlMatrix fine(u.rows(), u.cols() * factor);
  for (Eigen::Index i = 0; i < u.cols(); ++i)
    for (int r = 0; r < factor; ++r) fine.col(i * factor + r) = u.col(i);
  return fine;
}

/// Objective of a coarse control on a finer discretization of the same problem.
inline double evaluate_fine(const Instance& coarse, const ControlMatrix& u, int nodes_per_side_fine,
                            int intervals_fine) {
  coarse.check_control(u);
  if (intervals_fine % coarse.intervals() != 0)
    throw InvalidArgument("evaluate_fine: fine interval count must be a multiple of the coarse one");
  const Instance fine = Instance::discretize(coarse.problem_ptr(), nodes_per_side_fine, intervals_fine);
  return fine.objective(prolong_control(u, intervals_fine / coarse.intervals()));
}

}  // namespace switchhull
