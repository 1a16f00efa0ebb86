#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "switchhull/global_solver.hpp"
#include "switchhull/reference_problem.hpp"
#include "toy_instances.hpp"

using namespace switchhull;

TEST(SolveExactEnum, ZeroDataPicksAllZero) {
  auto p = std::make_shared<HeatControlProblem>();
  p->forms = {[](double, double) { return 0.0; }};
  p->constraint = BoundedSwitchings::full_cube(1, 2);
  const auto r = solve_exact_enum(Instance::discretize(p, 5, 6));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.pattern.to_string(), "000000");
}

TEST(SolveExactEnum, MatchesIndependentEnumeration) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    auto inst = Instance::discretize(toy::random_problem(rng, 2), 6, 4);
    const auto r = solve_exact_enum(inst);
    const auto all = oracle::bounded_patterns(1, 4, 2, true);
    ASSERT_EQ(all.size(), 11u);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : all) best = std::min(best, inst.objective(v));
    EXPECT_NEAR(r.value, best, 1e-9 * (1.0 + best));
    EXPECT_NEAR(inst.objective(r.pattern.to_control()), r.value, 1e-9 * (1.0 + best));
    EXPECT_EQ(r.nodes, 11u);
  }
}

TEST(SolveExactEnum, ThreadCountDoesNotChangeResult) {
  std::mt19937 rng(22);
  auto inst = Instance::discretize(toy::random_problem(rng, 3), 5, 12);
  const auto rq = assemble_reduced_quadratic(inst);
  setenv("SWITCHHULL_THREADS", "1", 1);
  const auto one = solve_exact_enum(rq, inst.constraint(), inst.grid());
  setenv("SWITCHHULL_THREADS", "4", 1);
  const auto four = solve_exact_enum(rq, inst.constraint(), inst.grid());
  unsetenv("SWITCHHULL_THREADS");
  EXPECT_EQ(one.pattern, four.pattern);
  EXPECT_EQ(one.value, four.value);
}

TEST(SolveExactEnum, CapExceeded) {
  std::mt19937 rng(23);
  auto inst = Instance::discretize(toy::random_problem(rng, 2), 5, 10);
  EXPECT_THROW(solve_exact_enum(inst, 20), ResourceLimit);
}

TEST(SolveExactBnb, AgreesWithEnumeration) {
  std::mt19937 rng(24);
  for (int trial = 0; trial < 15; ++trial) {
    const int m = 4 + trial % 7;
    auto inst = Instance::discretize(toy::random_problem(rng, 1 + trial % 4, trial % 5 != 4), 6, m);
    const auto rq = assemble_reduced_quadratic(inst);
    const auto e = solve_exact_enum(rq, inst.constraint(), inst.grid());
    const auto b = solve_exact_bnb(rq, std::get<BoundedSwitchings>(inst.constraint()));
    EXPECT_TRUE(b.complete);
    EXPECT_NEAR(e.value, b.value, 1e-9) << "trial " << trial;
  }
}

TEST(SolveExactBnb, TwoSwitchesWithConflict) {
  std::mt19937 rng(25);
  auto p = toy::random_problem(rng, 2, true, 2);
  auto c = BoundedSwitchings::full_cube(2, 2);
  c.allowed = {0b00, 0b01, 0b10};
  p->constraint = c;
  auto inst = Instance::discretize(p, 5, 5);
  const auto rq = assemble_reduced_quadratic(inst);
  const auto e = solve_exact_enum(rq, inst.constraint(), inst.grid());
  const auto b = solve_exact_bnb(rq, c);
  EXPECT_NEAR(e.value, b.value, 1e-9);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : oracle::bounded_patterns(2, 5, 2, true, {{0, 0}, {1, 0}, {0, 1}}))
    best = std::min(best, rq.value(v));
  EXPECT_NEAR(best, e.value, 1e-12);
}

TEST(SolveExactBnb, ZeroBudgetReturnsZeroPattern) {
  ReferenceProblemOptions opt;
  opt.sigma_max = 0;
  auto inst = Instance::discretize(make_reference_problem(opt), 6, 8);
  const auto b = solve_exact_bnb(inst);
  EXPECT_EQ(b.pattern.to_string(), "00000000");
  EXPECT_NEAR(b.value, inst.objective(ControlMatrix::Zero(1, 8)), 1e-9);
  EXPECT_EQ(b.nodes, 1u);
}

TEST(SolveExactBnb, RootBoundTightGivesOneNode) {
  // Linear objective: the relaxation optimum is a vertex.
  ReducedQuadratic rq;
  rq.switches = 1;
  rq.intervals = 6;
  rq.hessian = Eigen::MatrixXd::Zero(6, 6);
  rq.linear = Eigen::VectorXd::LinSpaced(6, -1.0, 1.5);
  const auto b = solve_exact_bnb(rq, BoundedSwitchings::full_cube(1, 2));
  EXPECT_EQ(b.nodes, 1u);
  EXPECT_NEAR(b.value, -1.5, 1e-12);
}

TEST(SolveExactBnb, NodeCapFlagsIncomplete) {
  std::mt19937 rng(26);
  auto inst = Instance::discretize(toy::random_problem(rng, 3), 5, 10);
  BnbOptions opt;
  opt.node_cap = 2;
  const auto b = solve_exact_bnb(inst, opt);
  EXPECT_FALSE(b.complete);
  EXPECT_TRUE(std::isfinite(b.value));
}

TEST(PrefixLmo, MatchesFilteredEnumeration) {
  std::mt19937 rng(27);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 3 + trial % 8;
    const int sigma = trial % 4;
    const auto c = BoundedSwitchings::full_cube(1, sigma);
    const ControlMatrix cost = oracle::random_matrix(rng, 1, m, -1.0, 1.0);
    const int k = trial % m;
    std::vector<std::uint32_t> prefix;
    for (int i = 0; i < k; ++i) prefix.push_back(static_cast<std::uint32_t>(bit(rng)));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : oracle::bounded_patterns(1, m, sigma, true)) {
      bool match = true;
      for (int i = 0; i < k; ++i) match = match && v(0, i) == prefix[i];
      if (match) best = std::min(best, (cost.array() * v.array()).sum());
    }
    if (!std::isfinite(best)) {
      EXPECT_THROW(lmo_bounded(cost, c, prefix), InvalidArgument);
      continue;
    }
    EXPECT_NEAR(lmo_bounded(cost, c, prefix).value, best, 1e-12) << trial;
  }
}
