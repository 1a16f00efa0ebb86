#pragma once

// Exact minimization over feasible binary patterns: full enumeration for
// small feasible sets, depth-first branch-and-bound with Frank-Wolfe node
// bounds otherwise.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "switchhull/errors.hpp"
#include "switchhull/fem_heat.hpp"
#include "switchhull/relax_engine.hpp"
#include "switchhull/switch_poly.hpp"

namespace switchhull {

struct ExactResult {
  BinaryPattern pattern;
  double value = std::numeric_limits<double>::infinity();
  std::size_t nodes = 0;  // patterns evaluated (enumeration) or nodes explored (B&B)
  bool complete = true;   // false when the node cap stopped the search
  bool used_enumeration = true;
  double wall_time = 0.0;
};

/// Worker count: SWITCHHULL_THREADS if set and positive, else the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("SWITCHHULL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline ExactResult solve_exact_enum(const ReducedQuadratic& rq, const SwitchingConstraint& c, const TimeGrid& grid,
                                    std::size_t cap = 1'000'000) {
  const auto start = std::chrono::steady_clock::now();
  const auto patterns = enumerate_patterns(c, grid, cap);
  const std::size_t count = patterns.size();
  std::vector<double> values(count);
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(1, count / 64));
  auto work = [&](unsigned w) {
    for (std::size_t k = w; k < count; k += workers) values[k] = rq.value(patterns[k].to_control());
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  // Patterns come in lexicographic order, so the first minimum is the smallest.
  std::size_t best = 0;
  for (std::size_t k = 1; k < count; ++k)
    if (values[k] < values[best]) best = k;
  ExactResult r;
  r.pattern = patterns[best];
  r.value = values[best];
  r.nodes = count;
  r.wall_time = detail::seconds_since(start);
  return r;
}

struct BnbOptions {
  std::size_t node_cap = 10'000'000;
  int node_fw_iterations = 200;
  double node_fw_tolerance = 1e-6;
  double prune_tolerance = 1e-9;
};

/// Depth-first branch-and-bound over interval columns in time order. Each
/// node pins a prefix; its bound is a Frank-Wolfe certificate over the
/// patterns sharing that prefix.
inline ExactResult solve_exact_bnb(const ReducedQuadratic& rq, const BoundedSwitchings& c, const BnbOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  c.validate();
  if (c.switches != rq.switches) throw InvalidArgument("solve_exact_bnb: switch count mismatch");
  const int m = rq.intervals;

  FrankWolfeOptions fw_opt;
  fw_opt.max_iterations = opt.node_fw_iterations;
  fw_opt.tolerance = opt.node_fw_tolerance;

  ExactResult r;
  r.used_enumeration = false;
  auto offer = [&](const BinaryPattern& p, double value) {
    if (value < r.value || (value == r.value && p < r.pattern)) {
      r.value = value;
      r.pattern = p;
    }
  };

  struct Node {
    std::vector<std::uint32_t> prefix;
    int used = 0;
    double parent_bound = -std::numeric_limits<double>::infinity();
  };
  std::vector<Node> stack{Node{}};
  bool root = true;
  while (!stack.empty()) {
    if (r.nodes >= opt.node_cap) {
      r.complete = false;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    ++r.nodes;
    if (static_cast<int>(node.prefix.size()) == m) {
      const BinaryPattern p = BinaryPattern::from_columns(c.switches, node.prefix);
      offer(p, rq.value(p.to_control()));
      continue;
    }
    const BoundReport fw = frank_wolfe_bound(rq, c, fw_opt, node.prefix);
    if (fw.incumbent) offer(*fw.incumbent, *fw.incumbent_value);
    if (root) {
      const BinaryPattern rounded = nearest_feasible(fw.relaxed_solution.cwiseMax(0.0).cwiseMin(1.0), c);
      offer(rounded, rq.value(rounded.to_control()));
      root = false;
    }
    const double bound = std::max(fw.lower_bound, node.parent_bound);
    if (bound >= r.value - opt.prune_tolerance) continue;

    const std::uint32_t current = node.prefix.empty() ? 0u : node.prefix.back();
    const bool counts = !node.prefix.empty() || c.leading_zero;
    std::vector<std::uint32_t> order{current};
    for (std::uint32_t w : c.allowed)
      if (w != current) order.push_back(w);
    // Push in reverse so the keep-current child is explored first.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (!c.allows(*it)) continue;
      const int used = node.used + (counts ? std::popcount(current ^ *it) : 0);
      if (used > c.sigma_max) continue;
      Node child{node.prefix, used, bound};
      child.prefix.push_back(*it);
      stack.push_back(std::move(child));
    }
  }
  r.wall_time = detail::seconds_since(start);
  return r;
}

/// Enumeration when the feasible set fits under `cap`, branch-and-bound
/// otherwise (bounded switchings only).
inline ExactResult solve_exact(const ReducedQuadratic& rq, const SwitchingConstraint& c, const TimeGrid& grid,
                               std::size_t cap = 1'000'000) {
  try {
    return solve_exact_enum(rq, c, grid, cap);
  } catch (const ResourceLimit&) {
    if (const auto* b = std::get_if<BoundedSwitchings>(&c)) return solve_exact_bnb(rq, *b);
    throw;
  }
}

inline ExactResult solve_exact_enum(const Instance& inst, std::size_t cap = 1'000'000) {
  return solve_exact_enum(assemble_reduced_quadratic(inst), inst.constraint(), inst.grid(), cap);
}

inline ExactResult solve_exact_bnb(const Instance& inst, const BnbOptions& opt = {}) {
  return solve_exact_bnb(assemble_reduced_quadratic(inst), std::get<BoundedSwitchings>(inst.constraint()), opt);
}

}  // namespace switchhull
