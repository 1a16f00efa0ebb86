#pragma once

// Combinatorial layer for projected switching polytopes: feasibility checks,
// exact linear minimization over the feasible patterns, enumeration, and
// separation of alternating inequalities.
//
// Conventions: a control on a uniform time grid is an n x m matrix (row j =
// switch, column i = interval, both 0-based). A binary pattern stores one
// bitmask per interval, bit j = state of switch j. Flattened vectors use
// Eigen's column-major order, i.e. entry (j, i) sits at index j + n*i.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "switchhull/errors.hpp"
#include "switchhull/time_grid.hpp"

namespace switchhull {

using ControlMatrix = Eigen::MatrixXd;

inline constexpr int kMaxSwitches = 20;

/// Rank of a column state in lexicographic order, switch 0 most significant.
inline std::uint32_t column_rank(std::uint32_t mask, int switches) {
  std::uint32_t rank = 0;
  for (int j = 0; j < switches; ++j) rank = (rank << 1) | ((mask >> j) & 1u);
  return rank;
}

class BinaryPattern {
 public:
  BinaryPattern() = default;
  BinaryPattern(int switches, int intervals) : switches_(switches), columns_(intervals, 0u) {
    if (switches < 1 || switches > kMaxSwitches)
      throw InvalidArgument("BinaryPattern: switch count out of range");
  }

  static BinaryPattern from_columns(int switches, std::vector<std::uint32_t> columns) {
    BinaryPattern p(switches, 0);
    const std::uint32_t limit = 1u << switches;
    for (auto c : columns)
      if (c >= limit) throw InvalidArgument("BinaryPattern: column state has bits beyond switch count");
    p.columns_ = std::move(columns);
    return p;
  }

  /// Accepts a control whose entries are within `tol` of 0 or 1.
  static BinaryPattern from_control(const ControlMatrix& u, double tol = 1e-9) {
    BinaryPattern p(static_cast<int>(u.rows()), static_cast<int>(u.cols()));
    for (Eigen::Index i = 0; i < u.cols(); ++i)
      for (Eigen::Index j = 0; j < u.rows(); ++j) {
        const double x = u(j, i);
        if (std::abs(x) <= tol) continue;
        if (std::abs(x - 1.0) <= tol)
          p.set(static_cast<int>(j), static_cast<int>(i), true);
        else
          throw InvalidArgument("BinaryPattern: control entry is not binary");
      }
    return p;
  }

  int switches() const noexcept { return switches_; }
  int intervals() const noexcept { return static_cast<int>(columns_.size()); }

  bool at(int j, int i) const { return ((columns_[i] >> j) & 1u) != 0; }
  void set(int j, int i, bool on) {
    if (on)
      columns_[i] |= (1u << j);
    else
      columns_[i] &= ~(1u << j);
  }

  std::uint32_t column(int i) const { return columns_[i]; }
  const std::vector<std::uint32_t>& columns() const noexcept { return columns_; }

  ControlMatrix to_control() const {
    ControlMatrix u = ControlMatrix::Zero(switches_, intervals());
    for (int i = 0; i < intervals(); ++i)
      for (int j = 0; j < switches_; ++j) u(j, i) = at(j, i) ? 1.0 : 0.0;
    return u;
  }

  /// Rows joined by '/', e.g. "0110/1000" for two switches.
  std::string to_string() const {
    std::string s;
    for (int j = 0; j < switches_; ++j) {
      if (j > 0) s += '/';
      for (int i = 0; i < intervals(); ++i) s += at(j, i) ? '1' : '0';
    }
    return s;
  }

  friend bool operator==(const BinaryPattern&, const BinaryPattern&) = default;

  /// Lexicographic over intervals first, then switches.
  friend std::strong_ordering operator<=>(const BinaryPattern& a, const BinaryPattern& b) {
    if (auto c = a.switches_ <=> b.switches_; c != 0) return c;
    const auto len = std::min(a.columns_.size(), b.columns_.size());
    for (std::size_t i = 0; i < len; ++i) {
      auto c = column_rank(a.columns_[i], a.switches_) <=> column_rank(b.columns_[i], b.switches_);
      if (c != 0) return c;
    }
    return a.columns_.size() <=> b.columns_.size();
  }

 private:
  int switches_ = 1;
  std::vector<std::uint32_t> columns_;
};

inline std::ostream& operator<<(std::ostream& os, const BinaryPattern& p) { return os << p.to_string(); }

/// Total-budget switching constraint over allowed column states U.
/// With `leading_zero`, the control is pinned to the all-zero state before
/// t = 0, so a nonzero first column already counts as switches.
struct BoundedSwitchings {
  int switches = 1;
  int sigma_max = 0;
  std::vector<std::uint32_t> allowed;
  bool leading_zero = true;

  static BoundedSwitchings full_cube(int switches, int sigma_max, bool leading_zero = true) {
    if (switches < 1 || switches > kMaxSwitches)
      throw InvalidArgument("BoundedSwitchings: switch count out of range");
    BoundedSwitchings c{switches, sigma_max, {}, leading_zero};
    for (std::uint32_t w = 0; w < (1u << switches); ++w) c.allowed.push_back(w);
    c.validate();
    return c;
  }

  bool allows(std::uint32_t column) const {
    return std::find(allowed.begin(), allowed.end(), column) != allowed.end();
  }

  bool is_full_cube() const {
    if (allowed.size() != (std::size_t{1} << switches)) return false;
    std::vector<bool> seen(allowed.size(), false);
    for (auto w : allowed) {
      if (w >= seen.size() || seen[w]) return false;
      seen[w] = true;
    }
    return true;
  }

  void validate() const {
    if (switches < 1 || switches > kMaxSwitches)
      throw InvalidArgument("BoundedSwitchings: switch count out of range");
    if (sigma_max < 0) throw InvalidArgument("BoundedSwitchings: sigma_max must be >= 0");
    if (allowed.empty()) throw InvalidArgument("BoundedSwitchings: allowed state set U is empty");
    for (auto w : allowed)
      if (w >= (1u << switches))
        throw InvalidArgument("BoundedSwitchings: allowed state has bits beyond switch count");
  }
};

/// Minimum dwell time between consecutive switchings of a single switch.
struct DwellTime {
  double min_dwell = 1.0;
};

using SwitchingConstraint = std::variant<BoundedSwitchings, DwellTime>;

inline int switch_count(const SwitchingConstraint& c) {
  if (const auto* b = std::get_if<BoundedSwitchings>(&c)) return b->switches;
  return 1;
}

inline void validate(const SwitchingConstraint& c, const TimeGrid& grid) {
  if (const auto* b = std::get_if<BoundedSwitchings>(&c)) {
    b->validate();
    return;
  }
  const double s = std::get<DwellTime>(c).min_dwell;
  if (!(s > 0.0) || s > grid.horizon() * (1.0 + 1e-12))
    throw InvalidArgument("DwellTime: need 0 < s <= T");
}

/// Total number of switchings: Hamming distance between consecutive columns,
/// plus the weight of the first column when pinned to zero beforehand.
inline int switchings(const BinaryPattern& v, bool leading_zero) {
  int count = 0;
  std::uint32_t prev = 0;
  for (int i = 0; i < v.intervals(); ++i) {
    const std::uint32_t w = v.column(i);
    if (i > 0 || leading_zero) count += std::popcount(prev ^ w);
    prev = w;
  }
  return count;
}

namespace detail {

inline bool runs_respect_dwell(const BinaryPattern& v, double step, double min_dwell) {
  // Run lengths in units of intervals; first and last runs are exempt.
  std::vector<int> runs;
  int len = 1;
  for (int i = 1; i < v.intervals(); ++i) {
    if (v.at(0, i) == v.at(0, i - 1)) {
      ++len;
    } else {
      runs.push_back(len);
      len = 1;
    }
  }
  runs.push_back(len);
  const double tol = 1e-12 * std::max(1.0, min_dwell);
  for (std::size_t r = 1; r + 1 < runs.size(); ++r)
    if (runs[r] * step < min_dwell - tol) return false;
  return true;
}

}  // namespace detail

inline bool feasible(const SwitchingConstraint& constraint, const BinaryPattern& v,
                     const TimeGrid& grid) {
  if (v.intervals() != grid.intervals())
    throw InvalidArgument("feasible: pattern length does not match time grid");
  if (const auto* b = std::get_if<BoundedSwitchings>(&constraint)) {
    if (v.switches() != b->switches)
      throw InvalidArgument("feasible: pattern switch count does not match constraint");
    for (int i = 0; i < v.intervals(); ++i)
      if (!b->allows(v.column(i))) return false;
    return switchings(v, b->leading_zero) <= b->sigma_max;
  }
  if (v.switches() != 1) throw InvalidArgument("feasible: dwell-time constraint needs n = 1");
  return detail::runs_respect_dwell(v, grid.step(), std::get<DwellTime>(constraint).min_dwell);
}

// ---------------------------------------------------------------------------
// Linear minimization over bounded-switching patterns

struct LmoResult {
  BinaryPattern pattern;
  double value = 0.0;
  int switchings = 0;
};

/// Exact minimizer of sum_{j,i} cost(j,i) v(j,i) over feasible patterns, by
/// dynamic programming over (interval, previous column, switchings used).
/// `fixed_prefix` pins the first columns. Ties prefer fewer switchings, then
/// the lexicographically smaller pattern.
inline LmoResult lmo_bounded(const ControlMatrix& cost, const BoundedSwitchings& constraint,
                             std::span<const std::uint32_t> fixed_prefix = {}) {
  constraint.validate();
  const int n = constraint.switches;
  const int m = static_cast<int>(cost.cols());
  if (cost.rows() != n) throw InvalidArgument("lmo_bounded: cost rows must equal switch count");
  if (m < 1) throw InvalidArgument("lmo_bounded: empty time grid");
  if (static_cast<int>(fixed_prefix.size()) > m)
    throw InvalidArgument("lmo_bounded: prefix longer than horizon");

  std::vector<std::uint32_t> states = constraint.allowed;
  std::sort(states.begin(), states.end(), [n](auto a, auto b) {
    return column_rank(a, n) < column_rank(b, n);
  });
  states.erase(std::unique(states.begin(), states.end()), states.end());
  const int num_states = static_cast<int>(states.size());
  const int budget = std::min(constraint.sigma_max, n * m);
  const double table = double(m + 1) * (num_states + 1) * (budget + 1);
  if (table > 5e7) throw ResourceLimit("lmo_bounded: DP table exceeds resource guard");

  // stage[i][a] = cost of state a on interval i
  std::vector<double> stage(static_cast<std::size_t>(m) * num_states, 0.0);
  double scale = 1.0;
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < num_states; ++a) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if ((states[a] >> j) & 1u) s += cost(j, i);
      stage[static_cast<std::size_t>(i) * num_states + a] = s;
      scale += std::abs(s);
    }
  const double eps = 1e-12 * scale;

  struct Entry {
    double cost = std::numeric_limits<double>::infinity();
    int switches = 0;
  };
  auto better = [eps](const Entry& x, const Entry& y) {
    if (x.cost < y.cost - eps) return true;
    if (x.cost > y.cost + eps) return false;
    return x.switches < y.switches;
  };

  const int start = num_states;  // virtual predecessor of the first column
  auto idx = [&](int i, int prev, int used) {
    return (static_cast<std::size_t>(i) * (num_states + 1) + prev) * (budget + 1) + used;
  };
  auto transition = [&](int prev, int a) {
    if (prev == start) return constraint.leading_zero ? std::popcount(states[a]) : 0;
    return std::popcount(states[prev] ^ states[a]);
  };
  auto admissible = [&](int i, int a) {
    return i >= static_cast<int>(fixed_prefix.size()) || states[a] == fixed_prefix[i];
  };

  std::vector<Entry> togo(static_cast<std::size_t>(m + 1) * (num_states + 1) * (budget + 1));
  for (int prev = 0; prev <= num_states; ++prev)
    for (int used = 0; used <= budget; ++used) togo[idx(m, prev, used)] = Entry{0.0, 0};

  for (int i = m - 1; i >= 0; --i) {
    for (int prev = 0; prev <= num_states; ++prev) {
      if ((i == 0) != (prev == start)) continue;
      for (int used = 0; used <= budget; ++used) {
        Entry best;
        for (int a = 0; a < num_states; ++a) {
          if (!admissible(i, a)) continue;
          const int t = transition(prev, a);
          if (used + t > budget) continue;
          const Entry& next = togo[idx(i + 1, a, used + t)];
          if (!std::isfinite(next.cost)) continue;
          Entry cand{stage[static_cast<std::size_t>(i) * num_states + a] + next.cost,
                     t + next.switches};
          if (better(cand, best)) best = cand;
        }
        togo[idx(i, prev, used)] = best;
      }
    }
  }

  if (!std::isfinite(togo[idx(0, start, 0)].cost))
    throw InvalidArgument("lmo_bounded: no feasible pattern (prefix or U infeasible)");

  // Forward reconstruction; states are scanned in lexicographic order so the
  // first tie wins.
  BinaryPattern pattern(n, m);
  std::vector<std::uint32_t> cols(m);
  int prev = start;
  int used = 0;
  for (int i = 0; i < m; ++i) {
    Entry best;
    int choice = -1;
    for (int a = 0; a < num_states; ++a) {
      if (!admissible(i, a)) continue;
      const int t = transition(prev, a);
      if (used + t > budget) continue;
      const Entry& next = togo[idx(i + 1, a, used + t)];
      if (!std::isfinite(next.cost)) continue;
      Entry cand{stage[static_cast<std::size_t>(i) * num_states + a] + next.cost,
                 t + next.switches};
      if (choice < 0 || better(cand, best)) {
        best = cand;
        choice = a;
      }
    }
    cols[i] = states[choice];
    used += transition(prev, choice);
    prev = choice;
  }
  pattern = BinaryPattern::from_columns(n, std::move(cols));

  LmoResult result{pattern, 0.0, used};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (pattern.at(j, i)) result.value += cost(j, i);
  return result;
}

/// Closest feasible binary pattern in Euclidean distance. For binary v,
/// ||v - u||^2 = sum (1 - 2u) v + const, so this is one LMO call.
inline BinaryPattern nearest_feasible(const ControlMatrix& relaxed,
                                      const BoundedSwitchings& constraint) {
  if ((relaxed.array() < -1e-9).any() || (relaxed.array() > 1.0 + 1e-9).any())
    throw InvalidArgument("nearest_feasible: point outside [0,1]");
  const ControlMatrix cost = ControlMatrix::Ones(relaxed.rows(), relaxed.cols()) - 2.0 * relaxed;
  return lmo_bounded(cost, constraint).pattern;
}

// ---------------------------------------------------------------------------
// Enumeration

inline std::vector<BinaryPattern> enumerate_patterns(const SwitchingConstraint& constraint,
                                                     const TimeGrid& grid,
                                                     std::size_t cap = 1'000'000) {
  validate(constraint, grid);
  const int m = grid.intervals();
  std::vector<BinaryPattern> out;

  if (const auto* dwell = std::get_if<DwellTime>(&constraint)) {
    if (m > 30) throw ResourceLimit("enumerate_patterns: dwell enumeration limited to m <= 30");
    // All 2^m patterns in lexicographic order, filtered by run lengths.
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << m); ++code) {
      BinaryPattern p(1, m);
      for (int i = 0; i < m; ++i) p.set(0, i, ((code >> (m - 1 - i)) & 1u) != 0);
      if (detail::runs_respect_dwell(p, grid.step(), dwell->min_dwell)) {
        if (out.size() >= cap) throw ResourceLimit("enumerate_patterns: cap exceeded");
        out.push_back(std::move(p));
      }
    }
    return out;
  }

  const auto& b = std::get<BoundedSwitchings>(constraint);
  const int n = b.switches;
  std::vector<std::uint32_t> states = b.allowed;
  std::sort(states.begin(), states.end(),
            [n](auto x, auto y) { return column_rank(x, n) < column_rank(y, n); });
  states.erase(std::unique(states.begin(), states.end()), states.end());

  std::vector<std::uint32_t> cols(m);
  auto recurse = [&](auto&& self, int i, std::uint32_t prev, int used) -> void {
    if (i == m) {
      if (out.size() >= cap) throw ResourceLimit("enumerate_patterns: cap exceeded");
      out.push_back(BinaryPattern::from_columns(n, cols));
      return;
    }
    for (auto w : states) {
      const int t = (i > 0 || b.leading_zero) ? std::popcount(prev ^ w) : 0;
      if (used + t > b.sigma_max) continue;
      cols[i] = w;
      self(self, i + 1, w, used + t);
    }
  };
  recurse(recurse, 0, 0u, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Alternating inequalities

/// One inequality sum_k (-1)^k x_{i_k} <= floor(budget/2) on a single switch
/// (k 0-based, so the first term is +). For the free-start convention the
/// inequality is applied to x = 1 - v (`complemented`).
struct AlternatingCut {
  int switch_index = 0;
  std::vector<int> intervals;  // strictly increasing, 0-based
  int budget = 0;              // switching budget the inequality encodes
  int rhs = 0;                 // floor(budget / 2)
  bool complemented = false;

  double sign(std::size_t k) const { return (k % 2 == 0) ? 1.0 : -1.0; }

  double lhs(const ControlMatrix& v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < intervals.size(); ++k) {
      const double x = v(switch_index, intervals[k]);
      s += sign(k) * (complemented ? 1.0 - x : x);
    }
    return s;
  }

  double violation(const ControlMatrix& v) const { return lhs(v) - rhs; }

  /// The cut as a row over the flattened control: sum coef * v <= rhs_on_v.
  std::vector<std::pair<int, double>> coefficients(int switches) const {
    std::vector<std::pair<int, double>> row;
    row.reserve(intervals.size());
    for (std::size_t k = 0; k < intervals.size(); ++k)
      row.emplace_back(switch_index + switches * intervals[k], complemented ? -sign(k) : sign(k));
    return row;
  }

  double rhs_on_v() const {
    double r = rhs;
    if (complemented)
      for (std::size_t k = 0; k < intervals.size(); ++k) r -= sign(k);
    return r;
  }

  std::string describe() const {
    std::ostringstream os;
    os << "switch " << switch_index << " indices (";
    for (std::size_t k = 0; k < intervals.size(); ++k) os << (k ? ", " : "") << intervals[k] + 1;
    os << ") signs (";
    for (std::size_t k = 0; k < intervals.size(); ++k) os << (k ? ", " : "") << (k % 2 ? '-' : '+');
    os << ") rhs " << rhs;
    if (complemented) os << " on 1-v";
    return os.str();
  }
};

inline constexpr double kSeparationTolerance = 1e-8;

namespace detail {

/// Most violated alternating inequality for one sequence x_1..x_m with an
/// implicit x_0 = 0: peaks at odd positions, valleys at even positions,
/// first index of each plateau; the last element is dropped when the length
/// has the wrong parity.
inline std::optional<std::pair<std::vector<int>, double>> best_alternating(
    std::span<const double> x, int budget) {
  std::vector<int> seq;
  bool want_peak = true;
  int cand = -1;
  double cand_val = 0.0;  // x_0
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    const double xi = x[i];
    if (want_peak) {
      if (xi > cand_val) {
        cand = i;
        cand_val = xi;
      } else if (xi < cand_val && cand >= 0) {
        seq.push_back(cand);
        want_peak = false;
        cand = i;
        cand_val = xi;
      }
    } else {
      if (xi < cand_val) {
        cand = i;
        cand_val = xi;
      } else if (xi > cand_val) {
        seq.push_back(cand);
        want_peak = true;
        cand = i;
        cand_val = xi;
      }
    }
  }
  if (cand >= 0) seq.push_back(cand);

  const std::size_t parity = static_cast<std::size_t>(budget + 1) % 2;
  if (!seq.empty() && seq.size() % 2 != parity) seq.pop_back();
  if (static_cast<int>(seq.size()) <= budget) return std::nullopt;

  double lhs = 0.0;
  for (std::size_t k = 0; k < seq.size(); ++k) lhs += (k % 2 == 0 ? 1.0 : -1.0) * x[seq[k]];
  return std::make_pair(std::move(seq), lhs - budget / 2);
}

}  // namespace detail

/// Most violated alternating inequality across switches, or nothing when no
/// inequality is violated by more than kSeparationTolerance. Requires U to be
/// the full cube. O(n m).
inline std::optional<AlternatingCut> separate_alternating(const ControlMatrix& point,
                                                          const BoundedSwitchings& constraint) {
  constraint.validate();
  if (!constraint.is_full_cube())
    throw InvalidArgument("separate_alternating: only U = {0,1}^n is supported");
  if (point.rows() != constraint.switches)
    throw InvalidArgument("separate_alternating: point rows must equal switch count");

  std::optional<AlternatingCut> best;
  double best_violation = kSeparationTolerance;
  const int m = static_cast<int>(point.cols());
  std::vector<double> row(m);

  auto consider = [&](int j, bool complemented, int budget) {
    for (int i = 0; i < m; ++i) row[i] = complemented ? 1.0 - point(j, i) : point(j, i);
    auto found = detail::best_alternating(row, budget);
    if (!found || found->second <= best_violation) return;
    best_violation = found->second;
    best = AlternatingCut{j, std::move(found->first), budget, budget / 2, complemented};
  };

  for (int j = 0; j < constraint.switches; ++j) {
    if (constraint.leading_zero) {
      consider(j, false, constraint.sigma_max);
    } else {
      // Free start: prepending x_0 = 0 to v or to 1 - v costs at most one extra switching.
      consider(j, false, constraint.sigma_max + 1);
      consider(j, true, constraint.sigma_max + 1);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Dwell time

struct CandidateSet {
  std::vector<double> points;  // sorted, distinct, contains 0 and T

  /// Index of the point within `tol` of t, if any.
  std::optional<std::size_t> find(double t, double tol) const {
    auto it = std::lower_bound(points.begin(), points.end(), t - tol);
    if (it != points.end() && std::abs(*it - t) <= tol)
      return static_cast<std::size_t>(it - points.begin());
    return std::nullopt;
  }
};

/// Interval endpoints and {0, T}, shifted by all integer multiples of s that
/// stay inside [0, T].
inline CandidateSet candidate_points(double s, const TimeGrid& grid) {
  const double T = grid.horizon();
  if (!(s > 0.0) || s > T * (1.0 + 1e-12)) throw InvalidArgument("candidate_points: need 0 < s <= T");
  const double tol = 1e-12 * std::max(1.0, T);
  std::vector<double> raw;
  for (int k = 0; k <= grid.intervals(); ++k) {
    const double e = grid.node(k);
    const auto lo = static_cast<long>(std::ceil((-e - tol) / s));
    const auto hi = static_cast<long>(std::floor((T - e + tol) / s));
    for (long q = lo; q <= hi; ++q) raw.push_back(std::clamp(e + q * s, 0.0, T));
  }
  std::sort(raw.begin(), raw.end());
  CandidateSet out;
  for (double t : raw)
    if (out.points.empty() || t - out.points.back() > tol) out.points.push_back(t);
  out.points.front() = 0.0;
  out.points.back() = T;
  return out;
}

struct DwellLmoResult {
  Eigen::VectorXd projection;  // interval averages of the optimal profile
  double value = 0.0;
  int initial_state = 0;
  std::vector<double> switch_times;
};

namespace detail {

/// Interval averages of a piecewise-constant 0/1 profile given as segments.
inline Eigen::VectorXd project_segments(const std::vector<std::tuple<double, double, int>>& segs,
                                        const TimeGrid& grid) {
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(grid.intervals());
  for (const auto& [a, b, val] : segs) {
    if (!val) continue;
    for (int i = 0; i < grid.intervals(); ++i) {
      const auto [lo, hi] = grid.interval(i);
      const double overlap = std::min(b, hi) - std::max(a, lo);
      if (overlap > 0) avg[i] += overlap / grid.step();
    }
  }
  return avg;
}

}  // namespace detail

/// Exact minimum of c^T Pi(u) over all u with minimum dwell time s, via
/// dynamic programming over the candidate switching points. The optimal
/// projection may be fractional.
inline DwellLmoResult lmo_dwell(const Eigen::VectorXd& cost, double s, const TimeGrid& grid) {
  const int m = grid.intervals();
  if (cost.size() != m) throw InvalidArgument("lmo_dwell: cost length must equal interval count");
  const CandidateSet cand = candidate_points(s, grid);
  const auto& tau = cand.points;
  const std::size_t r = tau.size();
  const double dt = grid.step();
  const double T = grid.horizon();
  const double tol = 1e-9 * std::max(1.0, T);

  // Integral of the cost density c_i / dt from 0 to t.
  std::vector<double> prefix(m + 1, 0.0);
  for (int i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + cost[i];
  auto cumulative = [&](double t) {
    const int k = std::clamp(static_cast<int>(std::floor(t / dt)), 0, m - 1);
    return prefix[k] + cost[k] * (t - k * dt) / dt;
  };
  auto segment = [&](double a, double b, int value) {
    return value ? cumulative(b) - cumulative(a) : 0.0;
  };

  enum class Move { Start, Continue, SwitchAfterDwell, InitialRun };
  struct Cell {
    double value = std::numeric_limits<double>::infinity();
    Move move = Move::Start;
    std::size_t from = 0;
  };
  std::vector<std::array<Cell, 2>> dp(r);
  dp[0][0] = {0.0, Move::Start, 0};
  dp[0][1] = {0.0, Move::Start, 0};
  const double eps = 1e-12 * (1.0 + cost.cwiseAbs().sum());

  for (std::size_t j = 1; j < r; ++j) {
    for (int b = 0; b < 2; ++b) {
      Cell best{dp[j - 1][b].value + segment(tau[j - 1], tau[j], b), Move::Continue, j - 1};
      if (tau[j] >= s - tol) {
        const auto k = cand.find(tau[j] - s, tol);
        if (!k) throw InternalError("lmo_dwell: candidate set not closed under shifts by s");
        const double v = dp[*k][1 - b].value + segment(tau[*k], tau[j], 1 - b);
        if (v < best.value - eps) best = {v, Move::SwitchAfterDwell, *k};
      } else {
        const double v = segment(0.0, tau[j], 1 - b);
        if (v < best.value - eps) best = {v, Move::InitialRun, 0};
      }
      dp[j][b] = best;
    }
  }

  int b = dp[r - 1][1].value < dp[r - 1][0].value - eps ? 1 : 0;
  std::vector<std::tuple<double, double, int>> segs;
  std::size_t j = r - 1;
  int initial = b;
  while (true) {
    const Cell& cell = dp[j][b];
    if (cell.move == Move::Start) {
      initial = b;
      break;
    }
    if (cell.move == Move::Continue) {
      segs.emplace_back(tau[j - 1], tau[j], b);
      j = j - 1;
    } else if (cell.move == Move::SwitchAfterDwell) {
      segs.emplace_back(tau[cell.from], tau[j], 1 - b);
      j = cell.from;
      b = 1 - b;
    } else {
      segs.emplace_back(0.0, tau[j], 1 - b);
      initial = 1 - b;
      break;
    }
  }
  std::reverse(segs.begin(), segs.end());

  DwellLmoResult out;
  out.initial_state = initial;
  out.projection = detail::project_segments(segs, grid);
  out.value = cost.dot(out.projection);
  int state = initial;
  for (const auto& [a, e, val] : segs) {
    if (e - a <= 0.0) continue;
    if (val != state) {
      out.switch_times.push_back(a);
      state = val;
    }
  }
  return out;
}

}  // namespace switchhull
