#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "switchhull/bench.hpp"
#include "reference_rows.hpp"

using namespace switchhull;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "switchhull_test_bench";
  std::filesystem::create_directories(dir);
  return dir / name;
}

json small_config() {
  return json::parse(R"({
    "n_x": [5, 6], "n_t": [6, 8], "sigma_max": 2,
    "n_x_fine": 8, "n_t_fine": 24,
    "methods": ["exact", "naive", "tailored", "fw"]
  })");
}

std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() > 10) cells[10].clear();
    for (const auto& c : cells) out << c << ',';
    out << '\n';
  }
  return out.str();
}

std::string write_points(const std::string& name, const std::string& body) {
  const auto p = scratch(name);
  std::ofstream(p) << body;
  return p.string();
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = parse_config(json::object());
  EXPECT_EQ(cfg.n_x, std::vector<int>{10});
  EXPECT_EQ(cfg.n_t, std::vector<int>{20});
  EXPECT_EQ(cfg.sigma_max, 2);
  EXPECT_DOUBLE_EQ(cfg.horizon, 2.0);
  EXPECT_TRUE(cfg.leading_zero);
  EXPECT_EQ(cfg.n_x_fine, 100);
  EXPECT_EQ(cfg.n_t_fine, 200);
  auto inst = build_reference_instance(cfg, 10, 20);
  EXPECT_EQ(inst.switches(), 1);
  EXPECT_EQ(inst.intervals(), 20);
}

TEST(Config, ListsAndNestedFields) {
  const auto cfg = parse_config(json::parse(R"({
    "n_x": [10, 15], "n_t": 40, "alpha": 0.5,
    "constraint": {"kind": "dwell", "s": 0.25},
    "y0": {"kind": "random", "amplitude": 2.0},
    "tolerances": {"qp": 1e-9, "fw_gap": 1e-5, "fw_away_steps": false},
    "methods": ["fw", "exact", "fw"],
    "output": {"csv": "a.csv", "log": "b.csv"},
    "seed": 7
  })"));
  EXPECT_EQ(cfg.n_x, (std::vector<int>{10, 15}));
  EXPECT_EQ(cfg.n_t, std::vector<int>{40});
  EXPECT_TRUE(cfg.dwell);
  EXPECT_DOUBLE_EQ(cfg.min_dwell, 0.25);
  EXPECT_EQ(cfg.initial, InitialKind::Random);
  EXPECT_FALSE(cfg.fw_away_steps);
  EXPECT_EQ(cfg.methods, (std::vector<Method>{Method::FrankWolfe, Method::Exact}));
  EXPECT_EQ(cfg.seed, 7u);
}

TEST(Config, RejectionsNameTheField) {
  auto rejects = [](const std::string& text, const std::string& field) {
    try {
      parse_config(json::parse(text));
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
      return;
    }
    ADD_FAILURE() << "accepted: " << text;
  };
  rejects(R"({"nx": 10})", "nx");
  rejects(R"({"n_x": 2})", "n_x");
  rejects(R"({"n_x": [10, "a"]})", "n_x");
  rejects(R"({"n_t": 0})", "n_t");
  rejects(R"({"n_t": 30})", "n_t_fine");
  rejects(R"({"T": -1})", "T");
  rejects(R"({"alpha": -0.1})", "alpha");
  rejects(R"({"sigma_max": "two"})", "sigma_max");
  rejects(R"({"constraint": {"kind": "dwell"}})", "constraint.s");
  rejects(R"({"constraint": {"kind": "dwell", "s": 3.0}})", "constraint.s");
  rejects(R"({"constraint": {"kind": "minup"}})", "constraint.kind");
  rejects(R"({"constraint": {"kind": "bounded", "extra": 1}})", "constraint.extra");
  rejects(R"({"y0": "hot"})", "y0");
  rejects(R"({"tolerances": {"qp_tol": 1}})", "tolerances.qp_tol");
  rejects(R"({"methods": ["gurobi"]})", "methods");
  rejects(R"({"output": {"plot": "x"}})", "output.plot");
  EXPECT_THROW(parse_config(json::array()), ConfigError);
}

TEST(Config, LoadReportsMissingAndMalformedFiles) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
  const auto p = write_points("bad.json", "{ \"n_x\": ");
  EXPECT_THROW(load_config(p), ConfigError);
}

TEST(ReferenceProblem, DesiredStateSamples) {
  const double pi = std::numbers::pi;
  for (double x : {0.1, 0.5, 0.8})
    for (double y : {0.3, 0.5}) EXPECT_DOUBLE_EQ(reference_desired_state(0.5, x, y), 0.0);
  EXPECT_NEAR(reference_desired_state(0.0, 0.5, 0.5), 2.0 * pi * pi, 1e-12);
  EXPECT_NEAR(reference_desired_state(0.0, 0.5, 0.5), 19.739, 1e-3);
}

TEST(ReferenceProblem, InitialStateChoices) {
  BenchConfig cfg;
  EXPECT_FALSE(static_cast<bool>(initial_field(cfg)));
  cfg.initial = InitialKind::Desired;
  EXPECT_DOUBLE_EQ(initial_field(cfg)(0.5, 0.5), reference_desired_state(0.0, 0.5, 0.5));
  cfg.initial = InitialKind::Random;
  cfg.seed = 3;
  const double a = initial_field(cfg)(0.3, 0.6);
  EXPECT_DOUBLE_EQ(initial_field(cfg)(0.3, 0.6), a);
  cfg.seed = 4;
  EXPECT_NE(initial_field(cfg)(0.3, 0.6), a);
  EXPECT_DOUBLE_EQ(initial_field(cfg)(0.0, 0.6), 0.0);
}

TEST(GapArithmetic, HandValues) {
  EXPECT_DOUBLE_EQ(gap_percent(10.0, 6.0), 40.0);
  EXPECT_DOUBLE_EQ(*filled_gap_percent(10.0, 6.0, 7.0), 25.0);
  EXPECT_FALSE(filled_gap_percent(10.0, 10.0, 10.0).has_value());
}

// The reference inputs carry two decimals, so the reproduced percentages can
// only match up to the rounding of the inputs. Every row is reproduced to
// print precision by some inputs that round to the listed ones.
TEST(GapArithmetic, ReferenceRowsConsistentUpToInputRounding) {
  constexpr int steps = 40;
  for (const auto& r : reference::kRows) {
    double best = 1e9;
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j <= steps; ++j)
        for (int k = 0; k <= steps; ++k) {
          const double o = r.exact - 0.005 + 0.01 * i / steps;
          const double n = r.naive - 0.005 + 0.01 * j / steps;
          const double t = r.tailored - 0.005 + 0.01 * k / steps;
          const double err = std::max({std::abs(gap_percent(o, n) - r.naive_gap),
                                       std::abs(gap_percent(o, t) - r.tailored_gap),
                                       std::abs(*filled_gap_percent(o, n, t) - r.filled_gap)});
          best = std::min(best, err);
        }
    EXPECT_LE(best, 0.005) << r.n_x << "/" << r.n_t;
    // Direct evaluation on the rounded inputs is off by at most the rounding
    // propagated through the quotients.
    EXPECT_NEAR(gap_percent(r.exact, r.naive), r.naive_gap, 0.05);
    EXPECT_NEAR(gap_percent(r.exact, r.tailored), r.tailored_gap, 0.05);
    EXPECT_NEAR(*filled_gap_percent(r.exact, r.naive, r.tailored), r.filled_gap, 0.1);
  }
}

TEST(Csv, HeaderAndEmptyFields) {
  EXPECT_STREQ(kCsvHeader,
               "nx,nt,method,objective,bound,gap_pct,filled_gap_pct,cuts,cuts_to_exceed_naive,iterations,"
               "wall_time_s,error");
  ResultRow r = ResultRow::at(10, 20, Method::Tailored);
  r.objective = 13.6912345;
  r.bound = 9.67;
  r.gap = 29.3913;
  r.filled_gap = 23.849;
  r.cuts = 21;
  r.cuts_to_exceed_naive = 5;
  r.iterations = 22;
  r.wall_time = 0.5;
  EXPECT_EQ(format_row(r), "10,20,tailored,13.6912,9.67,29.39,23.85,21,5,22,0.5,");
  ResultRow e = ResultRow::at(10, 20, Method::Exact);
  e.error = "bad, \"quoted\"";
  EXPECT_EQ(format_row(e), "10,20,exact,,,,,,,,0,\"bad, \"\"quoted\"\"\"");
}

TEST(Benchmark, OrderingAndInvariants) {
  const auto cfg = parse_config(small_config());
  const auto out = run_benchmark(cfg);
  EXPECT_TRUE(out.failures.empty());
  ASSERT_EQ(out.rows.size(), 16u);
  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    const auto& r = out.rows[k];
    EXPECT_EQ(r.n_x, k < 8 ? 5 : 6);
    EXPECT_EQ(r.n_t, (k / 4) % 2 == 0 ? 6 : 8);
    EXPECT_EQ(static_cast<int>(r.method), static_cast<int>(k % 4));
    EXPECT_TRUE(r.error.empty()) << r.error;
  }
  for (std::size_t cell = 0; cell < 4; ++cell) {
    const auto& c = out.coarse_rows;
    const double exact = *c[4 * cell].objective;
    const double naive = *c[4 * cell + 1].bound;
    const double tail = *c[4 * cell + 2].bound;
    EXPECT_LE(naive, tail + 1e-6);
    EXPECT_LE(tail, exact + 1e-6);
    EXPECT_LE(*c[4 * cell + 3].bound, exact + 1e-6);
    EXPECT_TRUE(out.rows[4 * cell + 2].cuts.has_value());
    EXPECT_FALSE(out.rows[4 * cell + 1].cuts.has_value());
    EXPECT_FALSE(out.rows[4 * cell].bound.has_value());
  }
  EXPECT_FALSE(out.log.empty());
}

TEST(Benchmark, RerunGivesIdenticalCsvUpToWallTime) {
  auto j = small_config();
  j["y0"] = {{"kind", "random"}, {"amplitude", 1.0}};
  j["seed"] = 11;
  const auto cfg = parse_config(j);
  const auto a = scratch("a.csv").string(), b = scratch("b.csv").string();
  write_rows(a, run_benchmark(cfg).rows);
  write_rows(b, run_benchmark(cfg).rows);
  const std::string sa = slurp(a);
  EXPECT_EQ(sa.substr(0, sa.find('\n')), kCsvHeader);
  EXPECT_EQ(strip_wall_time(sa), strip_wall_time(slurp(b)));
}

TEST(Benchmark, VacuousBudgetLeavesFilledGapEmpty) {
  auto j = small_config();
  j["n_x"] = 5;
  j["n_t"] = 6;
  j["sigma_max"] = 6;
  const auto out = run_benchmark(parse_config(j));
  ASSERT_EQ(out.rows.size(), 4u);
  const auto& c = out.coarse_rows;
  EXPECT_NEAR(*c[1].bound, *c[2].bound, 1e-9);
  EXPECT_EQ(*out.rows[2].cuts, 0);
  EXPECT_FALSE(out.rows[2].filled_gap.has_value());
  const std::string line = format_row(out.rows[2]);
  EXPECT_NE(line.find(",,"), std::string::npos);
}

TEST(Benchmark, DwellRunsExactAndFrankWolfe) {
  auto j = small_config();
  j["n_x"] = 5;
  j["n_t"] = 6;
  j["constraint"] = {{"kind", "dwell"}, {"s", 0.5}};
  const auto out = run_benchmark(parse_config(j));
  ASSERT_EQ(out.rows.size(), 4u);
  EXPECT_TRUE(out.rows[0].error.empty());
  EXPECT_FALSE(out.rows[1].error.empty());  // naive needs bounded switchings
  EXPECT_FALSE(out.rows[2].error.empty());
  EXPECT_TRUE(out.rows[3].error.empty());
  EXPECT_LE(*out.coarse_rows[3].bound, *out.coarse_rows[0].objective + 1e-6);
}

TEST(Separate, DebugOutput) {
  BenchConfig cfg;
  cfg.sigma_max = 1;
  std::vector<double> mid(12, 0.0);
  for (int i = 4; i < 8; ++i) mid[i] = 0.5;
  EXPECT_EQ(separate_debug(cfg, mid), "cut: switch 0 indices (5, 9) signs (+, -) rhs 0 violation 0.5");
  cfg.sigma_max = 2;
  EXPECT_EQ(separate_debug(cfg, {0, 1, 0, 1, 0}), "cut: switch 0 indices (2, 3, 4) signs (+, -, +) rhs 1 violation 1");
  EXPECT_EQ(separate_debug(cfg, std::vector<double>(7, 0.0)), "feasible for all known cuts");
}

TEST(Separate, PointFileParsing) {
  const auto ok = write_points("ok.txt", "0\n0.5\n\n1\n");
  EXPECT_EQ(read_point_file(ok), (std::vector<double>{0.0, 0.5, 1.0}));
  const auto bad = write_points("bad.txt", "0\n0.5\nx\n");
  try {
    read_point_file(bad);
    ADD_FAILURE();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  const auto range = write_points("range.txt", "0\n1.5\n");
  EXPECT_THROW(read_point_file(range), InvalidArgument);
  const auto two = write_points("two.txt", "0 1\n");
  EXPECT_THROW(read_point_file(two), InvalidArgument);
}
