#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "switchhull/switchhull.hpp"

using namespace switchhull;

namespace {

int benchmark(const std::string& path) {
  const BenchConfig cfg = load_config(path);
  const BenchOutcome out = run_benchmark(cfg);
  write_rows(cfg.csv_path, out.rows);
  write_log(cfg.log_path, out.log);
  if (!cfg.coarse_csv_path.empty()) write_rows(cfg.coarse_csv_path, out.coarse_rows);
  std::cout << kCsvHeader << '\n';
  for (const auto& r : out.rows) std::cout << format_row(r) << '\n';
  for (const auto& f : out.failures) std::cerr << "invariant violated: " << f << '\n';
  return out.failures.empty() ? 0 : 1;
}

int solve(const std::string& path, const std::string& method_name_arg) {
  BenchConfig cfg = load_config(path);
  const auto m = parse_method(method_name_arg);
  if (!m) throw InvalidArgument("unknown method '" + method_name_arg + "'");
  cfg.methods = {*m};
  const auto problem = build_reference_problem(cfg);
  const Instance fine = Instance::discretize(problem, cfg.n_x_fine, cfg.n_t_fine);
  std::cout << kCsvHeader << '\n';
  bool ok = true;
  for (int nx : cfg.n_x)
    for (int nt : cfg.n_t) {
      const CellOutcome cell = run_cell(cfg, problem, fine, nx, nt);
      for (const auto& r : cell.rows) {
        std::cout << format_row(r) << '\n';
        ok = ok && r.error.empty();
      }
      for (const auto& f : cell.failures) std::cerr << "invariant violated: " << f << '\n';
      ok = ok && cell.failures.empty();
    }
  return ok ? 0 : 1;
}

int separate(const std::string& config_path, const std::string& point_path) {
  const BenchConfig cfg = load_config(config_path);
  std::cout << separate_debug(cfg, read_point_file(point_path)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounds for switched heat control"};
  app.require_subcommand(1);

  std::string config, point, method;
  auto* bench_cmd = app.add_subcommand("benchmark", "run every method on every grid in the config");
  bench_cmd->add_option("config", config, "JSON config")->required()->check(CLI::ExistingFile);

  auto* solve_cmd = app.add_subcommand("solve", "run one method");
  solve_cmd->add_option("--method", method, "exact, naive, tailored or fw")
      ->required()
      ->check(CLI::IsMember({"exact", "naive", "tailored", "fw"}));
  solve_cmd->add_option("config", config, "JSON config")->required()->check(CLI::ExistingFile);

  auto* sep_cmd = app.add_subcommand("separate", "find the most violated alternating inequality");
  sep_cmd->add_option("config", config, "JSON config")->required()->check(CLI::ExistingFile);
  sep_cmd->add_option("point", point, "one value per line")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*bench_cmd) return benchmark(config);
    if (*solve_cmd) return solve(config, method);
    return separate(config, point);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
