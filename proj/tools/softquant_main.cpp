// Command-line front end: run experiment recipes, sweep the regularization
// grid, verify the solver against its brute-force oracle, list recipes.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "softquant/config.hpp"
#include "softquant/recipes.hpp"
#include "softquant/text_io.hpp"
#include "softquant/verify.hpp"

namespace {

using namespace softquant;

struct RunOverrides {
  std::vector<double> lambdas;
  std::int64_t iterations = -1;
  std::int64_t replicates = -1;
  std::int64_t batch = -1;
  std::int64_t seed = -1;
};

void apply_overrides(ExperimentRecipe& recipe, const RunOverrides& o) {
  if (!o.lambdas.empty()) recipe.lambda_grid = o.lambdas;
  if (o.iterations >= 0) recipe.base.iterations = o.iterations;
  if (o.replicates > 0) recipe.replicates = static_cast<std::size_t>(o.replicates);
  if (o.batch > 0) recipe.base.batch_size = static_cast<std::size_t>(o.batch);
  if (o.seed >= 0) recipe.base.seed = static_cast<std::uint64_t>(o.seed);
}

// A target names either a builtin recipe or a recipe file.
std::vector<ExperimentRecipe> resolve_target(const std::string& target) {
  if (const ExperimentRecipe* builtin = find_builtin(target)) return {*builtin};
  if (!std::filesystem::exists(target))
    throw ConfigError("'" + target + "' is neither a builtin recipe nor a file");
  return parse_recipes_file(target);
}

void print_summary_rows(const std::vector<RunSummaryRow>& rows) {
  for (const RunSummaryRow& row : rows) {
    std::cout << row.recipe << "  lambda=" << format_label(row.lambda)
              << "  seed=" << row.seed << "  distinct=" << row.distinct_count
              << "  objective=" << format_double(row.objective_at_lambda)
              << "  center_distance=" << format_double(row.center_distance)
              << '\n';
  }
}

int run_command(const std::string& target, const std::string& out_dir,
                const RunOverrides& overrides, std::size_t threads) {
  std::vector<ExperimentRecipe> recipes = resolve_target(target);
  for (ExperimentRecipe& recipe : recipes) {
    apply_overrides(recipe, overrides);
    recipe.validate();
    const std::string dir = out_dir + "/" + recipe.name;
    const std::vector<RunSummaryRow> rows = run_recipe(recipe, dir, threads);
    print_summary_rows(rows);
    std::cout << "wrote " << dir << "/" << recipe.name << "_summary.csv\n";
  }
  return 0;
}

int sweep_command(const std::string& target, const std::string& out_dir,
                  double lo, double hi, std::size_t count, bool log_spaced,
                  const RunOverrides& overrides, std::size_t threads) {
  if (count < 2) throw ConfigError("sweep needs at least two grid points");
  if (!(hi > lo)) throw ConfigError("sweep needs lambda-max > lambda-min");
  if (log_spaced && !(lo > 0.0))
    throw ConfigError("log spacing needs lambda-min > 0");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
  RunOverrides with_grid = overrides;
  with_grid.lambdas = grid;
  return run_command(target, out_dir, with_grid, threads);
}

int verify_command(const std::string& out_dir, std::size_t instances,
                   std::uint64_t seed) {
  VerifyOptions opts;
  opts.instances = instances;
  opts.seed = seed;
  const VerifyReport report = run_verification(opts);
  std::cout << report.text;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir + "/verify_report.txt");
    out << report.text;
    std::cout << "wrote " << out_dir << "/verify_report.txt\n";
  }
  return report.passed ? 0 : 1;
}

int list_command() {
  for (const ExperimentRecipe& r : builtin_recipes()) {
    std::cout << r.name << "\n  source: " << describe(r.base.source)
              << "\n  atoms: " << r.base.m << "  order: r=" << r.base.dspec.r
              << " p=" << r.base.dspec.p << "\n  lambda:";
    for (double lambda : r.lambda_grid) std::cout << ' ' << format_label(lambda);
    std::cout << "\n  iterations: " << r.base.iterations
              << "  batch: " << r.base.batch_size << "  seed: " << r.base.seed
              << "  replicates: " << r.replicates << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft quantization experiment runner"};
  app.require_subcommand(1);

  std::string target, out_dir = "out";
  RunOverrides overrides;
  std::size_t threads = 0;

  CLI::App* run = app.add_subcommand("run", "execute a recipe's lambda grid");
  run->add_option("target", target, "builtin recipe name or recipe file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--lambda", overrides.lambdas, "override the lambda grid");
  run->add_option("--iterations", overrides.iterations, "override iteration count");
  run->add_option("--replicates", overrides.replicates, "override replicate count");
  run->add_option("--batch", overrides.batch, "override batch size");
  run->add_option("--seed", overrides.seed, "override base seed");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");

  double lambda_min = 0.01, lambda_max = 1.0;
  std::size_t sweep_count = 8;
  bool log_spaced = false;
  CLI::App* sweep = app.add_subcommand("sweep", "run a dense lambda grid");
  sweep->add_option("target", target, "builtin recipe name or recipe file")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--lambda-min", lambda_min, "grid start")->required();
  sweep->add_option("--lambda-max", lambda_max, "grid end")->required();
  sweep->add_option("--count", sweep_count, "grid size");
  sweep->add_flag("--log", log_spaced, "geometric spacing");
  sweep->add_option("--iterations", overrides.iterations, "override iteration count");
  sweep->add_option("--replicates", overrides.replicates, "override replicate count");
  sweep->add_option("--batch", overrides.batch, "override batch size");
  sweep->add_option("--seed", overrides.seed, "override base seed");
  sweep->add_option("--threads", threads, "worker threads (0 = hardware)");

  std::string verify_out;
  std::size_t instances = 100;
  std::uint64_t verify_seed = 20260816;
  CLI::App* verify = app.add_subcommand("verify", "cross-check solver against the oracle");
  verify->add_option("--out", verify_out, "directory for the report file");
  verify->add_option("--instances", instances, "number of random instances");
  verify->add_option("--seed", verify_seed, "suite seed");

  app.add_subcommand("list-recipes", "show builtin experiment recipes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; genuine argument errors are config errors.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return run_command(target, out_dir, overrides, threads);
    if (sweep->parsed())
      return sweep_command(target, out_dir, lambda_min, lambda_max, sweep_count,
                           log_spaced, overrides, threads);
    if (verify->parsed()) return verify_command(verify_out, instances, verify_seed);
    return list_command();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
