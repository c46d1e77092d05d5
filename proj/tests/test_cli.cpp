#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "softquant/config.hpp"
#include "softquant/oracle.hpp"
#include "softquant/recipes.hpp"
#include "softquant/text_io.hpp"
#include "softquant/verify.hpp"

namespace fs = std::filesystem;

namespace {

using softquant::ConfigError;
using softquant::ExperimentRecipe;
using softquant::InitKind;
using softquant::LearningRate;
using softquant::RunSummaryRow;
using softquant::VerifyOptions;
using softquant::VerifyReport;

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const char* leaf) {
  const fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A recipe small enough to run inside a unit test.
ExperimentRecipe tiny_recipe() {
  ExperimentRecipe r;
  r.name = "tiny";
  r.base.source = softquant::SourceSpec::normal1d(0.0, 1.0);
  r.base.dspec = softquant::DistanceSpec{2.0, 2.0, {}};
  r.base.m = 2;
  r.base.iterations = 200;
  r.base.batch_size = 2;
  r.base.seed = 42;
  r.lambda_grid = {1.0, 0.0};  // deliberately unsorted
  r.replicates = 2;
  r.eval_samples = 500;
  r.outputs.cdf = true;
  return r;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("a full recipe text round-trips every key") {
  const std::string text = R"(# demo configuration
[recipe demo]
source = normal1d mean=1.5 stddev=2.0
m = 6
p = 2
r = 2
lambda = 0, 0.5, 2
iterations = 1234
batch = 4
seed = 42
replicates = 2
init = quantile-spread
init_band = 0.25 0.75
lr_scale = auto
lr_offset = 25
lr_exponent = 0.75
merge_radius = 0.05
warm_start = true
cycles = 1 2 1
eval_samples = 512
objective_samples = 256
snapshot_every = 100
outputs = final cdf trajectory tessellation
)";
  const std::vector<ExperimentRecipe> recipes =
      softquant::parse_recipes_text(text);
  REQUIRE(recipes.size() == 1);
  const ExperimentRecipe& r = recipes.front();

  CHECK(r.name == "demo");
  CHECK(r.base.source.total_variance() == doctest::Approx(4.0));
  CHECK(softquant::describe(r.base.source).find("normal1d") != std::string::npos);
  CHECK(r.base.m == 6);
  CHECK(r.base.dspec.p == 2.0);
  CHECK(r.base.dspec.r == 2.0);
  CHECK(r.lambda_grid == std::vector<double>{0.0, 0.5, 2.0});
  CHECK(r.base.iterations == 1234);
  CHECK(r.base.batch_size == 4);
  CHECK(r.base.seed == 42);
  CHECK(r.replicates == 2);
  CHECK(r.base.init == InitKind::QuantileSpread);
  CHECK(r.base.init_band_lo == 0.25);
  CHECK(r.base.init_band_hi == 0.75);
  CHECK(r.base.lr.scale == LearningRate::kAutoScale);
  CHECK(r.base.lr.offset == 25.0);
  CHECK(r.base.lr.exponent == 0.75);
  CHECK(r.merge_radius == 0.05);
  CHECK(r.warm_start);
  CHECK(r.cycles == std::vector<std::size_t>{1, 2, 1});
  CHECK(r.eval_samples == 512);
  CHECK(r.base.objective_samples == 256);
  CHECK(r.base.snapshot_every == 100);
  CHECK(r.outputs.final_state);
  CHECK(r.outputs.cdf);
  CHECK(r.outputs.trajectory);
  CHECK(r.outputs.tessellation);
}

TEST_CASE("source descriptions cover every family") {
  auto parse_one = [](const std::string& source_line) {
    const std::vector<ExperimentRecipe> recipes = softquant::parse_recipes_text(
        "[recipe t]\n" + source_line + "\nlambda = 1\n");
    return recipes.front().base.source;
  };

  CHECK(parse_one("source = exponential rate=2").total_variance() ==
        doctest::Approx(0.25));
  CHECK(parse_one("source = gamma shape=2 scale=2").total_variance() ==
        doctest::Approx(8.0));
  CHECK(parse_one("source = uniform_box lo=0,0 hi=1,1").total_variance() ==
        doctest::Approx(2.0 / 12.0));
  CHECK(parse_one("source = mvnormal mean=0,0 cov=3,1,1,3").total_variance() ==
        doctest::Approx(6.0));

  const fs::path dir = fresh_dir("softquant_cli_points");
  {
    std::ofstream out(dir / "pts.txt");
    out << "# two atoms\n0\n2\n";
  }
  CHECK(parse_one("source = empirical file=" + (dir / "pts.txt").string())
            .total_variance() == doctest::Approx(1.0));

  SUBCASE("per-coordinate weights attach to the distance") {
    const std::vector<ExperimentRecipe> recipes = softquant::parse_recipes_text(
        "[recipe t]\nsource = uniform_box lo=0,0 hi=1,1\n"
        "coord_weights = 2 1\nlambda = 1\n");
    CHECK(recipes.front().base.dspec.coord_weights ==
          std::vector<double>{2.0, 1.0});
  }
}

TEST_CASE("parse errors carry the offending line") {
  using softquant::parse_recipes_text;

  CHECK_THROWS_WITH_AS(parse_recipes_text("m = 2\n"),
                       "line 1: key outside [recipe ...] section", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t\n"),
                       "line 1: unterminated section header", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe]\n"),
                       "line 1: expected [recipe NAME]", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[settings t]\n"),
                       "line 1: expected [recipe NAME]", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\njust words\n"),
                       "line 2: expected key = value", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\nm =\n"),
                       "line 2: expected key = value", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\nwidth = 2\n"),
                       "line 2: unknown key 'width'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\nm = abc\n"),
                       "line 2: bad number 'abc'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\niterations = -5\n"),
                       "line 2: iterations must be a non-negative integer",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\nlambda = ,\n"),
                       "line 2: empty value list", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\nsource = cauchy scale=1\n"),
                       "line 2: unknown source 'cauchy'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_recipes_text("[recipe t]\nsource = normal1d mu=0 stddev=1\n"),
      "line 2: unknown source parameter 'mu'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_recipes_text("[recipe t]\nsource = normal1d mean=0\n"),
      "line 2: source parameter 'stddev' missing", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_recipes_text("[recipe t]\nsource = normal1d mean\n"),
      "line 2: expected key=value, got 'mean'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_recipes_text("[recipe t]\nsource = mvnormal mean=0,0 cov=1,0,0\n"),
      "line 2: covariance needs dim*dim row-major entries", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\ninit = random\n"),
                       "line 2: unknown init 'random'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\nwarm_start = yes\n"),
                       "line 2: warm_start must be 'true' or 'false'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\ninit_band = 0.1 0.5 0.9\n"),
                       "line 2: init_band needs exactly two levels", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\ncycles = 0\n"),
                       "line 2: cycles must be positive integers", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\ncycles = 1.5\n"),
                       "line 2: cycles must be positive integers", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("[recipe t]\noutputs = pictures\n"),
                       "line 2: unknown output 'pictures'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text(""),
                       "no [recipe ...] sections found", ConfigError);
  CHECK_THROWS_WITH_AS(parse_recipes_text("# only a comment\n"),
                       "no [recipe ...] sections found", ConfigError);
}

TEST_CASE("semantic problems are reported against the recipe name") {
  CHECK_THROWS_WITH_AS(
      softquant::parse_recipes_text(
          "[recipe bad]\nsource = normal1d mean=0 stddev=1\nlambda = 0.5\nm = 0\n"),
      "recipe 'bad': need at least one atom", ConfigError);
  CHECK_THROWS_WITH_AS(
      softquant::parse_recipes_text("[recipe t]\nsource = normal1d mean=0 stddev=1\n"),
      "recipe 't': empty lambda grid", ConfigError);
  CHECK_THROWS_WITH_AS(
      softquant::parse_recipes_text(
          "[recipe t]\nsource = normal1d mean=0 stddev=1\nlambda = 0,1\ncycles = 1 2 1\n"),
      "recipe 't': cycles needs one entry, or one entry per grid lambda",
      ConfigError);
}

TEST_CASE("recipe files parse like inline text") {
  const fs::path dir = fresh_dir("softquant_cli_recipes");
  const fs::path file = dir / "exp.recipe";
  {
    std::ofstream out(file);
    out << "[recipe from_file]\n"
           "source = exponential rate=1\n"
           "lambda = 0 1   # trailing comment\n"
           "m = 3\n";
  }
  const auto recipes = softquant::parse_recipes_file(file.string());
  REQUIRE(recipes.size() == 1);
  CHECK(recipes.front().name == "from_file");
  CHECK(recipes.front().base.m == 3);

  CHECK_THROWS_WITH_AS(softquant::parse_recipes_file((dir / "nope.recipe").string()),
                       ("cannot open recipe file '" + (dir / "nope.recipe").string() +
                        "'").c_str(),
                       ConfigError);
}

TEST_CASE("builtin experiments are named, valid, and findable") {
  const std::vector<ExperimentRecipe> all = softquant::builtin_recipes();
  const std::vector<std::string> expected{"normal1d-m8",    "exp1-m8",
                                          "gamma22-m8",     "uniform2d-m4",
                                          "uniform2d-m16",  "mvnormal2d-m100"};
  REQUIRE(all.size() == expected.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(all[i].name == expected[i]);
    CHECK_NOTHROW(all[i].validate());
    const ExperimentRecipe* found = softquant::find_builtin(expected[i]);
    REQUIRE(found != nullptr);
    CHECK(found->name == expected[i]);
  }
  CHECK(softquant::find_builtin("no-such-experiment") == nullptr);

  // The 16-atom experiment anneals through its grid in continuation order,
  // not ascending order; the parser and validator must both accept that.
  const ExperimentRecipe* m16 = softquant::find_builtin("uniform2d-m16");
  REQUIRE(m16 != nullptr);
  CHECK(m16->warm_start);
  CHECK(m16->lambda_grid == std::vector<double>{0.0, 0.1, 0.037, 1.0});
}

TEST_CASE("running a recipe writes a reproducible battery of artifacts") {
  const ExperimentRecipe recipe = tiny_recipe();
  const fs::path dir = fresh_dir("softquant_cli_run");

  const std::vector<RunSummaryRow> rows =
      softquant::run_recipe(recipe, dir.string(), 1);
  REQUIRE(rows.size() == 4);  // two lambdas x two seeds

  SUBCASE("rows come back sorted by grid point then seed") {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const bool ordered =
          rows[i - 1].lambda < rows[i].lambda ||
          (rows[i - 1].lambda == rows[i].lambda && rows[i - 1].seed < rows[i].seed);
      CHECK(ordered);
    }
    CHECK(rows.front().lambda == 0.0);
    CHECK(rows.back().lambda == 1.0);
    for (const RunSummaryRow& row : rows) {
      CHECK(row.recipe == "tiny");
      CHECK(row.distinct_count >= 1);
      CHECK(row.heavy_atoms >= 1);
      CHECK(row.center_distance >= 0.0);
      CHECK(row.final_state.locations.size() == 2);
    }
  }

  SUBCASE("every advertised artifact exists") {
    CHECK(fs::exists(dir / "tiny_summary.csv"));
    for (double lambda : {0.0, 1.0}) {
      for (std::uint64_t seed : {42ull, 43ull}) {
        const std::string prefix = "tiny_lam" + softquant::format_label(lambda) +
                                   "_seed" + std::to_string(seed);
        CHECK(fs::exists(dir / (prefix + "_final.csv")));
        CHECK(fs::exists(dir / (prefix + "_cdf.csv")));
        CHECK(fs::exists(dir / (prefix + "_summary.txt")));
        CHECK_FALSE(fs::exists(dir / (prefix + "_trajectory.csv")));
      }
    }
  }

  SUBCASE("a rerun reproduces the summary byte for byte") {
    const std::string first = read_file(dir / "tiny_summary.csv");
    const fs::path again = fresh_dir("softquant_cli_run2");
    softquant::run_recipe(recipe, again.string(), 1);
    CHECK(first == read_file(again / "tiny_summary.csv"));
  }

  SUBCASE("the file-free variant computes identical rows") {
    const std::vector<RunSummaryRow> dry = softquant::run_recipe_rows(recipe, 1);
    REQUIRE(dry.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(dry[i].lambda == rows[i].lambda);
      CHECK(dry[i].seed == rows[i].seed);
      CHECK(dry[i].distinct_count == rows[i].distinct_count);
      CHECK(dry[i].heavy_atoms == rows[i].heavy_atoms);
      CHECK(dry[i].objective_at_lambda == rows[i].objective_at_lambda);
      CHECK(dry[i].objective_at_zero == rows[i].objective_at_zero);
      CHECK(dry[i].final_state.locations == rows[i].final_state.locations);
    }
  }
}

TEST_CASE("warm starts and restart cycles run end to end") {
  ExperimentRecipe recipe = tiny_recipe();
  recipe.name = "warm";
  recipe.lambda_grid = {0.0, 0.5};
  recipe.replicates = 1;
  recipe.warm_start = true;
  recipe.cycles = {1, 2};
  const std::vector<RunSummaryRow> rows = softquant::run_recipe_rows(recipe, 1);
  REQUIRE(rows.size() == 2);
  const std::vector<RunSummaryRow> again = softquant::run_recipe_rows(recipe, 1);
  CHECK(rows[1].final_state.locations == again[1].final_state.locations);
}

TEST_CASE("the self-check battery certifies the transport oracle") {
  VerifyOptions opts;
  opts.instances = 25;
  opts.seed = 11;

  const VerifyReport report = softquant::run_verification(opts);
  CHECK(report.passed);
  CHECK(report.failures == 0);
  CHECK(report.text.find("transport_instances: 25") != std::string::npos);
  CHECK(report.text.find("overall: pass") != std::string::npos);
  CHECK(report.text.find("FAIL") == std::string::npos);

  SUBCASE("the report is deterministic") {
    CHECK(softquant::run_verification(opts).text == report.text);
  }

  SUBCASE("a corrupted reference is caught") {
    // Scale the reference value by 1/lambda; the instance generator never
    // draws lambda = 1, so every instance disagrees with brute force.
    opts.closed_form = [](const softquant::DiscreteInstance& inst) {
      return softquant::closed_form_value(inst) / inst.lambda;
    };
    const VerifyReport broken = softquant::run_verification(opts);
    CHECK_FALSE(broken.passed);
    CHECK(broken.failures > 0);
    CHECK(broken.text.find("transport_closed_vs_brute: FAIL") != std::string::npos);
    CHECK(broken.text.find("overall: fail") != std::string::npos);
  }
}

}  // TEST_SUITE("cli")
