#include "softquant/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace softquant {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::vector<double> parse_number_list(const std::string& s, int line) {
  // Accepts both whitespace- and comma-separated values.
  std::string normalized = s;
  for (char& c : normalized)
    if (c == ',') c = ' ';
  std::vector<double> out;
  for (const std::string& tok : split_ws(normalized))
    out.push_back(parse_number(tok, line));
  if (out.empty())
    throw ConfigError("line " + std::to_string(line) + ": empty value list");
  return out;
}

// "name key=value key=value" source descriptions.
SourceSpec parse_source(const std::string& value, int line) {
  const std::vector<std::string> parts = split_ws(value);
  if (parts.empty()) throw ConfigError("line " + std::to_string(line) + ": empty source");
  const std::string& kind = parts.front();

  auto params = [&](std::initializer_list<const char*> names) {
    std::vector<std::string> out(names.size());
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(line) + ": expected key=value, got '" +
                          parts[i] + "'");
      const std::string key = parts[i].substr(0, eq);
      bool known = false;
      std::size_t slot = 0;
      for (const char* name : names) {
        if (key == name) {
          known = true;
          break;
        }
        ++slot;
      }
      if (!known)
        throw ConfigError("line " + std::to_string(line) + ": unknown source parameter '" +
                          key + "'");
      out[slot] = parts[i].substr(eq + 1);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out[i].empty())
        throw ConfigError("line " + std::to_string(line) + ": source parameter '" +
                          std::string(names.begin()[i]) + "' missing");
    return out;
  };

  try {
    if (kind == "normal1d") {
      const auto v = params({"mean", "stddev"});
      return SourceSpec::normal1d(parse_number(v[0], line), parse_number(v[1], line));
    }
    if (kind == "exponential") {
      const auto v = params({"rate"});
      return SourceSpec::exponential(parse_number(v[0], line));
    }
    if (kind == "gamma") {
      const auto v = params({"shape", "scale"});
      return SourceSpec::gamma(parse_number(v[0], line), parse_number(v[1], line));
    }
    if (kind == "uniform_box") {
      const auto v = params({"lo", "hi"});
      return SourceSpec::uniform_box(parse_number_list(v[0], line),
                                     parse_number_list(v[1], line));
    }
    if (kind == "mvnormal") {
      const auto v = params({"mean", "cov"});
      const std::vector<double> mean = parse_number_list(v[0], line);
      const std::vector<double> flat = parse_number_list(v[1], line);
      const std::size_t d = mean.size();
      if (flat.size() != d * d)
        throw ConfigError("line " + std::to_string(line) +
                          ": covariance needs dim*dim row-major entries");
      Matrix cov(d, d);
      cov.data = flat;
      return SourceSpec::mvnormal(mean, cov);
    }
    if (kind == "empirical") {
      const auto v = params({"file"});
      std::ifstream in(v[0]);
      if (!in) throw ConfigError("line " + std::to_string(line) +
                                 ": cannot open points file '" + v[0] + "'");
      std::vector<Point> points;
      std::string row;
      int file_line = 0;
      while (std::getline(in, row)) {
        ++file_line;
        const std::string t = trim(row);
        if (t.empty() || t.front() == '#') continue;
        points.push_back(parse_number_list(t, file_line));
      }
      return SourceSpec::empirical(std::move(points));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("line " + std::to_string(line) + ": " + e.what());
  }
  throw ConfigError("line " + std::to_string(line) + ": unknown source '" + kind + "'");
}

void apply_key(ExperimentRecipe& recipe, const std::string& key,
               const std::string& value, int line) {
  auto as_count = [&](const char* what) {
    const double v = parse_number(value, line);
    if (v < 0 || v != std::floor(v))
      throw ConfigError("line " + std::to_string(line) + ": " + what +
                        " must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
  };

  if (key == "source") {
    recipe.base.source = parse_source(value, line);
  } else if (key == "m") {
    recipe.base.m = static_cast<std::size_t>(as_count("m"));
  } else if (key == "p") {
    recipe.base.dspec.p = parse_number(value, line);
  } else if (key == "r") {
    recipe.base.dspec.r = parse_number(value, line);
  } else if (key == "coord_weights") {
    recipe.base.dspec.coord_weights = parse_number_list(value, line);
  } else if (key == "lambda") {
    recipe.lambda_grid = parse_number_list(value, line);
  } else if (key == "iterations") {
    recipe.base.iterations = static_cast<std::int64_t>(as_count("iterations"));
  } else if (key == "batch") {
    recipe.base.batch_size = static_cast<std::size_t>(as_count("batch"));
  } else if (key == "seed") {
    recipe.base.seed = as_count("seed");
  } else if (key == "replicates") {
    recipe.replicates = static_cast<std::size_t>(as_count("replicates"));
  } else if (key == "init") {
    if (value == "quantile-spread")
      recipe.base.init = InitKind::QuantileSpread;
    else if (value == "sample-m-points")
      recipe.base.init = InitKind::SampleMPoints;
    else
      throw ConfigError("line " + std::to_string(line) + ": unknown init '" + value + "'");
  } else if (key == "lr_scale") {
    recipe.base.lr.scale =
        value == "auto" ? LearningRate::kAutoScale : parse_number(value, line);
  } else if (key == "lr_offset") {
    recipe.base.lr.offset = parse_number(value, line);
  } else if (key == "lr_exponent") {
    recipe.base.lr.exponent = parse_number(value, line);
  } else if (key == "merge_radius") {
    recipe.merge_radius =
        value == "auto" ? ExperimentRecipe::kAutoRadius : parse_number(value, line);
  } else if (key == "warm_start") {
    if (value == "true")
      recipe.warm_start = true;
    else if (value == "false")
      recipe.warm_start = false;
    else
      throw ConfigError("line " + std::to_string(line) +
                        ": warm_start must be 'true' or 'false'");
  } else if (key == "init_band") {
    const std::vector<double> band = parse_number_list(value, line);
    if (band.size() != 2)
      throw ConfigError("line " + std::to_string(line) +
                        ": init_band needs exactly two levels");
    recipe.base.init_band_lo = band[0];
    recipe.base.init_band_hi = band[1];
  } else if (key == "cycles") {
    recipe.cycles.clear();
    for (double v : parse_number_list(value, line)) {
      if (v < 1 || v != std::floor(v))
        throw ConfigError("line " + std::to_string(line) +
                          ": cycles must be positive integers");
      recipe.cycles.push_back(static_cast<std::size_t>(v));
    }
  } else if (key == "eval_samples") {
    recipe.eval_samples = static_cast<std::size_t>(as_count("eval_samples"));
  } else if (key == "objective_samples") {
    recipe.base.objective_samples =
        static_cast<std::size_t>(as_count("objective_samples"));
  } else if (key == "snapshot_every") {
    recipe.base.snapshot_every = static_cast<std::int64_t>(as_count("snapshot_every"));
  } else if (key == "outputs") {
    recipe.outputs = OutputFlags{};
    recipe.outputs.final_state = false;
    for (const std::string& tok : split_ws(value)) {
      if (tok == "trajectory")
        recipe.outputs.trajectory = true;
      else if (tok == "final")
        recipe.outputs.final_state = true;
      else if (tok == "cdf")
        recipe.outputs.cdf = true;
      else if (tok == "tessellation")
        recipe.outputs.tessellation = true;
      else
        throw ConfigError("line " + std::to_string(line) + ": unknown output '" + tok + "'");
    }
  } else {
    throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
  }
}

}  // namespace

std::vector<ExperimentRecipe> parse_recipes_text(const std::string& text) {
  std::vector<ExperimentRecipe> recipes;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool in_section = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    const auto comment = s.find('#');
    if (comment != std::string::npos) s = trim(s.substr(0, comment));
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("line " + std::to_string(line) + ": unterminated section header");
      const std::vector<std::string> parts = split_ws(s.substr(1, s.size() - 2));
      if (parts.size() != 2 || parts[0] != "recipe" || parts[1].empty())
        throw ConfigError("line " + std::to_string(line) +
                          ": expected [recipe NAME]");
      ExperimentRecipe recipe;
      recipe.name = parts[1];
      recipe.base.snapshot_every = 0;
      recipes.push_back(std::move(recipe));
      in_section = true;
      continue;
    }

    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    if (!in_section)
      throw ConfigError("line " + std::to_string(line) + ": key outside [recipe ...] section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    apply_key(recipes.back(), key, value, line);
  }
  if (recipes.empty()) throw ConfigError("no [recipe ...] sections found");
  for (ExperimentRecipe& recipe : recipes) {
    try {
      recipe.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("recipe '" + recipe.name + "': " + e.what());
    }
  }
  return recipes;
}

std::vector<ExperimentRecipe> parse_recipes_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open recipe file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_recipes_text(buf.str());
}

}  // namespace softquant
