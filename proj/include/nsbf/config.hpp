#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsbf/grid.hpp"
#include "nsbf/spectral.hpp"

namespace nsbf {

// The subset of TOML used by problem files: [section] headers, key = value
// with strings ("..." or '...'), numbers, booleans and one-line arrays of
// those, and # comments. Errors carry the line number (ConfigError).
nlohmann::json parse_toml(std::string_view text);

enum class SearchMode { real, complex };

struct ProblemConfig {
  // exactly one of potential / potential_csv
  std::string potential;
  std::filesystem::path potential_csv;
  std::string particular_solution;  // optional expression for f, f(0) = 1
  double b = 0;

  GridKind grid_kind = GridKind::uniform;
  std::size_t grid_n = 20001;
  int N = 60;

  std::string alpha0 = "1", mu0 = "0", alphab = "1", mub = "0";

  SearchMode mode = SearchMode::real;
  RealSearch real;
  Rectangle rectangle{0, 0, 0, 0};
  int max_zeros = 1000;

  std::string format = "json";  // json | csv
  std::filesystem::path output;  // empty: stdout
};

// Relative paths in the document resolve against base_dir.
ProblemConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

// .json files are read as JSON, anything else as the TOML subset.
ProblemConfig load_config(const std::filesystem::path& path);

struct TabulatedPotential {
  SampledFunction q;
  std::vector<std::string> warnings;
};

// CSV with header "x,re,im" or "x,q"; strictly increasing x covering [0, b].
// Values at the grid nodes come from a modified Akima cubic (exact at
// tabulated nodes); fewer than four rows fall back to linear interpolation.
TabulatedPotential load_tabulated_potential(const std::filesystem::path& csv, const GridPtr& grid);

// q on the grid from whichever source the config names.
SampledFunction potential_samples(const ProblemConfig& cfg, const GridPtr& grid, std::vector<std::string>& warnings);

BoundaryCondition boundary_condition(const ProblemConfig& cfg);

}  // namespace nsbf
