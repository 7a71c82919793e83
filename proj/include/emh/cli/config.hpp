#pragma once

#include "emh/solver.hpp"
#include "emh/surface.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emh::cli {

struct OutputSpec {
    std::string csv, obj, json; // empty = not written
};

/// A run: either a named scenario (with parameter overrides) or two explicit surfaces.
struct RunConfig {
    std::optional<std::string> scenario;
    std::map<std::string, double> parameters;
    std::vector<Surface> surfaces;
    /// Applies the `solver:` block on top of defaults (the scenario's, or SolverConfig{}).
    std::function<SolverConfig(const SolverConfig&)> solver_overlay;
    OutputSpec outputs;
    std::string source = "<config>";
};

/// Parses the YAML document. Numbers may be written as plain decimals or as
/// constant formulas in the surface grammar with `pi`, e.g. "2*pi".
/// Errors carry the source name and the 1-based line.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Solver block from YAML text (same schema as the `solver:` section).
SolverConfig parse_solver(const std::string& text, const std::string& source = "<solver>");

/// "n1xn2[,n3xn4]" -> counts of grid1 and grid2 (grid2 = grid1 when omitted).
std::pair<std::vector<int>, std::vector<int>> parse_grid_spec(const std::string& spec);

double parse_number(const std::string& text);

} // namespace emh::cli
