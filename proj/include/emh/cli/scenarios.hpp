#pragma once

#include "emh/solver.hpp"
#include "emh/surface.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace emh::cli {

struct PropertyResult {
    std::string name;
    bool pass = false;
    double value = 0.0;     // the measured worst case
    double tolerance = 0.0;
    std::string detail;
};

struct ScenarioInstance;

/// Machine-checkable expected property of a scenario, evaluated on a sweep result.
struct Property {
    std::string name;
    std::string description;
    double tolerance = 0.0;
    std::function<PropertyResult(const ScenarioInstance&, const SolutionSet&)> check;
};

struct ScenarioInstance {
    std::string name;
    Surface s1, s2;
    SolverConfig solver;
    std::vector<Property> properties;
    /// Free-form facts about the instance (reflection plane, conic center, ...).
    std::map<std::string, double> facts;
};

struct Scenario {
    std::string name;
    std::string description;
    std::map<std::string, double> defaults;
    std::function<ScenarioInstance(const std::map<std::string, double>&)> make;

    /// Unknown parameter names are a config error.
    ScenarioInstance instantiate(const std::map<std::string, double>& overrides = {}) const;
};

const std::vector<Scenario>& scenario_library();
const Scenario& find_scenario(const std::string& name);

std::vector<PropertyResult> check_properties(const ScenarioInstance& inst, const SolutionSet& set);

/// |h_B(psi_t, psi_theta)| at a parameter point, Blaschke metric.
double blaschke_cross_term(const Surface& s, std::span<const double> params);

/// Normal-form reflection defect at a solution: max over (a + b, a_i + b_i) and
/// (delta - 1), relative to the coefficient scale. Zero for a pair (p, rho p) of a
/// mirror pair, since rho acts as z -> -z in normal-form coordinates.
double reflection_defect(const EnvelopeSolution& sol);

} // namespace emh::cli
