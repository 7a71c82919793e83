#pragma once

#include "emh/envelope.hpp"
#include "emh/surface.hpp"

#include <optional>
#include <string>
#include <vector>

namespace emh {

/// Regular grid over a parameter box. Nodes sit at cell centers,
/// lo + (hi - lo) (2k + 1) / (2 n), so a periodic box [0, 2pi) is sampled without
/// repeating the endpoint.
struct SeedGrid {
    std::vector<Interval> box;
    std::vector<int> counts;

    std::size_t size() const;
    /// Nodes in row-major order, the last parameter varying fastest.
    std::vector<std::vector<double>> nodes() const;
};

struct SolverConfig {
    double tolerance = 1e-10;
    int max_iterations = 50;
    double damping = 0.5;
    int max_halvings = 20;
    double transversality_min = 1e-6;
    double dedup_radius = 1e-6;
    SeedGrid grid1, grid2;
    /// Per-parameter periods (0 = not periodic). Converged p2 values are wrapped
    /// into [grid2 lo, lo + period) so copies of one root dedupe.
    std::vector<double> periods;
    /// 0 picks the hardware concurrency.
    int threads = 1;
    /// Attach the regularity determinant and the contact conic to each solution.
    bool diagnostics = true;
    /// Jet order used for the emitted solutions (Newton itself runs on order 2).
    int jet_order = 3;

    /// Throws a config error naming the first invalid field.
    void validate(int dim) const;
};

enum class SeedStatus { converged, duplicate, diverged, rejected_transversality, rejected_domain, rejected_degenerate };

const char* to_string(SeedStatus s) noexcept;

struct RefineResult {
    SeedStatus status = SeedStatus::diverged;
    std::vector<double> p2;
    double residual = 0.0; // max |solvability residual| at p2
    int iterations = 0;
    std::string message;
};

/// Damped Newton on p2 -> solvability_residual with p1 fixed. The Jacobian is a
/// central difference with step 1e-6 times each domain width.
RefineResult refine_pair(const Surface& s1, std::span<const double> p1, const Surface& s2,
                         std::span<const double> seed2, const SolverConfig& cfg);

struct SeedRecord {
    std::size_t seed_index = 0;
    std::vector<double> p1, seed2;
    RefineResult result;
    /// Index into SolutionSet::solutions for converged seeds.
    std::optional<std::size_t> solution;
};

struct SolutionSet {
    std::vector<EnvelopeSolution> solutions;
    std::vector<std::size_t> solution_seed; // seed index of each solution
    std::vector<SeedRecord> seeds;          // one per seed, by seed index

    std::size_t count(SeedStatus s) const;
};

/// Every (p1 node, p2 node) of the two grids is a seed; seed index is
/// i1 * |grid2| + i2. Output is independent of the thread count.
SolutionSet sweep(const Surface& s1, const Surface& s2, const SolverConfig& cfg);

struct SolutionCheck {
    double solvability = 0.0;  // max |solvability residual|
    double plane = 0.0;        // |F(X)|, relative
    double derivatives = 0.0;  // max |dF/dq| by central differences in the parameters (step 1e-6), relative
    bool ok = false;
};

/// Re-verifies a solution from the surfaces alone.
SolutionCheck verify_solution(const Surface& s1, const Surface& s2, const EnvelopeSolution& sol,
                              const SolverConfig& cfg);

/// Builds the pair at (p1, p2), computes X and, with cfg.diagnostics, Delta and the
/// contact conic. Failures of the diagnostics leave the optional fields empty.
EnvelopeSolution solve_pair(const Surface& s1, std::span<const double> p1, const Surface& s2,
                            std::span<const double> p2, const SolverConfig& cfg);

} // namespace emh
