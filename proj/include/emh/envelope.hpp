#pragma once

#include "emh/jet.hpp"
#include "emh/linalg.hpp"
#include "emh/surface.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emh {

struct PairOptions {
    double min_transversality = 1e-6;
    /// Order of the surface jets kept in the pair (>= 2; 3 enables exact JG1).
    int jet_order = 2;
};

/// Everything the envelope formulas need for one pair (p1, p2).
///
/// Y1, Y2 are the h-orthogonal directions scaled to unit length in parameter
/// coordinates, so for a graph in Monge form Y_i is exactly psi_u.
struct PairConfiguration {
    SurfaceJet j1, j2;
    TransversalFrame f1, f2;
    Vec mid_point;  // M = (p1 + p2) / 2
    Vec mid_chord;  // C = (p1 - p2) / 2
    AffineSubspace z;
    Vec y1, y2;
    Vec y1_coords, y2_coords;

    double nu1_c = 0.0, nu2_c = 0.0;   // nu_i(C)
    double nu2_y1 = 0.0, nu1_y2 = 0.0; // cross evaluations, nonzero under transversality
    double h1_y1 = 0.0, h2_y2 = 0.0;   // h_i(Y_i, Y_i)
    double lambda = 0.0;
    double a = 0.0;      // coefficient of Y1 in C
    double b = 0.0;      // -h1(Y1, Y1) / nu2(Y1)
    double kappa = 0.0;  // lambda nu2(Y1) / nu1(Y2)
    std::vector<double> alpha; // coefficients of C along the Z directions
    bool convex = false;

    /// nu1(C) + lambda nu2(C); zero iff the first three equations are solvable.
    double condition() const { return nu1_c + lambda * nu2_c; }
    /// B = -lambda A / (lambda + 4 A b); nullopt when the denominator vanishes.
    std::optional<double> big_b() const;
    int dim() const { return j1.dim(); }
};

PairConfiguration build_pair(const Surface& s1, std::span<const double> p1, const Surface& s2,
                             std::span<const double> p2, const PairOptions& opts = {});
PairConfiguration build_pair(SurfaceJet j1, SurfaceJet j2, const PairOptions& opts = {});

/// Lowest-level assembly from explicit frames and directions; used to check the
/// invariance of the construction under rescaling of nu, h and Y.
PairConfiguration assemble_pair(SurfaceJet j1, TransversalFrame f1, Vec y1, SurfaceJet j2, TransversalFrame f2,
                                Vec y2, AffineSubspace z);

/// The mid-hyperplane {X : normal . X = offset}.
struct MidPlane {
    Vec normal;
    double offset = 0.0;

    double evaluate(const Vec& x) const { return normal.dot(x) - offset; }
};

MidPlane mid_plane(const PairConfiguration& pc);

/// N scale-free components: the normalized condition nu1(C) + lambda nu2(C), then
/// alpha_j / |C|. All zero iff the pair contributes a point of the envelope.
std::vector<double> solvability_residual(const PairConfiguration& pc);
double max_abs(std::span<const double> v);

enum class ConicClass { ellipse, hyperbola, degenerate };
const char* to_string(ConicClass c) noexcept;
ConicClass conic_class_from_string(const std::string& s);

struct ConicSummary {
    ConicClass conic_class = ConicClass::degenerate;
    double center_distance = 0.0;
    double contact_det = 0.0;
};

struct EnvelopeResiduals {
    std::vector<double> solvability;
    double plane = 0.0;               // F(X), relative
    std::vector<double> derivatives;  // dF/dq at X for every pair parameter, relative
    double max() const;
};

struct EnvelopeSolution {
    Vec x;
    PairConfiguration pair;
    EnvelopeResiduals residuals;
    std::optional<double> delta;
    std::optional<bool> smooth;
    std::optional<ConicSummary> conic;

    std::vector<double> p1() const { return pair.j1.params; }
    std::vector<double> p2() const { return pair.j2.params; }
};

/// X = M + B (Y1 + kappa Y2). Throws point_at_infinity when lambda + 4Ab = 0.
EnvelopeSolution envelope_point(const PairConfiguration& pc);

struct LinearOracleResult {
    Vec x;
    double residual = 0.0;   // norm of the row-normalized residual vector
    int rank = 0;
    bool rank_deficient = false;
};

/// Least-squares solution of F = 0 and dF/dq = 0 for all 2N pair parameters.
LinearOracleResult envelope_point_linear_oracle(const PairConfiguration& pc);

/// Mid-plane coefficients as jets over the 2N pair parameters (p1 first).
/// The order is one less than the order of the surface jets.
struct MidPlaneJets {
    std::vector<Jet> normal;
    Jet offset;

    /// F(q; X) = normal(q) . X - offset(q).
    Jet function(const Vec& x) const;
};

MidPlaneJets mid_plane_jets(const SurfaceJet& j1, const SurfaceJet& j2);

/// F at arbitrary pair parameters, from first-order jets only.
double mid_plane_value(const Surface& s1, std::span<const double> p1, const Surface& s2,
                       std::span<const double> p2, const Vec& x);

} // namespace emh
