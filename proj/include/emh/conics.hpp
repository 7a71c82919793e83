#pragma once

#include "emh/affine.hpp"
#include "emh/envelope.hpp"
#include "emh/normal_form.hpp"

#include <array>
#include <optional>

namespace emh {

/// Affine normal form of a solvable pair: coordinates with p1 = (0, 0, 1),
/// p2 = (0, 0, -1), X = (p, 0, 0), the mid-plane z = 0 and Z along the y-axis.
struct NormalForm {
    AffineMap map;                        // original -> normal-form coordinates
    NormalFormCoefficients coefficients;  // p, epsilon, a, b, third order, delta
    Mat quad1, quad2;                     // v-v coefficient tables (N - 1 square)
    std::vector<double> mixed1, mixed2;   // u v_j coefficients, zero at a solution
    double linear1 = 0.0, linear2 = 0.0;  // u coefficients: e p and -e p
    double u2_coefficient1 = 0.0;         // expected -(p^2 + e) / 2
    double u2_coefficient2 = 0.0;         // expected delta (p^2 + e) / 2
    /// |u2_coefficient1 + (p^2 + e)/2| / (p^2 + 1); large when no sign of e fits.
    double epsilon_mismatch = 0.0;
    Vec x_image;                          // image of the envelope point
    /// Graph jets f1(u, v), f2(u, v) about the origin in normal-form coordinates.
    Jet f1, f2;
};

/// Needs surface jets of order >= 3 in the pair for the third-order coefficients
/// (order 2 gives zeros there).
NormalForm normal_form(const EnvelopeSolution& sol);

/// A 2-plane in R^{N+1} (for N = 1 the whole plane) with orthonormal axes.
struct Plane2 {
    Vec origin;
    Vec e1, e2;

    Vec point(double x, double z) const { return origin + x * e1 + z * e2; }
    Eigen::Vector2d coordinates(const Vec& p) const { return {e1.dot(p - origin), e2.dot(p - origin)}; }
};

/// Plane through p1 spanned by Y1, Y2; axes from Gram-Schmidt on (Y1, Y2).
Plane2 pair_plane(const PairConfiguration& pc);

/// S cap plane near s(params) as a curve t -> point(t), t the arc coordinate along
/// the section tangent at t = 0. One jet per ambient coordinate, in one variable.
std::vector<Jet> planar_section_jet(const SurfaceJet& j, const Plane2& plane);
std::vector<Jet> planar_section_jet(const Surface& s, std::span<const double> params, const Plane2& plane, int order);

/// c1 x^2 + c2 x z + c3 z^2 + c4 x + c5 z + c6 in plane coordinates.
struct Conic {
    Plane2 plane;
    std::array<double, 6> coefficients{};
    std::optional<Vec> center;
    ConicClass conic_class = ConicClass::degenerate;

    double evaluate(double x, double z) const;
    double evaluate(const Vec& p) const;
    /// Same conic in coordinates X = origin + x d1 + z d2 (d1, d2 spanning the plane),
    /// normalized like the constructor output.
    std::array<double, 6> in_frame(const Vec& origin, const Vec& d1, const Vec& d2) const;
};

/// Unit Euclidean norm, first coefficient with |c| > 1e-12 positive.
std::array<double, 6> normalize_conic(std::array<double, 6> c);
/// Center and class from the coefficients.
void classify_conic(Conic& c);

struct ContactReport {
    Conic conic;
    int null_dim = 0;               // dimension of the 6x6 null space
    double contact_det = 0.0;       // det of the row-normalized 6x6 system
    std::array<double, 6> singular_values{};
    /// Third derivative of q o section at p1, p2 (exactness of contact 3).
    double third1 = 0.0, third2 = 0.0;
    double center_distance = 0.0;   // |center - X|, infinity without a center
};

/// Row-normalized 6x6 system: rows are the Taylor coefficients of order 0, 1, 2 of
/// q o section at p1 then p2, columns the monomials x^2, xz, z^2, x, z, 1.
struct ContactSystem {
    Plane2 plane;
    Eigen::Matrix<double, 6, 6> matrix;
    std::array<double, 6> third1{}, third2{}; // order-3 coefficients per monomial (NaN below order 3)
};
ContactSystem contact_system(const PairConfiguration& pc);

/// Conic with contact >= 3 with both sections at p1, p2 in the plane of Y1, Y2.
/// Throws null_space when the null space is not one-dimensional; the report of the
/// failure carries the dimension in the message.
ContactReport contact_conic(const EnvelopeSolution& sol, double rel_tol = 1e-8);

} // namespace emh
