#pragma once

#include "emh/affine.hpp"
#include "emh/expression.hpp"
#include "emh/jet.hpp"
#include "emh/linalg.hpp"

#include <span>
#include <string>
#include <vector>

namespace emh {

enum class SurfaceKind { graph, parametric };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Hypersurface patch of dimension N in R^{N+1} (N in {1, 2}): either the graph
/// of f over N parameters or a parametric immersion with N+1 components.
class Surface {
public:
    static Surface graph(Expression f, std::vector<Interval> domain);
    static Surface parametric(std::vector<Expression> components, std::vector<Interval> domain);

    SurfaceKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return static_cast<int>(variables().size()); }
    int ambient_dim() const noexcept { return dim() + 1; }
    const std::vector<std::string>& variables() const { return components_.front().variables(); }
    const std::vector<Expression>& components() const noexcept { return components_; }
    const std::vector<Interval>& domain() const noexcept { return domain_; }

    bool contains(std::span<const double> params) const;
    /// Largest parameter-box width (1 for an empty box).
    double domain_scale() const;

    /// Coordinates of the immersion as jets, given jets for the parameters.
    std::vector<Jet> embedding(std::span<const Jet> params) const;
    Vec position(std::span<const double> params) const;

    /// phi o surface, as a parametric surface over the same parameters.
    Surface transformed(const AffineMap& phi) const;

private:
    Surface(SurfaceKind kind, std::vector<Expression> components, std::vector<Interval> domain);

    SurfaceKind kind_;
    std::vector<Expression> components_;
    std::vector<Interval> domain_;
};

/// Derivatives of the immersion at a parameter value, up to a fixed order.
struct SurfaceJet {
    SurfaceKind kind = SurfaceKind::parametric;
    std::vector<double> params;
    std::vector<Jet> components; // ambient coordinates, jets over the parameters
    Vec position;
    std::vector<Vec> tangents;           // psi_{x_i}; empty at order 0
    std::vector<std::vector<Vec>> second; // psi_{x_i x_j}; empty below order 2

    int dim() const { return static_cast<int>(params.size()); }
    int ambient_dim() const { return static_cast<int>(position.size()); }
    int order() const { return components.empty() ? 0 : components.front().order(); }

    /// Ambient derivative vector for a list of parameter indices (any order <= jet order).
    Vec derivative(std::initializer_list<int> vars) const;
    Mat tangent_matrix() const;
};

SurfaceJet surface_jet(const Surface& s, std::span<const double> params, int order);

/// Conormal nu, transversal xi with nu(xi) = 1, and the induced form h_ij = nu(psi_ij).
struct TransversalFrame {
    Vec conormal;
    Vec transversal;
    Mat metric;
    bool degenerate = false;

    double h(const Vec& a, const Vec& b) const { return a.dot(metric * b); }
};

TransversalFrame transversal_frame(const SurfaceJet& j);

/// Rescales to the Blaschke normalization: h / |det h|^{1/(N+2)}, with nu and xi
/// adjusted so that nu(xi) = 1 and [psi_1, ..., psi_N, xi] = |det h|^{1/2} still hold.
TransversalFrame blaschke_rescale(const TransversalFrame& fr, int n);

/// Volume [psi_1, ..., psi_N, xi] of the parameter basis against the transversal.
double transversal_volume(const SurfaceJet& j, const TransversalFrame& fr);

struct AffineSubspace {
    Vec base;
    std::vector<Vec> directions;

    int dim() const { return static_cast<int>(directions.size()); }
    /// Orthogonal projector onto the direction space.
    Mat projector() const;
};

/// Intersection of the two tangent hyperplanes. Throws ErrorKind::transversality when
/// the sine of the angle between the conormals is below min_transversality.
AffineSubspace tangent_intersection(const SurfaceJet& j1, const TransversalFrame& f1, const SurfaceJet& j2,
                                    const TransversalFrame& f2, double min_transversality = 1e-6);
AffineSubspace tangent_intersection(const SurfaceJet& j1, const SurfaceJet& j2, double min_transversality = 1e-6);

struct TangentDirection {
    Vec vector;       // unit Euclidean length, first significant coordinate positive
    Vec coordinates;  // same vector in the parameter basis psi_{x_i}
};

/// Tangent direction h-orthogonal to every direction of Z (any tangent for N = 1).
TangentDirection h_orthogonal_direction(const SurfaceJet& j, const TransversalFrame& fr, const AffineSubspace& z);

/// Coordinates of a tangent vector in the parameter basis; throws not_tangent when
/// the least-squares residual exceeds rel_tol * |v|.
Vec tangent_coordinates(const SurfaceJet& j, const Vec& v, double rel_tol = 1e-8);

} // namespace emh
