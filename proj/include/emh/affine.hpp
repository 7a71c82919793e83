#pragma once

#include "emh/linalg.hpp"

namespace emh {

/// x -> linear * x + translation on R^n.
struct AffineMap {
    Mat linear;
    Vec translation;

    static AffineMap identity(int n);

    int dim() const { return static_cast<int>(translation.size()); }
    Vec apply(const Vec& x) const { return linear * x + translation; }
    /// Image of a direction (translation ignored).
    Vec apply_vector(const Vec& v) const { return linear * v; }

    AffineMap inverse() const;
    /// (*this) after `inner`.
    AffineMap after(const AffineMap& inner) const;

    /// Affine reflection fixing {x : normal . x = offset} pointwise, sending `direction` to its negative.
    static AffineMap reflection(const Vec& normal, double offset, const Vec& direction);
};

} // namespace emh
