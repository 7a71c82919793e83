#include "emh/affine.hpp"

#include "emh/error.hpp"

#include <cmath>

namespace emh {

AffineMap AffineMap::identity(int n) { return {Mat::Identity(n, n), Vec::Zero(n)}; }

AffineMap AffineMap::inverse() const
{
    Eigen::FullPivLU<Mat> lu(linear);
    if (!lu.isInvertible()) throw Error(ErrorKind::singular_basis, "affine map is not invertible");
    Mat inv = lu.inverse();
    return {inv, -(inv * translation)};
}

AffineMap AffineMap::after(const AffineMap& inner) const
{
    return {linear * inner.linear, linear * inner.translation + translation};
}

AffineMap AffineMap::reflection(const Vec& normal, double offset, const Vec& direction)
{
    const double nd = normal.dot(direction);
    if (std::abs(nd) < 1e-12 * normal.norm() * direction.norm())
        throw Error(ErrorKind::singular_basis, "reflection direction lies in the mirror plane");
    // x - 2 (n.x - c) / (n.d) d
    const Mat lin = Mat::Identity(normal.size(), normal.size()) - (2.0 / nd) * direction * normal.transpose();
    return {lin, (2.0 * offset / nd) * direction};
}

} // namespace emh
