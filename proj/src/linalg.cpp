#include "emh/linalg.hpp"

#include "emh/error.hpp"

#include <cmath>

namespace emh {

Vec generalized_cross(std::span<const Vec> vectors)
{
    const auto n = static_cast<Eigen::Index>(vectors.size());
    const Eigen::Index dim = n + 1;
    for (const auto& v : vectors)
        if (v.size() != dim) throw Error(ErrorKind::domain, "generalized_cross: need N vectors in R^{N+1}");
    Vec out(dim);
    if (n == 1) {
        out << -vectors[0](1), vectors[0](0);
        return out;
    }
    if (n == 2) {
        const Eigen::Vector3d a = vectors[0], b = vectors[1];
        return a.cross(b);
    }
    // Cofactor expansion along the last column.
    Mat m(dim, dim);
    for (Eigen::Index j = 0; j < n; ++j) m.col(j) = vectors[j];
    for (Eigen::Index i = 0; i < dim; ++i) {
        m.col(n).setZero();
        m(i, n) = 1.0;
        out(i) = m.determinant();
    }
    return out;
}

Mat null_space(const Mat& a, double rel_tol)
{
    const Eigen::Index cols = a.cols();
    if (a.rows() == 0) return Mat::Identity(cols, cols);
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * smax) ++rank;
    return svd.matrixV().rightCols(cols - rank);
}

double sine_between(const Vec& a, const Vec& b)
{
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    const Vec ua = a / na, ub = b / nb;
    // |ua ^ ub| via the Gram determinant, which stays accurate for small angles.
    const double c = ua.dot(ub);
    const Vec perp = ub - c * ua;
    return std::min(1.0, perp.norm());
}

Vec canonical_sign(Vec v, double tol)
{
    const double n = v.norm();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > tol * n) {
            if (v(i) < 0) v = -v;
            break;
        }
    }
    return v;
}

} // namespace emh
