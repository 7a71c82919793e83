#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace emh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Covector with v(t_i) = det[t_1, ..., t_N, v] for N vectors in R^{N+1}.
Vec generalized_cross(std::span<const Vec> vectors);

/// Orthonormal basis (columns) of the null space of `a`, with the count decided by
/// singular values below rel_tol * largest.
Mat null_space(const Mat& a, double rel_tol = 1e-8);

/// Sine of the angle between two nonzero vectors, robust near 0 and pi.
double sine_between(const Vec& a, const Vec& b);

/// Flips v so that its first coordinate with |v_i| > tol * |v| is positive.
Vec canonical_sign(Vec v, double tol = 1e-12);

} // namespace emh
