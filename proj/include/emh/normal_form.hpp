#pragma once

#include "emh/surface.hpp"

#include <utility>

namespace emh {

/// Coefficients of the Monge-form pair
///   f1 = 1 + e p u - (p^2 + e)/2 u^2 + a v^2 + a0 u^3 + a1 u^2 v + a2 u v^2 + a3 v^3
///   f2 = -1 - e p u + delta (p^2 + e)/2 u^2 + b v^2 + b0 u^3 + b1 u^2 v + b2 u v^2 + b3 v^3
/// whose origins form a pair with envelope point (p, 0, 0) when delta = 1.
/// For curves (dim 1) only the u terms are used.
struct NormalFormCoefficients {
    int dim = 2;
    double p = -1.0;
    int epsilon = 1;
    double a = 1.0, b = 1.0;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    double b0 = 0.0, b1 = 0.0, b2 = 0.0, b3 = 0.0;
    double delta = 1.0;

    /// e p < 0 and e = +-1.
    bool valid() const { return (epsilon == 1 || epsilon == -1) && epsilon * p < 0.0; }
};

/// Graph surfaces of the two Monge forms over the box [-half_width, half_width]^N.
std::pair<Surface, Surface> normal_form_surfaces(const NormalFormCoefficients& c, double half_width = 0.5);

} // namespace emh
