#pragma once

#include "emh/conics.hpp"
#include "emh/envelope.hpp"
#include "emh/normal_form.hpp"

#include <optional>
#include <string>

namespace emh {

/// Second parameter-derivatives of F (Euclidean-normal mid-plane function) at the
/// envelope point, by central differences in the 2N pair parameters with one
/// Richardson step. step <= 0 picks 1e-4 times the larger domain width.
Mat jg1_numeric(const Surface& s1, const Surface& s2, const EnvelopeSolution& sol, double step = 0.0);

/// Same matrix from the jets of F; exact when the pair carries order-3 surface jets.
Mat jg1_jet(const EnvelopeSolution& sol);

struct DeltaResult {
    Mat jg1;
    double delta = 0.0;
    /// |delta| > 1e-4 |JG1|_F^{2N}. A sufficient condition for smoothness only.
    bool smooth = false;
};

DeltaResult delta_from(Mat jg1);
DeltaResult delta(const Surface& s1, const Surface& s2, const EnvelopeSolution& sol);

/// The 4x4 matrix exactly as printed for surfaces in normal form.
Mat jg1_closed_form(const NormalFormCoefficients& c);
/// The same matrix with the epsilon dependence kept; equal to the printed one at e = 1.
Mat jg1_closed_form_general(const NormalFormCoefficients& c);

struct SpecialCaseReport {
    bool quadric_case = false;       // a + b ~ 0
    bool plain_cubic_case = false;   // a1 = a2 = b1 = b2 = 0
    // delta_1, delta_2 with the (2,2) entry built from a3/b3 (as printed for the
    // quadric case) and from a2/b2 (as printed in the matrix).
    double delta1_a3 = 0.0, delta2_b3 = 0.0;
    double delta1_a2 = 0.0, delta2_b2 = 0.0;
    // Factors keep the sign e; at e = 1 they reduce to the printed ones.
    double prefactor1 = 0.0, prefactor2 = 0.0; // 3p^2+3ep^4-6pa0, -3ep^4-3p^2-6pb0
    double delta_factor = 0.0;                 // 4abp^4-(a+b)^2(ep^2+1)^2
    double factored = 0.0;                     // prefactor1 * prefactor2 * delta_factor (plain cubic case)
    double closed_form_det = 0.0;              // det of the printed matrix
    double general_det = 0.0;                  // det of the epsilon-aware matrix
    double numeric_det = 0.0;                  // det of jg1_numeric on the normal-form surfaces
    /// Which quadric-case factorization reproduces numeric_det: "a2", "a3", "both", "neither", or
    /// "n/a" outside the quadric case.
    std::string quadric_symbol = "n/a";
    std::optional<bool> exact_contact1, exact_contact2;
    bool smooth = false;
    /// smooth agrees with the factors: nonzero factors in the special cases imply smooth.
    bool verdict_consistent = true;
};

/// Interprets a normal form. Numeric values come from the normal-form surfaces
/// rebuilt from the extracted coefficients. `contact` supplies the exact-contact flags.
SpecialCaseReport special_case_report(const NormalForm& nf, const std::optional<ContactReport>& contact = std::nullopt,
                                      double rel_tol = 1e-6);

} // namespace emh
