#include "emh/regularity.hpp"

#include "emh/error.hpp"

#include <cmath>

namespace emh {

Mat jg1_numeric(const Surface& s1, const Surface& s2, const EnvelopeSolution& sol, double step)
{
    const auto& pc = sol.pair;
    const int n = pc.dim();
    const int q = 2 * n;
    if (step <= 0.0) step = 1e-4 * std::max(s1.domain_scale(), s2.domain_scale());

    std::vector<double> base = pc.j1.params;
    base.insert(base.end(), pc.j2.params.begin(), pc.j2.params.end());
    auto f = [&](const std::vector<double>& at) {
        return mid_plane_value(s1, std::span<const double>(at.data(), n), s2, std::span<const double>(at.data() + n, n),
                               sol.x);
    };
    const double f0 = f(base);

    auto second = [&](int i, int j, double h) {
        auto at = base;
        if (i == j) {
            at[i] = base[i] + h;
            const double fp = f(at);
            at[i] = base[i] - h;
            const double fm = f(at);
            return (fp - 2.0 * f0 + fm) / (h * h);
        }
        double acc = 0.0;
        for (int si : {1, -1})
            for (int sj : {1, -1}) {
                at = base;
                at[i] += si * h;
                at[j] += sj * h;
                acc += si * sj * f(at);
            }
        return acc / (4.0 * h * h);
    };

    Mat m(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = i; j < q; ++j) {
            const double coarse = second(i, j, step);
            const double fine = second(i, j, 0.5 * step);
            m(i, j) = m(j, i) = (4.0 * fine - coarse) / 3.0;
        }
    return m;
}

Mat jg1_jet(const EnvelopeSolution& sol)
{
    const auto& pc = sol.pair;
    if (std::min(pc.j1.order(), pc.j2.order()) < 3)
        throw Error(ErrorKind::domain, "jg1_jet needs surface jets of order >= 3");
    const Jet f = mid_plane_jets(pc.j1, pc.j2).function(sol.x);
    const int q = 2 * pc.dim();
    Mat m(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) m(i, j) = f.partial({i, j});
    return m;
}

DeltaResult delta_from(Mat jg1)
{
    DeltaResult r;
    r.delta = jg1.determinant();
    r.smooth = std::abs(r.delta) > 1e-4 * std::pow(jg1.norm(), jg1.rows());
    r.jg1 = std::move(jg1);
    return r;
}

DeltaResult delta(const Surface& s1, const Surface& s2, const EnvelopeSolution& sol)
{
    return delta_from(jg1_numeric(s1, s2, sol));
}

Mat jg1_closed_form(const NormalFormCoefficients& c)
{
    const double p = c.p, p2 = p * p, p4 = p2 * p2;
    Mat m = Mat::Zero(4, 4);
    m(0, 0) = 3 * p2 + 3 * p4 - 6 * p * c.a0;
    m(0, 1) = m(1, 0) = -2 * p * c.a1;
    m(1, 1) = -2 * c.a * p2 - 2 * c.a2 * p;
    m(1, 3) = m(3, 1) = (c.a + c.b) * (p2 + 1);
    m(2, 2) = -3 * p4 - 3 * p2 - 6 * p * c.b0;
    m(2, 3) = m(3, 2) = -2 * p * c.b1;
    m(3, 3) = -2 * c.b * p2 - 2 * c.b2 * p;
    return m;
}

Mat jg1_closed_form_general(const NormalFormCoefficients& c)
{
    const double e = c.epsilon;
    const double p = c.p, p2 = p * p, p4 = p2 * p2;
    Mat m = Mat::Zero(4, 4);
    m(0, 0) = 3 * p2 + 3 * e * p4 - 6 * p * c.a0;
    m(0, 1) = m(1, 0) = -2 * p * c.a1;
    m(1, 1) = -2 * e * c.a * p2 - 2 * c.a2 * p;
    m(1, 3) = m(3, 1) = (c.a + c.b) * (e * p2 + 1);
    m(2, 2) = -3 * e * p4 - 3 * p2 - 6 * p * c.b0;
    m(2, 3) = m(3, 2) = -2 * p * c.b1;
    m(3, 3) = -2 * e * c.b * p2 - 2 * c.b2 * p;
    return m;
}

namespace {

double det2(double a, double b, double d) { return a * d - b * b; }

bool close(double x, double y, double tol) { return std::abs(x - y) <= tol * std::max({std::abs(x), std::abs(y), 1e-300}); }

} // namespace

SpecialCaseReport special_case_report(const NormalForm& nf, const std::optional<ContactReport>& contact, double rel_tol)
{
    const auto& c = nf.coefficients;
    if (c.dim != 2) throw Error(ErrorKind::domain, "special_case_report is defined for surfaces (N = 2)");
    const double p = c.p, p2 = p * p, p4 = p2 * p2;
    SpecialCaseReport r;
    const double scale = std::abs(c.a) + std::abs(c.b);
    r.quadric_case = std::abs(c.a + c.b) <= rel_tol * scale;
    const double coef_scale = 1.0 + std::abs(c.a) + std::abs(c.b);
    r.plain_cubic_case = std::max({std::abs(c.a1), std::abs(c.a2), std::abs(c.b1), std::abs(c.b2)}) <= rel_tol * coef_scale;

    const double e = c.epsilon;
    r.prefactor1 = 3 * p2 + 3 * e * p4 - 6 * p * c.a0;
    r.prefactor2 = -3 * e * p4 - 3 * p2 - 6 * p * c.b0;
    r.delta1_a3 = det2(r.prefactor1, -2 * p * c.a1, -2 * e * c.a * p2 - 2 * c.a3 * p);
    r.delta2_b3 = det2(r.prefactor2, -2 * p * c.b1, -2 * e * c.b * p2 - 2 * c.b3 * p);
    r.delta1_a2 = det2(r.prefactor1, -2 * p * c.a1, -2 * e * c.a * p2 - 2 * c.a2 * p);
    r.delta2_b2 = det2(r.prefactor2, -2 * p * c.b1, -2 * e * c.b * p2 - 2 * c.b2 * p);
    // 4ab p^4 - (a+b)^2 (e p^2 + 1)^2; at e = 1 this is the negative sum of squares.
    r.delta_factor = 4 * c.a * c.b * p4 - std::pow(c.a + c.b, 2) * std::pow(e * p2 + 1, 2);
    r.factored = r.prefactor1 * r.prefactor2 * r.delta_factor;
    const Mat printed = jg1_closed_form(c);
    r.closed_form_det = printed.determinant();
    r.general_det = jg1_closed_form_general(c).determinant();

    // Numeric reference on the rebuilt normal-form pair (X = (p, 0, 0) needs delta = 1;
    // the extracted delta is kept so a mismatch shows up here).
    const auto [s1, s2] = normal_form_surfaces(c);
    const double origin[] = {0.0, 0.0};
    EnvelopeSolution probe;
    probe.pair = build_pair(surface_jet(s1, origin, 2), surface_jet(s2, origin, 2));
    probe.x = Vec{{p, 0.0, 0.0}};
    const DeltaResult numeric = delta_from(jg1_numeric(s1, s2, probe));
    r.numeric_det = numeric.delta;
    r.smooth = numeric.smooth;

    const double tol = 1e-4;
    if (r.quadric_case) {
        const bool m2 = close(r.delta1_a2 * r.delta2_b2, r.numeric_det, tol);
        const bool m3 = close(r.delta1_a3 * r.delta2_b3, r.numeric_det, tol);
        r.quadric_symbol = m2 && m3 ? "both" : m2 ? "a2" : m3 ? "a3" : "neither";
    }
    // The printed factors assume e = 1; the e-aware matrix covers both signs.
    if (r.plain_cubic_case || r.quadric_case) r.verdict_consistent = delta_from(jg1_closed_form_general(c)).smooth == r.smooth;

    if (contact) {
        const double t = 1e-6;
        if (!std::isnan(contact->third1)) r.exact_contact1 = std::abs(contact->third1) > t;
        if (!std::isnan(contact->third2)) r.exact_contact2 = std::abs(contact->third2) > t;
    }
    return r;
}

} // namespace emh
