#include "emh/conics.hpp"

#include "emh/error.hpp"

#include <cmath>
#include <limits>

namespace emh {

namespace {

// Graph jet of the last coordinate over the first N coordinates, for an
// immersion given by coordinate jets about s0.
Jet graph_jet(const std::vector<Jet>& coords, std::span<const double> s0)
{
    const int n = static_cast<int>(coords.size()) - 1;
    const std::vector<Jet> map(coords.begin(), coords.begin() + n);
    const std::vector<Jet> inverse = invert_map(map, s0);
    return compose(coords.back(), inverse);
}

std::vector<Jet> transform_jets(const AffineMap& phi, const std::vector<Jet>& comps)
{
    const int m = phi.dim();
    std::vector<Jet> out;
    for (int i = 0; i < m; ++i) {
        Jet acc = Jet::constant(comps[0].layout(), phi.translation(i));
        for (int k = 0; k < m; ++k) acc += comps[k] * phi.linear(i, k);
        out.push_back(acc);
    }
    return out;
}

double taylor(const Jet& f, std::initializer_list<int> vars)
{
    if (static_cast<int>(vars.size()) > f.order()) return 0.0;
    // Taylor coefficient = partial / alpha!
    double denom = 1.0;
    std::array<int, 4> counts{};
    for (int v : vars) denom *= ++counts[v];
    return f.partial(vars) / denom;
}

Mat conic_matrix(const std::array<double, 6>& c)
{
    Mat q(3, 3);
    q << c[0], 0.5 * c[1], 0.5 * c[3], 0.5 * c[1], c[2], 0.5 * c[4], 0.5 * c[3], 0.5 * c[4], c[5];
    return q;
}

} // namespace

NormalForm normal_form(const EnvelopeSolution& sol)
{
    const auto& pc = sol.pair;
    const int n = pc.dim();
    const int m = n + 1;
    const Vec w = sol.x - pc.mid_point;
    if (!(w.norm() > 1e-12 * (1.0 + sol.x.norm())))
        throw Error(ErrorKind::singular_basis, "normal_form: envelope point coincides with the mid-point");

    Vec zdir;
    if (n == 2) zdir = canonical_sign(pc.z.directions.at(0).normalized());

    auto build_map = [&](double scale) {
        Mat basis(m, m);
        basis.col(0) = w / scale;
        if (n == 2) basis.col(1) = zdir;
        basis.col(m - 1) = pc.mid_chord;
        AffineMap inv{basis, pc.mid_point};
        return inv.inverse();
    };
    auto graphs = [&](const AffineMap& phi) {
        return std::pair{graph_jet(transform_jets(phi, pc.j1.components), pc.j1.params),
                         graph_jet(transform_jets(phi, pc.j2.components), pc.j2.params)};
    };

    // First pass with X - M as the x unit fixes e and p from the slope of f1.
    const double slope = taylor(graphs(build_map(1.0)).first, {0});
    if (!(std::abs(slope) > 0.0)) throw Error(ErrorKind::singular_basis, "normal_form: tangent plane contains X - M");
    const int eps = slope > 0 ? 1 : -1;
    const double p = -eps * std::sqrt(std::abs(slope));

    NormalForm nf;
    nf.map = build_map(p);
    std::tie(nf.f1, nf.f2) = graphs(nf.map);
    nf.x_image = nf.map.apply(sol.x);

    auto& c = nf.coefficients;
    c.dim = n;
    c.p = p;
    c.epsilon = eps;
    const double q = p * p + eps;
    nf.linear1 = taylor(nf.f1, {0});
    nf.linear2 = taylor(nf.f2, {0});
    nf.u2_coefficient1 = taylor(nf.f1, {0, 0});
    nf.u2_coefficient2 = taylor(nf.f2, {0, 0});
    nf.epsilon_mismatch = std::abs(nf.u2_coefficient1 + 0.5 * q) / (p * p + 1.0);
    c.delta = q != 0.0 ? 2.0 * nf.u2_coefficient2 / q : std::numeric_limits<double>::quiet_NaN();
    c.a0 = taylor(nf.f1, {0, 0, 0});
    c.b0 = taylor(nf.f2, {0, 0, 0});
    nf.quad1 = Mat::Zero(n - 1, n - 1);
    nf.quad2 = Mat::Zero(n - 1, n - 1);
    if (n == 2) {
        c.a = taylor(nf.f1, {1, 1});
        c.b = taylor(nf.f2, {1, 1});
        nf.quad1(0, 0) = c.a;
        nf.quad2(0, 0) = c.b;
        nf.mixed1.push_back(taylor(nf.f1, {0, 1}));
        nf.mixed2.push_back(taylor(nf.f2, {0, 1}));
        c.a1 = taylor(nf.f1, {0, 0, 1});
        c.a2 = taylor(nf.f1, {0, 1, 1});
        c.a3 = taylor(nf.f1, {1, 1, 1});
        c.b1 = taylor(nf.f2, {0, 0, 1});
        c.b2 = taylor(nf.f2, {0, 1, 1});
        c.b3 = taylor(nf.f2, {1, 1, 1});
    } else {
        c.a = c.b = 0.0;
    }
    return nf;
}

Plane2 pair_plane(const PairConfiguration& pc)
{
    Plane2 pl;
    pl.origin = pc.j1.position;
    pl.e1 = pc.y1.normalized();
    Vec e2 = pc.y2 - pl.e1.dot(pc.y2) * pl.e1;
    if (!(e2.norm() > 1e-12 * pc.y2.norm())) throw Error(ErrorKind::singular_basis, "Y1 and Y2 are parallel");
    pl.e2 = e2.normalized();
    return pl;
}

std::vector<Jet> planar_section_jet(const SurfaceJet& j, const Plane2& plane)
{
    const int n = j.dim();
    const int m = j.ambient_dim();
    const int order = j.order();
    if (order < 1) throw Error(ErrorKind::domain, "planar_section_jet needs order >= 1");

    // Constraints: n_pi . (psi - p) = 0 for N = 2; the section parameter is
    // t = w . (psi - p) with w spanning plane cap T_pS.
    const Vec nu = generalized_cross(j.tangents);
    Vec w;
    std::vector<Vec> rows;
    if (n == 1) {
        w = j.tangents[0].normalized();
    } else {
        const Eigen::Vector3d pn = Eigen::Vector3d(plane.e1).cross(Eigen::Vector3d(plane.e2));
        const Eigen::Vector3d dir = pn.cross(Eigen::Vector3d(nu));
        if (!(dir.norm() > 1e-10 * nu.norm())) throw Error(ErrorKind::transversality, "plane is tangent to the surface");
        w = dir.normalized();
        rows.push_back(pn);
    }
    rows.push_back(w);

    std::vector<Jet> map;
    for (const auto& r : rows) {
        Jet g(j.components[0].layout());
        for (int k = 0; k < m; ++k) g += (j.components[k] - j.position(k)) * r(k);
        map.push_back(g);
    }
    const std::vector<Jet> inverse = invert_map(map, j.params);

    // Restrict to the constraint surface: all but the last variable are zero.
    const JetLayout& line = JetLayout::get(1, order);
    std::vector<Jet> inner;
    for (int i = 0; i + 1 < n; ++i) inner.push_back(Jet::constant(line, 0.0));
    inner.push_back(Jet::variable(line, 0, 0.0));
    std::vector<Jet> params;
    for (const auto& s : inverse) params.push_back(compose(s, inner));

    std::vector<Jet> out;
    for (int k = 0; k < m; ++k) out.push_back(compose(j.components[k], params));
    return out;
}

std::vector<Jet> planar_section_jet(const Surface& s, std::span<const double> params, const Plane2& plane, int order)
{
    return planar_section_jet(surface_jet(s, params, order), plane);
}

double Conic::evaluate(double x, double z) const
{
    const auto& c = coefficients;
    return c[0] * x * x + c[1] * x * z + c[2] * z * z + c[3] * x + c[4] * z + c[5];
}

double Conic::evaluate(const Vec& p) const
{
    const auto xz = plane.coordinates(p);
    return evaluate(xz(0), xz(1));
}

std::array<double, 6> Conic::in_frame(const Vec& origin, const Vec& d1, const Vec& d2) const
{
    // (x, z) = t0 + A (x', z')
    const Eigen::Vector2d t0 = plane.coordinates(origin);
    Eigen::Matrix2d a;
    a << plane.e1.dot(d1), plane.e1.dot(d2), plane.e2.dot(d1), plane.e2.dot(d2);
    const auto& c = coefficients;
    Eigen::Matrix2d q;
    q << c[0], 0.5 * c[1], 0.5 * c[1], c[2];
    const Eigen::Vector2d l(c[3], c[4]);
    const Eigen::Matrix2d q2 = a.transpose() * q * a;
    const Eigen::Vector2d l2 = a.transpose() * (2.0 * q * t0 + l);
    const double c6 = t0.dot(q * t0) + l.dot(t0) + c[5];
    return normalize_conic({q2(0, 0), 2.0 * q2(0, 1), q2(1, 1), l2(0), l2(1), c6});
}

std::array<double, 6> normalize_conic(std::array<double, 6> c)
{
    double norm = 0.0;
    for (double x : c) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return c;
    double sign = 1.0;
    for (double x : c) {
        if (std::abs(x) > 1e-12 * norm) {
            sign = x > 0 ? 1.0 : -1.0;
            break;
        }
    }
    for (double& x : c) x *= sign / norm;
    return c;
}

void classify_conic(Conic& conic)
{
    const auto& c = conic.coefficients;
    const double quad = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    const double disc = c[1] * c[1] - 4.0 * c[0] * c[2];
    conic.center.reset();
    conic.conic_class = ConicClass::degenerate;
    if (!(quad > 0.0) || std::abs(disc) <= 1e-12 * quad * quad) return;

    Eigen::Matrix2d hess;
    hess << 2 * c[0], c[1], c[1], 2 * c[2];
    const Eigen::Vector2d xz = hess.fullPivLu().solve(Eigen::Vector2d(-c[3], -c[4]));
    conic.center = conic.plane.point(xz(0), xz(1));

    const double scale = std::pow(quad, 2) * std::sqrt(c[3] * c[3] + c[4] * c[4] + c[5] * c[5] + quad * quad);
    if (std::abs(conic_matrix(c).determinant()) <= 1e-12 * scale) return;
    conic.conic_class = disc < 0 ? ConicClass::ellipse : ConicClass::hyperbola;
}

ContactSystem contact_system(const PairConfiguration& pc)
{
    ContactSystem cs;
    cs.plane = pair_plane(pc);
    const Plane2& plane = cs.plane;

    // Monomial jets of q o section for x^2, xz, z^2, x, z, 1.
    auto monomials = [&](const SurfaceJet& j) {
        const auto sec = planar_section_jet(j, plane);
        Jet x(sec[0].layout()), z(sec[0].layout());
        for (int k = 0; k < j.ambient_dim(); ++k) {
            x += (sec[k] - plane.origin(k)) * plane.e1(k);
            z += (sec[k] - plane.origin(k)) * plane.e2(k);
        }
        return std::array<Jet, 6>{x * x, x * z, z * z, x, z, Jet::constant(x.layout(), 1.0)};
    };
    const auto m1 = monomials(pc.j1);
    const auto m2 = monomials(pc.j2);
    auto coeff = [](const Jet& f, int k) {
        return f.order() >= k ? f.coefficient(k) : std::numeric_limits<double>::quiet_NaN();
    };
    for (int c = 0; c < 6; ++c) {
        for (int k = 0; k < 3; ++k) {
            cs.matrix(k, c) = coeff(m1[c], k);
            cs.matrix(3 + k, c) = coeff(m2[c], k);
        }
        cs.third1[c] = coeff(m1[c], 3);
        cs.third2[c] = coeff(m2[c], 3);
    }
    for (int r = 0; r < 6; ++r) {
        const double s = cs.matrix.row(r).norm();
        if (s > 0) cs.matrix.row(r) /= s;
    }
    return cs;
}

ContactReport contact_conic(const EnvelopeSolution& sol, double rel_tol)
{
    const ContactSystem cs = contact_system(sol.pair);
    ContactReport rep;
    rep.contact_det = cs.matrix.determinant();
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(cs.matrix, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    for (int i = 0; i < 6; ++i) rep.singular_values[i] = sv(i);
    rep.null_dim = 0;
    for (int i = 0; i < 6; ++i)
        if (sv(i) <= rel_tol * sv(0)) ++rep.null_dim;
    if (rep.null_dim != 1)
        throw Error(ErrorKind::null_space,
                    "contact conic: null space has dimension " + std::to_string(rep.null_dim) + " (expected 1)");

    const Eigen::Matrix<double, 6, 1> v = svd.matrixV().col(5);
    rep.conic.plane = cs.plane;
    for (int i = 0; i < 6; ++i) rep.conic.coefficients[i] = v(i);
    rep.conic.coefficients = normalize_conic(rep.conic.coefficients);
    classify_conic(rep.conic);

    // Third derivative of q o section: 3! times the t^3 coefficient.
    auto third = [&](const std::array<double, 6>& t3) {
        double s = 0.0;
        for (int c = 0; c < 6; ++c) s += rep.conic.coefficients[c] * t3[c];
        return 6.0 * s;
    };
    rep.third1 = third(cs.third1);
    rep.third2 = third(cs.third2);
    rep.center_distance = rep.conic.center ? (*rep.conic.center - sol.x).norm() : std::numeric_limits<double>::infinity();
    return rep;
}

} // namespace emh
