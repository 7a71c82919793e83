#include "emh/envelope.hpp"

#include "emh/error.hpp"

#include <cfloat>
#include <cmath>

namespace emh {

namespace {

bool definite(const Mat& h)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const auto& ev = es.eigenvalues();
    return (ev.array() > 0).all() || (ev.array() < 0).all();
}

std::vector<Jet> jet_cross(const std::vector<Jet>& a, const std::vector<Jet>& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Jet jet_dot(const std::vector<Jet>& a, const std::vector<Jet>& b)
{
    Jet r = a[0] * b[0];
    for (std::size_t i = 1; i < a.size(); ++i) r += a[i] * b[i];
    return r;
}

// Conormal jets (generalized cross product of the tangents), over `layout`.
std::vector<Jet> conormal_jets(const std::vector<Jet>& position, int first_var, int n)
{
    std::vector<std::vector<Jet>> tangents;
    for (int i = 0; i < n; ++i) {
        std::vector<Jet> t;
        for (const auto& c : position) t.push_back(differentiate(c, first_var + i));
        tangents.push_back(std::move(t));
    }
    if (n == 1) return {-tangents[0][1], tangents[0][0]};
    return jet_cross(tangents[0], tangents[1]);
}

} // namespace

std::optional<double> PairConfiguration::big_b() const
{
    const double denom = lambda + 4.0 * a * b;
    if (!(std::abs(denom) > 1e-14 * (std::abs(lambda) + std::abs(4.0 * a * b)))) return std::nullopt;
    return -lambda * a / denom;
}

PairConfiguration assemble_pair(SurfaceJet j1, TransversalFrame f1, Vec y1, SurfaceJet j2, TransversalFrame f2,
                                Vec y2, AffineSubspace z)
{
    PairConfiguration pc;
    pc.mid_point = 0.5 * (j1.position + j2.position);
    pc.mid_chord = 0.5 * (j1.position - j2.position);
    const double scale = j1.position.norm() + j2.position.norm();
    if (!(pc.mid_chord.norm() > 1e-12 * std::max(scale, 1.0)))
        throw Error(ErrorKind::transversality, "coincident points");

    pc.y1_coords = tangent_coordinates(j1, y1);
    pc.y2_coords = tangent_coordinates(j2, y2);
    pc.nu1_c = f1.conormal.dot(pc.mid_chord);
    pc.nu2_c = f2.conormal.dot(pc.mid_chord);
    pc.nu2_y1 = f2.conormal.dot(y1);
    pc.nu1_y2 = f1.conormal.dot(y2);
    if (pc.nu2_y1 == 0.0 || pc.nu1_y2 == 0.0)
        throw Error(ErrorKind::transversality, "h-orthogonal direction lies in the other tangent space");
    pc.h1_y1 = pc.y1_coords.dot(f1.metric * pc.y1_coords);
    pc.h2_y2 = pc.y2_coords.dot(f2.metric * pc.y2_coords);
    if (pc.h2_y2 == 0.0 || pc.h1_y1 == 0.0)
        throw Error(ErrorKind::degenerate_metric, "h(Y, Y) vanishes; lambda undefined");

    const double ratio = (pc.nu1_y2 * pc.nu1_y2) / (pc.nu2_y1 * pc.nu2_y1) * (pc.h1_y1 / pc.h2_y2);
    pc.lambda = signed_cbrt(ratio);
    pc.b = -pc.h1_y1 / pc.nu2_y1;
    pc.kappa = pc.lambda * pc.nu2_y1 / pc.nu1_y2;

    // C in the basis {Y1, Y2, Z_1, ..., Z_{N-1}}
    const auto m = pc.mid_chord.size();
    Mat basis(m, m);
    basis.col(0) = y1;
    basis.col(1) = y2;
    for (int k = 0; k < z.dim(); ++k) basis.col(2 + k) = z.directions[k];
    Eigen::JacobiSVD<Mat> svd(basis);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
        throw Error(ErrorKind::singular_basis, "{Y1, Y2, Z} is not a basis");
    const Vec coeffs = basis.fullPivLu().solve(pc.mid_chord);
    pc.a = coeffs(0);
    for (int k = 0; k < z.dim(); ++k) pc.alpha.push_back(coeffs(2 + k));

    pc.convex = !f1.degenerate && !f2.degenerate && definite(f1.metric) && definite(f2.metric);
    pc.j1 = std::move(j1);
    pc.j2 = std::move(j2);
    pc.f1 = std::move(f1);
    pc.f2 = std::move(f2);
    pc.y1 = std::move(y1);
    pc.y2 = std::move(y2);
    pc.z = std::move(z);
    return pc;
}

PairConfiguration build_pair(SurfaceJet j1, SurfaceJet j2, const PairOptions& opts)
{
    if (j1.dim() != j2.dim() || j1.ambient_dim() != j2.ambient_dim())
        throw Error(ErrorKind::domain, "surfaces of different dimension");
    TransversalFrame f1 = transversal_frame(j1);
    TransversalFrame f2 = transversal_frame(j2);
    AffineSubspace z = tangent_intersection(j1, f1, j2, f2, opts.min_transversality);
    const TangentDirection d1 = h_orthogonal_direction(j1, f1, z);
    const TangentDirection d2 = h_orthogonal_direction(j2, f2, z);
    // Unit length in parameter coordinates.
    Vec y1 = d1.vector / d1.coordinates.norm();
    Vec y2 = d2.vector / d2.coordinates.norm();
    return assemble_pair(std::move(j1), std::move(f1), std::move(y1), std::move(j2), std::move(f2), std::move(y2),
                         std::move(z));
}

PairConfiguration build_pair(const Surface& s1, std::span<const double> p1, const Surface& s2,
                             std::span<const double> p2, const PairOptions& opts)
{
    const int order = std::max(2, opts.jet_order);
    return build_pair(surface_jet(s1, p1, order), surface_jet(s2, p2, order), opts);
}

MidPlane mid_plane(const PairConfiguration& pc)
{
    MidPlane mp;
    mp.normal = pc.nu2_c * pc.f1.conormal + pc.nu1_c * pc.f2.conormal;
    if (!(mp.normal.norm() > 0.0)) throw Error(ErrorKind::singular_basis, "degenerate mid-plane");
    mp.offset = mp.normal.dot(pc.mid_point);
    return mp;
}

std::vector<double> solvability_residual(const PairConfiguration& pc)
{
    std::vector<double> r;
    r.push_back(pc.condition() / (std::abs(pc.nu1_c) + std::abs(pc.lambda * pc.nu2_c) + DBL_MIN));
    const double c = pc.mid_chord.norm();
    for (std::size_t k = 0; k < pc.alpha.size(); ++k) r.push_back(pc.alpha[k] * pc.z.directions[k].norm() / c);
    return r;
}

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

const char* to_string(ConicClass c) noexcept
{
    switch (c) {
    case ConicClass::ellipse: return "ellipse";
    case ConicClass::hyperbola: return "hyperbola";
    case ConicClass::degenerate: return "degenerate";
    }
    return "degenerate";
}

ConicClass conic_class_from_string(const std::string& s)
{
    if (s == "ellipse") return ConicClass::ellipse;
    if (s == "hyperbola") return ConicClass::hyperbola;
    if (s == "degenerate") return ConicClass::degenerate;
    throw Error(ErrorKind::config, "unknown conic class '" + s + "'");
}

double EnvelopeResiduals::max() const
{
    return std::max({max_abs(solvability), std::abs(plane), max_abs(derivatives)});
}

Jet MidPlaneJets::function(const Vec& x) const
{
    Jet f = normal[0] * x(0);
    for (std::size_t i = 1; i < normal.size(); ++i) f += normal[i] * x(static_cast<Eigen::Index>(i));
    return f - offset;
}

MidPlaneJets mid_plane_jets(const SurfaceJet& j1, const SurfaceJet& j2)
{
    const int n = j1.dim();
    const int k = std::min(j1.order(), j2.order());
    if (k < 1) throw Error(ErrorKind::domain, "mid_plane_jets needs surface jets of order >= 1");
    const JetLayout& full = JetLayout::get(2 * n, k);
    const JetLayout& reduced = JetLayout::get(2 * n, k - 1);

    std::vector<Jet> p1, p2;
    for (const auto& c : j1.components) p1.push_back(embed(c, full, 0));
    for (const auto& c : j2.components) p2.push_back(embed(c, full, n));
    const std::vector<Jet> nu1 = conormal_jets(p1, 0, n);
    const std::vector<Jet> nu2 = conormal_jets(p2, n, n);

    std::vector<Jet> mid, chord;
    for (std::size_t i = 0; i < p1.size(); ++i) {
        const Jet a = embed(p1[i], reduced, 0);
        const Jet b = embed(p2[i], reduced, 0);
        mid.push_back(0.5 * (a + b));
        chord.push_back(0.5 * (a - b));
    }
    const Jet nu1c = jet_dot(nu1, chord);
    const Jet nu2c = jet_dot(nu2, chord);
    MidPlaneJets out;
    for (std::size_t i = 0; i < nu1.size(); ++i) out.normal.push_back(nu2c * nu1[i] + nu1c * nu2[i]);
    out.offset = jet_dot(out.normal, mid);
    return out;
}

double mid_plane_value(const Surface& s1, std::span<const double> p1, const Surface& s2,
                       std::span<const double> p2, const Vec& x)
{
    const SurfaceJet j1 = surface_jet(s1, p1, 1);
    const SurfaceJet j2 = surface_jet(s2, p2, 1);
    const Vec nu1 = generalized_cross(j1.tangents);
    const Vec nu2 = generalized_cross(j2.tangents);
    const Vec c = 0.5 * (j1.position - j2.position);
    const Vec m = 0.5 * (j1.position + j2.position);
    return (nu2.dot(c) * nu1 + nu1.dot(c) * nu2).dot(x - m);
}

namespace {

// Rows [n; dn/dq] and right-hand sides [n.M; d(n.M)/dq] of the envelope system.
void envelope_rows(const MidPlaneJets& mp, Mat& rows, Vec& rhs)
{
    const auto m = static_cast<Eigen::Index>(mp.normal.size());
    const int nq = mp.offset.nvars();
    rows.resize(nq + 1, m);
    rhs.resize(nq + 1);
    for (Eigen::Index i = 0; i < m; ++i) rows(0, i) = mp.normal[i].value();
    rhs(0) = mp.offset.value();
    for (int q = 0; q < nq; ++q) {
        for (Eigen::Index i = 0; i < m; ++i) rows(q + 1, i) = mp.normal[i].coefficient(1 + q);
        rhs(q + 1) = mp.offset.coefficient(1 + q);
    }
}

} // namespace

EnvelopeSolution envelope_point(const PairConfiguration& pc)
{
    const auto big_b = pc.big_b();
    if (!big_b) throw Error(ErrorKind::point_at_infinity, "lambda + 4Ab = 0: envelope point at infinity");
    EnvelopeSolution sol;
    sol.x = pc.mid_point + *big_b * (pc.y1 + pc.kappa * pc.y2);
    sol.pair = pc;
    sol.residuals.solvability = solvability_residual(pc);

    const MidPlaneJets mp = mid_plane_jets(pc.j1, pc.j2);
    Mat rows;
    Vec rhs;
    envelope_rows(mp, rows, rhs);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        const double scale = rows.row(r).norm() * sol.x.norm() + std::abs(rhs(r)) + DBL_MIN;
        const double rel = (rows.row(r).dot(sol.x) - rhs(r)) / scale;
        if (r == 0) sol.residuals.plane = rel;
        else sol.residuals.derivatives.push_back(rel);
    }
    return sol;
}

LinearOracleResult envelope_point_linear_oracle(const PairConfiguration& pc)
{
    const MidPlaneJets mp = mid_plane_jets(pc.j1, pc.j2);
    Mat rows;
    Vec rhs;
    envelope_rows(mp, rows, rhs);
    // Row equilibration leaves the solution of a consistent system unchanged.
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        const double s = rows.row(r).norm();
        if (s > 0.0) {
            rows.row(r) /= s;
            rhs(r) /= s;
        }
    }
    Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    LinearOracleResult out;
    out.x = svd.solve(rhs);
    out.rank = static_cast<int>(svd.rank());
    out.rank_deficient = out.rank < rows.cols();
    out.residual = (rows * out.x - rhs).norm();
    return out;
}

} // namespace emh
