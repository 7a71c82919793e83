#include "emh/surface.hpp"

#include "emh/error.hpp"

#include <cmath>
#include <optional>

namespace emh {

Surface::Surface(SurfaceKind kind, std::vector<Expression> components, std::vector<Interval> domain)
    : kind_(kind), components_(std::move(components)), domain_(std::move(domain))
{
}

Surface Surface::graph(Expression f, std::vector<Interval> domain)
{
    const auto n = f.arity();
    if (n < 1 || n > 2) throw Error(ErrorKind::domain, "graph surfaces need 1 or 2 variables");
    if (!domain.empty() && domain.size() != n) throw Error(ErrorKind::domain, "domain box dimension mismatch");
    return Surface(SurfaceKind::graph, {std::move(f)}, std::move(domain));
}

Surface Surface::parametric(std::vector<Expression> components, std::vector<Interval> domain)
{
    if (components.empty()) throw Error(ErrorKind::domain, "parametric surface needs components");
    const auto n = components.front().arity();
    if (n < 1 || n > 2 || components.size() != n + 1)
        throw Error(ErrorKind::domain, "parametric surface needs N+1 components over N in {1,2} variables");
    for (const auto& c : components)
        if (c.variables() != components.front().variables())
            throw Error(ErrorKind::domain, "components must share one variable list");
    if (!domain.empty() && domain.size() != n) throw Error(ErrorKind::domain, "domain box dimension mismatch");
    return Surface(SurfaceKind::parametric, std::move(components), std::move(domain));
}

bool Surface::contains(std::span<const double> params) const
{
    if (static_cast<int>(params.size()) != dim()) return false;
    for (std::size_t i = 0; i < domain_.size(); ++i)
        if (!domain_[i].contains(params[i])) return false;
    return true;
}

double Surface::domain_scale() const
{
    double s = 0.0;
    for (const auto& iv : domain_) s = std::max(s, iv.width());
    return s > 0.0 ? s : 1.0;
}

std::vector<Jet> Surface::embedding(std::span<const Jet> params) const
{
    std::vector<Jet> out;
    out.reserve(ambient_dim());
    if (kind_ == SurfaceKind::graph) {
        out.assign(params.begin(), params.end());
        out.push_back(components_.front().evaluate(params));
    } else {
        for (const auto& c : components_) out.push_back(c.evaluate(params));
    }
    return out;
}

Vec Surface::position(std::span<const double> params) const
{
    Vec p(ambient_dim());
    if (kind_ == SurfaceKind::graph) {
        for (int i = 0; i < dim(); ++i) p(i) = params[i];
        p(dim()) = components_.front().evaluate(params);
    } else {
        for (int i = 0; i < ambient_dim(); ++i) p(i) = components_[i].evaluate(params);
    }
    return p;
}

Surface Surface::transformed(const AffineMap& phi) const
{
    if (phi.dim() != ambient_dim()) throw Error(ErrorKind::domain, "affine map dimension mismatch");
    const auto& vars = variables();
    std::vector<Expression> coords;
    if (kind_ == SurfaceKind::graph) {
        for (const auto& v : vars) coords.push_back(Expression::variable(v, vars));
        coords.push_back(components_.front());
    } else {
        coords = components_;
    }
    std::vector<Expression> out;
    for (int k = 0; k < ambient_dim(); ++k) {
        std::optional<Expression> acc;
        for (int j = 0; j < ambient_dim(); ++j) {
            const double c = phi.linear(k, j);
            if (c == 0.0) continue;
            Expression term = c == 1.0 ? coords[j] : c * coords[j];
            acc = acc ? *acc + term : term;
        }
        if (!acc) acc = Expression::constant(phi.translation(k), vars);
        else if (phi.translation(k) != 0.0) acc = *acc + phi.translation(k);
        out.push_back(*acc);
    }
    return parametric(std::move(out), domain_);
}

Vec SurfaceJet::derivative(std::initializer_list<int> vars) const
{
    Vec d(ambient_dim());
    for (int i = 0; i < ambient_dim(); ++i) d(i) = components[i].partial(vars);
    return d;
}

Mat SurfaceJet::tangent_matrix() const
{
    Mat t(ambient_dim(), dim());
    for (int i = 0; i < dim(); ++i) t.col(i) = tangents.at(i);
    return t;
}

SurfaceJet surface_jet(const Surface& s, std::span<const double> params, int order)
{
    if (static_cast<int>(params.size()) != s.dim()) throw Error(ErrorKind::domain, "surface_jet: wrong parameter count");
    if (order < 0 || order > 4) throw Error(ErrorKind::domain, "surface_jet: order must be in [0, 4]");
    SurfaceJet j;
    j.kind = s.kind();
    j.params.assign(params.begin(), params.end());
    const JetLayout& layout = JetLayout::get(s.dim(), order);
    std::vector<Jet> vars;
    for (int i = 0; i < s.dim(); ++i) vars.push_back(Jet::variable(layout, i, params[i]));
    j.components = s.embedding(vars);

    const int m = s.ambient_dim();
    j.position.resize(m);
    for (int k = 0; k < m; ++k) j.position(k) = j.components[k].value();
    if (order >= 1) {
        for (int i = 0; i < s.dim(); ++i) {
            Vec t(m);
            for (int k = 0; k < m; ++k) t(k) = j.components[k].coefficient(1 + i);
            j.tangents.push_back(t);
        }
        const Vec normal = generalized_cross(j.tangents);
        double scale = 1.0;
        for (const auto& t : j.tangents) scale *= t.norm();
        if (!(normal.norm() > 1e-12 * scale) || scale == 0.0)
            throw Error(ErrorKind::immersion, "tangent vectors are linearly dependent");
    }
    if (order >= 2) {
        j.second.assign(s.dim(), std::vector<Vec>(s.dim()));
        for (int a = 0; a < s.dim(); ++a)
            for (int b = a; b < s.dim(); ++b) {
                j.second[a][b] = j.derivative({a, b});
                j.second[b][a] = j.second[a][b];
            }
    }
    return j;
}

TransversalFrame transversal_frame(const SurfaceJet& j)
{
    if (j.order() < 2) throw Error(ErrorKind::domain, "transversal_frame needs a jet of order >= 2");
    TransversalFrame fr;
    fr.conormal = generalized_cross(j.tangents);
    const double n2 = fr.conormal.squaredNorm();
    if (!(n2 > 0.0)) throw Error(ErrorKind::immersion, "rank-deficient tangent space");
    if (j.kind == SurfaceKind::graph) {
        fr.transversal = Vec::Zero(j.ambient_dim());
        fr.transversal(j.ambient_dim() - 1) = 1.0;
    } else {
        fr.transversal = fr.conormal / n2;
    }
    const int n = j.dim();
    fr.metric.resize(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) fr.metric(a, b) = fr.conormal.dot(j.second[a][b]);
    const double scale = fr.metric.norm();
    fr.degenerate = !(std::abs(fr.metric.determinant()) > 1e-12 * std::pow(scale, n)) || scale == 0.0;
    return fr;
}

TransversalFrame blaschke_rescale(const TransversalFrame& fr, int n)
{
    const double det = fr.metric.determinant();
    if (fr.degenerate || det == 0.0) throw Error(ErrorKind::degenerate_metric, "Blaschke rescale needs non-degenerate h");
    const double phi = std::pow(std::abs(det), 1.0 / (n + 2));
    TransversalFrame out = fr;
    out.metric = fr.metric / phi;
    out.conormal = fr.conormal / phi;
    out.transversal = fr.transversal * phi;
    return out;
}

double transversal_volume(const SurfaceJet& j, const TransversalFrame& fr)
{
    Mat m(j.ambient_dim(), j.ambient_dim());
    for (int i = 0; i < j.dim(); ++i) m.col(i) = j.tangents[i];
    m.col(j.dim()) = fr.transversal;
    return m.determinant();
}

Mat AffineSubspace::projector() const
{
    const auto m = base.size();
    if (directions.empty()) return Mat::Zero(m, m);
    Mat d(m, static_cast<Eigen::Index>(directions.size()));
    for (std::size_t i = 0; i < directions.size(); ++i) d.col(static_cast<Eigen::Index>(i)) = directions[i];
    // P = D (D^T D)^{-1} D^T
    return d * (d.transpose() * d).ldlt().solve(d.transpose());
}

AffineSubspace tangent_intersection(const SurfaceJet& j1, const TransversalFrame& f1, const SurfaceJet& j2,
                                    const TransversalFrame& f2, double min_transversality)
{
    const double sine = sine_between(f1.conormal, f2.conormal);
    if (!(sine >= min_transversality))
        throw Error(ErrorKind::transversality, "tangent spaces are (nearly) parallel, sine = " + std::to_string(sine));
    const auto m = j1.position.size();
    Mat a(2, m);
    a.row(0) = f1.conormal.transpose();
    a.row(1) = f2.conormal.transpose();
    Eigen::Vector2d rhs(f1.conormal.dot(j1.position), f2.conormal.dot(j2.position));
    AffineSubspace z;
    z.base = a.transpose() * (a * a.transpose()).ldlt().solve(rhs);
    if (m == 3) {
        const Eigen::Vector3d n1 = f1.conormal, n2 = f2.conormal;
        z.directions.push_back(n1.cross(n2).normalized());
    } else if (m > 3) {
        const Mat ns = null_space(a);
        for (Eigen::Index i = 0; i < ns.cols(); ++i) z.directions.push_back(ns.col(i));
    }
    return z;
}

AffineSubspace tangent_intersection(const SurfaceJet& j1, const SurfaceJet& j2, double min_transversality)
{
    return tangent_intersection(j1, transversal_frame(j1), j2, transversal_frame(j2), min_transversality);
}

Vec tangent_coordinates(const SurfaceJet& j, const Vec& v, double rel_tol)
{
    const Mat t = j.tangent_matrix();
    // Normal equations: t has full column rank at an immersion.
    const Vec c = (t.transpose() * t).ldlt().solve(t.transpose() * v);
    if ((t * c - v).norm() > rel_tol * v.norm())
        throw Error(ErrorKind::not_tangent, "vector is not tangent to the surface");
    return c;
}

TangentDirection h_orthogonal_direction(const SurfaceJet& j, const TransversalFrame& fr, const AffineSubspace& z)
{
    if (fr.degenerate) throw Error(ErrorKind::degenerate_metric, "h is degenerate");
    const int n = j.dim();
    Vec coords(n);
    if (z.directions.empty()) {
        coords = Vec::Unit(n, 0);
    } else {
        Mat rows(z.dim(), n);
        for (int k = 0; k < z.dim(); ++k) {
            const Vec zk = tangent_coordinates(j, z.directions[k]);
            rows.row(k) = (fr.metric * zk).transpose();
        }
        if (n == 2) {
            coords << -rows(0, 1), rows(0, 0);
        } else {
            const Mat ns = null_space(rows, 1e-10);
            if (ns.cols() != 1) throw Error(ErrorKind::degenerate_metric, "h-orthogonal complement is not a line");
            coords = ns.col(0);
        }
        if (!(coords.norm() > 0.0)) throw Error(ErrorKind::degenerate_metric, "h vanishes on Z");
    }
    TangentDirection out;
    out.vector = j.tangent_matrix() * coords;
    const double len = out.vector.norm();
    out.vector /= len;
    out.coordinates = coords / len;
    if (canonical_sign(out.vector) != out.vector) {
        out.vector = -out.vector;
        out.coordinates = -out.coordinates;
    }
    return out;
}

} // namespace emh
