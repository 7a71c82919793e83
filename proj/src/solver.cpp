#include "emh/solver.hpp"

#include "emh/conics.hpp"
#include "emh/error.hpp"
#include "emh/regularity.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_map>

namespace emh {

std::size_t SeedGrid::size() const
{
    if (counts.empty()) return 0;
    std::size_t n = 1;
    for (int c : counts) n *= static_cast<std::size_t>(std::max(c, 0));
    return n;
}

std::vector<std::vector<double>> SeedGrid::nodes() const
{
    std::vector<std::vector<double>> out;
    const std::size_t total = size();
    out.reserve(total);
    const std::size_t d = counts.size();
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<double> node(d);
        std::size_t rest = idx;
        for (std::size_t k = d; k-- > 0;) {
            const int i = static_cast<int>(rest % counts[k]);
            rest /= counts[k];
            node[k] = box[k].lo + box[k].width() * (2.0 * i + 1.0) / (2.0 * counts[k]);
        }
        out.push_back(std::move(node));
    }
    return out;
}

void SolverConfig::validate(int dim) const
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::config, "solver: " + what); };
    if (!(tolerance > 0)) fail("tolerance must be positive");
    if (max_iterations < 1) fail("max_iterations must be >= 1");
    if (!(damping > 0 && damping < 1)) fail("damping must be in (0, 1)");
    if (max_halvings < 0) fail("max_halvings must be >= 0");
    if (!(transversality_min > 0)) fail("transversality_min must be positive");
    if (!(dedup_radius > 0)) fail("dedup_radius must be positive");
    if (threads < 0) fail("threads must be >= 0");
    if (jet_order < 2 || jet_order > 4) fail("jet_order must be 2, 3 or 4");
    if (!periods.empty() && static_cast<int>(periods.size()) != dim) fail("periods need one entry per parameter");
    for (double T : periods)
        if (!(T >= 0)) fail("periods must be >= 0");
    for (const SeedGrid* g : {&grid1, &grid2}) {
        if (static_cast<int>(g->box.size()) != dim || static_cast<int>(g->counts.size()) != dim)
            fail("seed grid needs one interval and one count per parameter");
        for (int c : g->counts)
            if (c < 0) fail("grid counts must be >= 0");
        for (const auto& iv : g->box)
            if (!(iv.hi >= iv.lo)) fail("grid box has lo > hi");
    }
}

const char* to_string(SeedStatus s) noexcept
{
    switch (s) {
    case SeedStatus::converged: return "converged";
    case SeedStatus::duplicate: return "duplicate";
    case SeedStatus::diverged: return "diverged";
    case SeedStatus::rejected_transversality: return "rejected-transversality";
    case SeedStatus::rejected_domain: return "rejected-domain";
    case SeedStatus::rejected_degenerate: return "rejected-degenerate";
    }
    return "diverged";
}

std::size_t SolutionSet::count(SeedStatus s) const
{
    std::size_t n = 0;
    for (const auto& r : seeds) n += r.result.status == s;
    return n;
}

namespace {

SeedStatus status_of(const Error& e)
{
    switch (e.kind()) {
    case ErrorKind::transversality: return SeedStatus::rejected_transversality;
    case ErrorKind::domain: return SeedStatus::rejected_domain;
    default: return SeedStatus::rejected_degenerate;
    }
}

// Solvability residual at p2 with the p1 jet fixed.
struct Residual {
    const SurfaceJet& j1;
    const Surface& s2;
    PairOptions opts;

    std::vector<double> operator()(std::span<const double> p2) const
    {
        SurfaceJet j2 = surface_jet(s2, p2, 2);
        const double scale = std::max({j1.position.norm(), j2.position.norm(), 1.0});
        if ((j1.position - j2.position).norm() < 2e-8 * scale)
            throw Error(ErrorKind::transversality, "coincident points");
        return solvability_residual(build_pair(j1, std::move(j2), opts));
    }
};

double step_for(const Surface& s, int k)
{
    const auto& d = s.domain();
    const double w = k < static_cast<int>(d.size()) ? d[k].width() : 0.0;
    return 1e-6 * (w > 0 ? w : 1.0);
}

RefineResult refine(const Residual& f, std::span<const double> seed2, const SolverConfig& cfg)
{
    const Surface& s2 = f.s2;
    const int n = s2.dim();
    RefineResult out;
    out.p2.assign(seed2.begin(), seed2.end());
    if (!s2.contains(out.p2)) {
        out.status = SeedStatus::rejected_domain;
        out.message = "seed outside the domain";
        return out;
    }
    try {
        Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(f(out.p2).data(), n);
        double rn = r.lpNorm<Eigen::Infinity>();
        for (;;) {
            out.residual = rn;
            if (rn < cfg.tolerance) {
                out.status = SeedStatus::converged;
                return out;
            }
            if (out.iterations >= cfg.max_iterations) {
                out.status = SeedStatus::diverged;
                out.message = "iteration limit";
                return out;
            }
            ++out.iterations;

            Mat jac(n, n);
            for (int k = 0; k < n; ++k) {
                const double h = step_for(s2, k);
                auto at = out.p2;
                at[k] = out.p2[k] + h;
                const auto rp = f(at);
                at[k] = out.p2[k] - h;
                const auto rm = f(at);
                for (int i = 0; i < n; ++i) jac(i, k) = (rp[i] - rm[i]) / (2 * h);
            }
            Eigen::FullPivLU<Mat> lu(jac);
            if (!lu.isInvertible()) {
                out.status = SeedStatus::diverged;
                out.message = "singular Jacobian";
                return out;
            }
            const Eigen::VectorXd d = lu.solve(-r);

            // Backtracking: accept the first step that stays in the domain and
            // reduces the residual.
            double alpha = 1.0;
            bool accepted = false, left_domain = false;
            std::optional<Error> last;
            for (int halving = 0; halving <= cfg.max_halvings; ++halving, alpha *= cfg.damping) {
                std::vector<double> trial(n);
                for (int k = 0; k < n; ++k) trial[k] = out.p2[k] + alpha * d(k);
                if (!s2.contains(trial)) {
                    left_domain = true;
                    continue;
                }
                std::vector<double> rt;
                try {
                    rt = f(trial);
                } catch (const Error& e) {
                    last = e;
                    continue;
                }
                const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(rt.data(), n);
                const double tn = rv.lpNorm<Eigen::Infinity>();
                if (tn < rn) {
                    out.p2 = std::move(trial);
                    r = rv;
                    rn = tn;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                out.residual = rn;
                if (last) {
                    out.status = status_of(*last);
                    out.message = last->what();
                } else if (left_domain) {
                    out.status = SeedStatus::rejected_domain;
                    out.message = "Newton step leaves the domain";
                } else {
                    out.status = SeedStatus::diverged;
                    out.message = "no descent after damping";
                }
                return out;
            }
        }
    } catch (const Error& e) {
        out.status = status_of(e);
        out.message = e.what();
        return out;
    }
}

// Hash of the cell containing a parameter vector, for deduplication.
struct CellKey {
    std::vector<long long> cell;
    bool operator==(const CellKey&) const = default;
};
struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept
    {
        std::size_t h = 1469598103934665603ull;
        for (long long c : k.cell) h = (h ^ static_cast<std::size_t>(c)) * 1099511628211ull;
        return h;
    }
};

} // namespace

RefineResult refine_pair(const Surface& s1, std::span<const double> p1, const Surface& s2,
                         std::span<const double> seed2, const SolverConfig& cfg)
{
    PairOptions opts;
    opts.min_transversality = cfg.transversality_min;
    try {
        const SurfaceJet j1 = surface_jet(s1, p1, 2);
        return refine(Residual{j1, s2, opts}, seed2, cfg);
    } catch (const Error& e) {
        RefineResult out;
        out.p2.assign(seed2.begin(), seed2.end());
        out.status = status_of(e);
        out.message = e.what();
        return out;
    }
}

EnvelopeSolution solve_pair(const Surface& s1, std::span<const double> p1, const Surface& s2,
                            std::span<const double> p2, const SolverConfig& cfg)
{
    PairOptions opts;
    opts.min_transversality = cfg.transversality_min;
    opts.jet_order = cfg.jet_order;
    EnvelopeSolution sol = envelope_point(build_pair(s1, p1, s2, p2, opts));
    if (cfg.diagnostics) {
        try {
            const DeltaResult d = delta(s1, s2, sol);
            sol.delta = d.delta;
            sol.smooth = d.smooth;
        } catch (const Error&) {
        }
        if (s1.ambient_dim() <= 3) {
            try {
                const ContactReport c = contact_conic(sol);
                sol.conic = ConicSummary{c.conic.conic_class, c.center_distance, c.contact_det};
            } catch (const Error&) {
            }
        }
    }
    return sol;
}

SolutionCheck verify_solution(const Surface& s1, const Surface& s2, const EnvelopeSolution& sol,
                              const SolverConfig& cfg)
{
    SolutionCheck chk;
    const int n = s1.dim();
    const auto p1 = sol.p1();
    const auto p2 = sol.p2();
    PairOptions opts;
    opts.min_transversality = cfg.transversality_min;
    const PairConfiguration pc = build_pair(s1, p1, s2, p2, opts);
    chk.solvability = max_abs(solvability_residual(pc));

    const MidPlane mp = mid_plane(pc);
    const double scale = mp.normal.norm() * (1.0 + sol.x.norm() + pc.mid_point.norm());
    chk.plane = std::abs(mid_plane_value(s1, p1, s2, p2, sol.x)) / scale;

    std::vector<double> q = p1;
    q.insert(q.end(), p2.begin(), p2.end());
    for (int k = 0; k < 2 * n; ++k) {
        const double h = step_for(k < n ? s1 : s2, k % n);
        auto value = [&](double shift) {
            auto at = q;
            at[k] += shift;
            return mid_plane_value(s1, std::span<const double>(at.data(), n), s2,
                                   std::span<const double>(at.data() + n, n), sol.x);
        };
        chk.derivatives = std::max(chk.derivatives, std::abs(value(h) - value(-h)) / (2 * h) / scale);
    }
    chk.ok = chk.solvability < cfg.tolerance && chk.plane < 1e-6 && chk.derivatives < 1e-6;
    return chk;
}

SolutionSet sweep(const Surface& s1, const Surface& s2, const SolverConfig& cfg)
{
    if (s1.dim() != s2.dim()) throw Error(ErrorKind::config, "surfaces of different dimension");
    cfg.validate(s1.dim());
    const auto nodes1 = cfg.grid1.nodes();
    const auto nodes2 = cfg.grid2.nodes();
    const std::size_t n2 = nodes2.size();

    SolutionSet set;
    set.seeds.resize(nodes1.size() * n2);

    PairOptions opts;
    opts.min_transversality = cfg.transversality_min;

    // Rows of seeds sharing p1 are independent work items.
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i1; (i1 = next.fetch_add(1)) < nodes1.size();) {
            std::optional<SurfaceJet> j1;
            std::optional<Error> bad;
            try {
                j1 = surface_jet(s1, nodes1[i1], 2);
            } catch (const Error& e) {
                bad = e;
            }
            for (std::size_t i2 = 0; i2 < n2; ++i2) {
                SeedRecord& rec = set.seeds[i1 * n2 + i2];
                rec.seed_index = i1 * n2 + i2;
                rec.p1 = nodes1[i1];
                rec.seed2 = nodes2[i2];
                if (bad) {
                    rec.result.status = status_of(*bad);
                    rec.result.message = bad->what();
                    rec.result.p2 = rec.seed2;
                    continue;
                }
                rec.result = refine(Residual{*j1, s2, opts}, rec.seed2, cfg);
                if (rec.result.status == SeedStatus::converged)
                    for (std::size_t k = 0; k < cfg.periods.size(); ++k) {
                        const double T = cfg.periods[k];
                        if (T <= 0) continue;
                        const double lo = cfg.grid2.box[k].lo;
                        double& x = rec.result.p2[k];
                        x = lo + std::fmod(std::fmod(x - lo, T) + T, T);
                        if (x >= lo + T) x = lo;
                    }
            }
        }
    };
    int threads = cfg.threads == 0 ? static_cast<int>(std::thread::hardware_concurrency()) : cfg.threads;
    threads = std::max(1, std::min<int>(threads, static_cast<int>(nodes1.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Deduplicate in seed order so the first seed reaching a root owns it.
    const double r = cfg.dedup_radius;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells;
    std::vector<std::vector<double>> roots;
    auto key_of = [&](const std::vector<double>& q) {
        CellKey k;
        for (double x : q) k.cell.push_back(static_cast<long long>(std::floor(x / r)));
        return k;
    };
    auto find_root = [&](const std::vector<double>& q) -> std::optional<std::size_t> {
        const CellKey base = key_of(q);
        const std::size_t d = q.size();
        std::size_t combos = 1;
        for (std::size_t i = 0; i < d; ++i) combos *= 3;
        for (std::size_t c = 0; c < combos; ++c) {
            CellKey k = base;
            std::size_t rest = c;
            for (std::size_t i = 0; i < d; ++i, rest /= 3) k.cell[i] += static_cast<long long>(rest % 3) - 1;
            const auto it = cells.find(k);
            if (it == cells.end()) continue;
            for (std::size_t idx : it->second) {
                double dist = 0.0;
                for (std::size_t i = 0; i < d; ++i) dist += (roots[idx][i] - q[i]) * (roots[idx][i] - q[i]);
                if (std::sqrt(dist) <= r) return idx;
            }
        }
        return std::nullopt;
    };

    std::vector<std::size_t> root_owner;
    for (auto& rec : set.seeds) {
        if (rec.result.status != SeedStatus::converged) continue;
        std::vector<double> q = rec.p1;
        q.insert(q.end(), rec.result.p2.begin(), rec.result.p2.end());
        if (find_root(q)) {
            rec.result.status = SeedStatus::duplicate;
            continue;
        }
        cells[key_of(q)].push_back(roots.size());
        roots.push_back(std::move(q));
        root_owner.push_back(rec.seed_index);
    }

    // Envelope points and diagnostics, in root order.
    for (std::size_t k = 0; k < roots.size(); ++k) {
        SeedRecord& rec = set.seeds[root_owner[k]];
        try {
            EnvelopeSolution sol = solve_pair(s1, rec.p1, s2, rec.result.p2, cfg);
            if (max_abs(sol.residuals.solvability) >= cfg.tolerance) {
                rec.result.status = SeedStatus::diverged;
                rec.result.message = "residual above tolerance at the emitted jet order";
                continue;
            }
            rec.solution = set.solutions.size();
            set.solutions.push_back(std::move(sol));
            set.solution_seed.push_back(rec.seed_index);
        } catch (const Error& e) {
            rec.result.status = status_of(e);
            rec.result.message = e.what();
        }
    }
    return set;
}

} // namespace emh
