#include "ietidg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace ietidg {

namespace {

std::string edgeName(const EdgeGlue& g)
{
    std::ostringstream os;
    os << "edge (patch " << g.k + 1 << ' ' << toString(g.side_k) << ", patch " << g.l + 1 << ' '
       << toString(g.side_l) << (g.flipped ? ", flipped)" : ")");
    return os.str();
}

}  // namespace

GeometryMap::GeometryMap(KnotVector u, KnotVector v, std::vector<Eigen::Vector2d> control,
                         std::vector<double> weights)
    : kv_{std::move(u), std::move(v)}, control_(std::move(control)), weights_(std::move(weights))
{
    const std::size_t n = static_cast<std::size_t>(kv_[0].size()) * kv_[1].size();
    if (control_.size() != n)
        throw std::invalid_argument("GeometryMap: expected " + std::to_string(n) + " control points");
    if (!weights_.empty()) {
        if (weights_.size() != n) throw std::invalid_argument("GeometryMap: weight count mismatch");
        for (double w : weights_)
            if (!(w > 0.0)) throw std::invalid_argument("GeometryMap: weights must be positive");
    }
    diameter_ = patchDiameter(*this);

    affine_ = !isRational();
    if (affine_) {
        const Eigen::Matrix2d j0 = evalUnchecked(0.0, 0.0).jacobian;
        const double scale = j0.cwiseAbs().maxCoeff();
        const int m = 2 * std::max(kv_[0].degree(), kv_[1].degree()) + 2;
        for (int b = 0; b <= m && affine_; ++b)
            for (int a = 0; a <= m && affine_; ++a) {
                const Eigen::Matrix2d j = evalUnchecked(double(a) / m, double(b) / m).jacobian;
                affine_ = (j - j0).cwiseAbs().maxCoeff() <= 1e-12 * scale;
            }
    }
}

GeometryMap GeometryMap::bilinear(const Eigen::Vector2d& sw, const Eigen::Vector2d& se,
                                  const Eigen::Vector2d& nw, const Eigen::Vector2d& ne)
{
    return GeometryMap(KnotVector::uniform(1, 1), KnotVector::uniform(1, 1), {sw, se, nw, ne});
}

GeometryMap GeometryMap::rectangle(double x0, double y0, double x1, double y1)
{
    return bilinear({x0, y0}, {x1, y0}, {x0, y1}, {x1, y1});
}

GeometryEval GeometryMap::evalUnchecked(double s, double t) const
{
    const BasisDerivatives bu = evalBasisDerivs(kv_[0], s, 1);
    const BasisDerivatives bv = evalBasisDerivs(kv_[1], t, 1);
    const int n1 = kv_[0].size();
    const int pu = kv_[0].degree();
    const int pv = kv_[1].degree();

    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    Eigen::Vector2d xs = Eigen::Vector2d::Zero();
    Eigen::Vector2d xt = Eigen::Vector2d::Zero();
    double w = 0.0, ws = 0.0, wt = 0.0;
    for (int b = 0; b <= pv; ++b) {
        for (int a = 0; a <= pu; ++a) {
            const int idx = (bu.first + a) + n1 * (bv.first + b);
            const double wi = weights_.empty() ? 1.0 : weights_[idx];
            const double n = bu.derivs(0, a) * bv.derivs(0, b) * wi;
            const double ns = bu.derivs(1, a) * bv.derivs(0, b) * wi;
            const double nt = bu.derivs(0, a) * bv.derivs(1, b) * wi;
            x += n * control_[idx];
            xs += ns * control_[idx];
            xt += nt * control_[idx];
            w += n;
            ws += ns;
            wt += nt;
        }
    }
    GeometryEval out;
    out.point = x / w;
    out.jacobian.col(0) = (xs - ws * out.point) / w;
    out.jacobian.col(1) = (xt - wt * out.point) / w;
    return out;
}

GeometryEval GeometryMap::eval(double s, double t) const
{
    GeometryEval e = evalUnchecked(s, t);
    if (std::abs(e.jacobian.determinant()) < 1e-14 * diameter_ * diameter_) {
        std::ostringstream os;
        os << "singular geometry Jacobian at (" << s << ", " << t << ")";
        throw SingularGeometryError(os.str());
    }
    return e;
}

Eigen::Vector2d GeometryMap::point(double s, double t) const
{
    return evalUnchecked(s, t).point;
}

double patchDiameter(const GeometryMap& g)
{
    const int m = std::max(g.knots(0).degree(), g.knots(1).degree()) + 2;
    std::vector<Eigen::Vector2d> pts;
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            if (i != 0 && j != 0 && i != m - 1 && j != m - 1) continue;
            pts.push_back(g.point(double(i) / (m - 1), double(j) / (m - 1)));
        }
    double d = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) d = std::max(d, (pts[a] - pts[b]).norm());
    return d;
}

Patch makePatch(GeometryMap geometry)
{
    std::array<std::vector<double>, 2> grid{geometry.knots(0).breakpoints(),
                                            geometry.knots(1).breakpoints()};
    return Patch{std::move(geometry), std::move(grid)};
}

// ---------------------------------------------------------------------------

MultiPatchTopology::MultiPatchTopology(std::vector<Patch> patches, std::vector<EdgeGlue> glues,
                                       TopologyOptions options)
    : patches_(std::move(patches)), glues_(std::move(glues)), options_(std::move(options))
{
    const int K = numPatches();
    if (K == 0) throw TopologyError("topology without patches");
    side_glue_.assign(K, {-1, -1, -1, -1});
    neighbors_.assign(K, {});

    std::set<std::pair<int, int>> pairs;
    for (std::size_t gi = 0; gi < glues_.size(); ++gi) {
        EdgeGlue& g = glues_[gi];
        if (g.k > g.l) {
            std::swap(g.k, g.l);
            std::swap(g.side_k, g.side_l);
        }
        if (g.k < 0 || g.l >= K || g.k == g.l)
            throw TopologyError("invalid patch indices in " + edgeName(g));
        if (!pairs.insert({g.k, g.l}).second)
            throw TopologyError("patches " + std::to_string(g.k + 1) + " and " +
                                std::to_string(g.l + 1) + " share more than one edge");
        for (auto [patch, side] : {std::pair{g.k, g.side_k}, std::pair{g.l, g.side_l}}) {
            if (side_glue_[patch][index(side)] >= 0)
                throw TopologyError("side glued twice in " + edgeName(g));
            side_glue_[patch][index(side)] = static_cast<int>(gi);
        }
        neighbors_[g.k].push_back(g.l);
        neighbors_[g.l].push_back(g.k);
    }
    for (auto& n : neighbors_) std::sort(n.begin(), n.end());

    dirichlet_.assign(K, {false, false, false, false});
    for (int k = 0; k < K; ++k)
        for (Side s : kSides) dirichlet_[k][index(s)] = side_glue_[k][index(s)] < 0;
    for (auto [k, s] : options_.free_sides) {
        if (k < 0 || k >= K) throw TopologyError("free side on unknown patch");
        if (side_glue_[k][index(s)] >= 0)
            throw TopologyError("glued side of patch " + std::to_string(k + 1) + " declared free");
        dirichlet_[k][index(s)] = false;
    }

    // Vertices: cluster patch corners by physical position.
    double hmin = std::numeric_limits<double>::max();
    for (const auto& p : patches_) hmin = std::min(hmin, p.geometry.diameter());
    const double vtol = options_.conformity_tol * hmin;
    corner_vertex_.assign(K, {-1, -1, -1, -1});
    for (int k = 0; k < K; ++k) {
        for (Corner c : kCorners) {
            const Eigen::Vector2d x =
                geometry(k).point(cornerPoint(c).x(), cornerPoint(c).y());
            int found = -1;
            for (std::size_t v = 0; v < vertices_.size(); ++v)
                if ((vertices_[v].point - x).norm() <= vtol) found = static_cast<int>(v);
            if (found < 0) {
                found = static_cast<int>(vertices_.size());
                vertices_.push_back(Vertex{x, {}});
            }
            vertices_[found].patches.emplace_back(k, c);
            corner_vertex_[k][index(c)] = found;
        }
    }
    for (const auto& v : vertices_) {
        if (static_cast<int>(v.patches.size()) > options_.max_patches_per_vertex)
            throw TopologyError("vertex shared by more than " +
                                std::to_string(options_.max_patches_per_vertex) + " patches");
    }

    for (EdgeGlue& g : glues_) {
        const TraceMap tk = traceMap(static_cast<int>(&g - glues_.data()), g.k);
        const TraceMap tl = traceMap(static_cast<int>(&g - glues_.data()), g.l);
        for (bool end : {false, true}) {
            const Corner ck = sideCorner(g.side_k, tk.reversed ? !end : end);
            const Corner cl = sideCorner(g.side_l, tl.reversed ? !end : end);
            if (vertexOf(g.k, ck) != vertexOf(g.l, cl))
                throw TopologyError("endpoints do not coincide on " + edgeName(g));
        }
        // Physical edge length by Gauss quadrature on the k side.
        const GeometryMap& G = geometry(g.k);
        const int dir = runningDirection(g.side_k);
        const auto breaks = G.knots(dir).breakpoints();
        const QuadratureRule q = makeQuadrature(breaks, 12);
        g.length = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const GeometryEval e = G.eval(sidePoint(g.side_k, q.nodes[i]));
            g.length += q.weights[i] * e.jacobian.col(dir).norm();
        }
    }

    // A Dirichlet side geometrically coinciding with another patch side means
    // a missing glue.
    for (int k = 0; k < K; ++k)
        for (Side s : kSides) {
            if (side_glue_[k][index(s)] >= 0) continue;
            const int a = vertexOf(k, sideCorner(s, false));
            const int b = vertexOf(k, sideCorner(s, true));
            const Eigen::Vector2d mid = geometry(k).point(sidePoint(s, 0.5).x(), sidePoint(s, 0.5).y());
            for (int l = k + 1; l < K; ++l)
                for (Side t : kSides) {
                    if (side_glue_[l][index(t)] >= 0) continue;
                    const int c = vertexOf(l, sideCorner(t, false));
                    const int d = vertexOf(l, sideCorner(t, true));
                    if (!((a == c && b == d) || (a == d && b == c))) continue;
                    const Eigen::Vector2d m2 =
                        geometry(l).point(sidePoint(t, 0.5).x(), sidePoint(t, 0.5).y());
                    if ((mid - m2).norm() <= vtol)
                        throw TopologyError("patch " + std::to_string(k + 1) + " " + toString(s) +
                                            " and patch " + std::to_string(l + 1) + " " +
                                            toString(t) + " coincide but are not glued");
                }
        }

    verifyAssumptions(*this);
}

std::optional<int> MultiPatchTopology::glueBetween(int k, int l) const
{
    for (Side s : kSides) {
        const int g = side_glue_[k][index(s)];
        if (g >= 0 && glues_[g].other(k) == l) return g;
    }
    return std::nullopt;
}

std::optional<int> MultiPatchTopology::glueOnSide(int k, Side s) const
{
    const int g = side_glue_[k][index(s)];
    if (g < 0) return std::nullopt;
    return g;
}

TraceMap MultiPatchTopology::traceMap(int glue, int patch) const
{
    const EdgeGlue& g = glues_[glue];
    TraceMap t;
    t.side = g.sideOf(patch);
    t.reversed = (patch == g.l) && g.flipped;
    return t;
}

TracePoint traceParameterization(const MultiPatchTopology& topo, int glue, int patch, double tau)
{
    const TraceMap tm = topo.traceMap(glue, patch);
    TracePoint out;
    out.param = tm.param(tau);
    const GeometryEval e = topo.geometry(patch).eval(out.param);
    out.physical = e.point;
    out.length_factor = e.jacobian.col(runningDirection(tm.side)).norm();
    return out;
}

AssumptionReport verifyAssumptions(const MultiPatchTopology& topo)
{
    AssumptionReport rep;
    for (int gi = 0; gi < static_cast<int>(topo.glues().size()); ++gi) {
        const EdgeGlue& g = topo.glue(gi);
        const int p = std::max({topo.geometry(g.k).knots(0).degree(), topo.geometry(g.k).knots(1).degree(),
                                topo.geometry(g.l).knots(0).degree(), topo.geometry(g.l).knots(1).degree()});
        const int m = 4 * (p + 1);
        double res = 0.0;
        for (int i = 0; i < m; ++i) {
            const double tau = (i + 0.5) / m;
            const TraceMap a = topo.traceMap(gi, g.k);
            const TraceMap b = topo.traceMap(gi, g.l);
            const Eigen::Vector2d xa = topo.geometry(g.k).point(a.param(tau).x(), a.param(tau).y());
            const Eigen::Vector2d xb = topo.geometry(g.l).point(b.param(tau).x(), b.param(tau).y());
            res = std::max(res, (xa - xb).norm());
        }
        rep.glue_residuals.push_back(res);
        rep.max_conformity_residual = std::max(rep.max_conformity_residual, res);
        const double tol = topo.options().conformity_tol * std::min(topo.diameter(g.k), topo.diameter(g.l));
        if (res > tol) {
            std::ostringstream os;
            os << "nonconforming " << edgeName(g) << ": residual " << res;
            throw TopologyError(os.str());
        }
    }

    for (int k = 0; k < topo.numPatches(); ++k) {
        const GeometryMap& G = topo.geometry(k);
        const double H = G.diameter();
        const int m = std::max(2, 4 * std::max(G.knots(0).degree(), G.knots(1).degree()));
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const Eigen::Matrix2d J = G.eval(double(i) / (m - 1), double(j) / (m - 1)).jacobian;
                Eigen::JacobiSVD<Eigen::Matrix2d> svd(J);
                const double smax = svd.singularValues()(0);
                const double smin = svd.singularValues()(1);
                rep.c1 = std::max({rep.c1, smax / H, H / smin});
            }
    }

    for (const Vertex& v : topo.vertices()) {
        rep.max_patches_per_vertex = std::max(rep.max_patches_per_vertex, static_cast<int>(v.patches.size()));
        bool interior = v.patches.size() >= 2;
        for (auto [k, c] : v.patches)
            for (Side s : cornerSides(c)) interior = interior && !topo.isDirichlet(k, s);
        if (interior) ++rep.num_interior_vertices;
    }
    return rep;
}

}  // namespace ietidg
