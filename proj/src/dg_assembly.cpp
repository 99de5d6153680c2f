#include "ietidg/dg_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace ietidg {

namespace {

/// Values and parametric gradients of the (p+1)^2 tensor functions that may
/// be nonzero at a point.
struct TensorEval {
    int n = 0;
    std::vector<int> dofs;  // -1 for removed functions
    std::vector<double> value, ds, dt;
};

TensorEval evalTensor(const TensorBSplineSpace& space, double s, double t, int order)
{
    const BasisDerivatives bu = evalBasisDerivs(space.knots(0), s, order);
    const BasisDerivatives bv = evalBasisDerivs(space.knots(1), t, order);
    TensorEval out;
    out.n = space.degree() + 1;
    const int m = out.n * out.n;
    out.dofs.resize(m);
    out.value.resize(m);
    out.ds.resize(m);
    out.dt.resize(m);
    for (int b = 0; b < out.n; ++b)
        for (int a = 0; a < out.n; ++a) {
            const int i = a + out.n * b;
            out.dofs[i] = space.dofAt(bu.first + a, bv.first + b);
            out.value[i] = bu.derivs(0, a) * bv.derivs(0, b);
            if (order > 0) {
                out.ds[i] = bu.derivs(1, a) * bv.derivs(0, b);
                out.dt[i] = bu.derivs(0, a) * bv.derivs(1, b);
            }
        }
    return out;
}

int pointsPerSpan(const Discretization& disc, bool curved, const AssemblyOptions& opts)
{
    return disc.degree() + 1 + opts.extra_points + (curved ? opts.curved_extra_points : 0);
}

std::vector<double> edgeBreakpoints(const TensorBSplineSpace& space, const TraceMap& tm)
{
    std::vector<double> b = space.knots(runningDirection(tm.side)).breakpoints();
    if (tm.reversed) {
        for (double& x : b) x = 1.0 - x;
        std::reverse(b.begin(), b.end());
    }
    return b;
}

SparseMatrix fromTriplets(int n, const Triplets& t)
{
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------

EnrichedSpaceLayout::EnrichedSpaceLayout(const Discretization& disc, int k) : patch_(k)
{
    const auto& topo = disc.topology();
    const TensorBSplineSpace& own = disc.space(k);
    num_base_ = own.size();
    num_interior_ = own.numInterior();
    int offset = num_base_;
    for (int l : topo.neighbors(k)) {
        NeighborBlock b;
        b.patch = l;
        b.glue = *topo.glueBetween(k, l);
        b.own_trace = topo.traceMap(b.glue, k);
        b.neighbor_trace = topo.traceMap(b.glue, l);
        const Side ls = b.neighbor_trace.side;
        b.trace_dofs = disc.space(l).sideDofs(ls);
        b.running = disc.space(l).sideRunning(ls);
        b.offset = offset;
        b.pair_grid_size = disc.pairGridSize(k, l);
        offset += b.size();
        blocks_.push_back(std::move(b));
    }
    size_ = offset;
}

const NeighborBlock& EnrichedSpaceLayout::blockFor(int l) const
{
    for (const auto& b : blocks_)
        if (b.patch == l) return b;
    throw std::out_of_range("patch " + std::to_string(l + 1) + " is not a neighbor of patch " +
                            std::to_string(patch_ + 1));
}

// ---------------------------------------------------------------------------

SparseMatrix assembleVolume(const Discretization& disc, int k, const AssemblyOptions& opts)
{
    const TensorBSplineSpace& space = disc.space(k);
    const GeometryMap& geo = disc.topology().geometry(k);
    const int q = pointsPerSpan(disc, !geo.isAffine(), opts);
    const GaussRule g = gaussLegendre(q);
    const auto bu = space.knots(0).breakpoints();
    const auto bv = space.knots(1).breakpoints();

    Triplets trip;
    const int n = space.degree() + 1;
    Eigen::MatrixXd local(n * n, n * n);
    Eigen::MatrixXd grads(2, n * n);
    for (std::size_t ev = 1; ev < bv.size(); ++ev) {
        for (std::size_t eu = 1; eu < bu.size(); ++eu) {
            local.setZero();
            std::vector<int> dofs;
            const double hu = 0.5 * (bu[eu] - bu[eu - 1]);
            const double hv = 0.5 * (bv[ev] - bv[ev - 1]);
            for (int j = 0; j < q; ++j)
                for (int i = 0; i < q; ++i) {
                    const double s = bu[eu - 1] + hu * (g.nodes[i] + 1.0);
                    const double t = bv[ev - 1] + hv * (g.nodes[j] + 1.0);
                    GeometryEval ge;
                    try {
                        ge = geo.eval(s, t);
                    } catch (const SingularGeometryError& e) {
                        throw SingularGeometryError(std::string(e.what()) + " in element (" +
                                                    std::to_string(eu - 1) + ", " + std::to_string(ev - 1) +
                                                    ") of patch " + std::to_string(k + 1));
                    }
                    const TensorEval te = evalTensor(space, s, t, 1);
                    const Eigen::Matrix2d jinvT = ge.jacobian.inverse().transpose();
                    const double w = g.weights[i] * g.weights[j] * hu * hv * std::abs(ge.jacobian.determinant());
                    for (int a = 0; a < n * n; ++a) grads.col(a) = jinvT * Eigen::Vector2d(te.ds[a], te.dt[a]);
                    local.noalias() += w * grads.transpose() * grads;
                    dofs = te.dofs;
                }
            for (int a = 0; a < n * n; ++a) {
                if (dofs[a] < 0) continue;
                for (int b = 0; b < n * n; ++b)
                    if (dofs[b] >= 0) trip.emplace_back(dofs[a], dofs[b], local(a, b));
            }
        }
    }
    return fromTriplets(space.size(), trip);
}

void assembleCoupling(const Discretization& disc, const EnrichedSpaceLayout& layout, int block,
                      const AssemblyOptions& opts, Triplets& consistency, Triplets& penalty)
{
    const int k = layout.patch();
    const NeighborBlock& nb = layout.neighbors()[block];
    const TensorBSplineSpace& own = disc.space(k);
    const TensorBSplineSpace& other = disc.space(nb.patch);
    const GeometryMap& geo = disc.topology().geometry(k);
    const bool curved = !geo.isAffine() || !disc.topology().geometry(nb.patch).isAffine();
    const int p = disc.degree();
    const double sigma = opts.delta * p * p / nb.pair_grid_size;

    const auto edge = mergeBreakpoints(edgeBreakpoints(own, nb.own_trace), edgeBreakpoints(other, nb.neighbor_trace));
    const QuadratureRule rule = makeQuadrature(edge, pointsPerSpan(disc, curved, opts));

    const Side own_side = nb.own_trace.side;
    const int own_dir = runningDirection(own_side);
    const Side other_side = nb.neighbor_trace.side;
    const KnotVector& other_kv = other.knots(runningDirection(other_side));
    std::vector<int> position(other_kv.size(), -1);
    for (int i = 0; i < nb.size(); ++i) position[nb.running[i]] = i;

    const int n = p + 1;
    std::vector<int> idx;
    std::vector<double> jump, dnormal;
    for (std::size_t iq = 0; iq < rule.nodes.size(); ++iq) {
        const double tau = rule.nodes[iq];
        const Eigen::Vector2d st = nb.own_trace.param(tau);
        const GeometryEval ge = geo.eval(st);
        const Eigen::Matrix2d jinvT = ge.jacobian.inverse().transpose();
        const Eigen::Vector2d normal = (jinvT * parametricNormal(own_side)).normalized();
        const double w = rule.weights[iq] * ge.jacobian.col(own_dir).norm();

        idx.clear();
        jump.clear();
        dnormal.clear();
        const TensorEval te = evalTensor(own, st.x(), st.y(), 1);
        for (int a = 0; a < n * n; ++a) {
            if (te.dofs[a] < 0) continue;
            idx.push_back(te.dofs[a]);
            jump.push_back(-te.value[a]);
            dnormal.push_back(normal.dot(jinvT * Eigen::Vector2d(te.ds[a], te.dt[a])));
        }
        const BasisValues bl = evalBasis(other_kv, nb.neighbor_trace.running(tau));
        for (int a = 0; a < n; ++a) {
            const int pos = position[bl.first + a];
            if (pos < 0) continue;
            idx.push_back(nb.offset + pos);
            jump.push_back(bl.values[a]);
            dnormal.push_back(0.0);
        }
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) {
                const double m = 0.5 * w * (dnormal[i] * jump[j] + jump[i] * dnormal[j]);
                if (m != 0.0) consistency.emplace_back(idx[i], idx[j], m);
                const double r = w * sigma * jump[i] * jump[j];
                if (r != 0.0) penalty.emplace_back(idx[i], idx[j], r);
            }
    }
}

Eigen::VectorXd assembleLoad(const Discretization& disc, const EnrichedSpaceLayout& layout, const Source& f,
                             const AssemblyOptions& opts)
{
    const int k = layout.patch();
    const TensorBSplineSpace& space = disc.space(k);
    const GeometryMap& geo = disc.topology().geometry(k);
    const int q = pointsPerSpan(disc, !geo.isAffine(), opts);
    const GaussRule g = gaussLegendre(q);
    const auto bu = space.knots(0).breakpoints();
    const auto bv = space.knots(1).breakpoints();

    Eigen::VectorXd load = Eigen::VectorXd::Zero(layout.size());
    for (std::size_t ev = 1; ev < bv.size(); ++ev)
        for (std::size_t eu = 1; eu < bu.size(); ++eu) {
            const double hu = 0.5 * (bu[eu] - bu[eu - 1]);
            const double hv = 0.5 * (bv[ev] - bv[ev - 1]);
            for (int j = 0; j < q; ++j)
                for (int i = 0; i < q; ++i) {
                    const double s = bu[eu - 1] + hu * (g.nodes[i] + 1.0);
                    const double t = bv[ev - 1] + hv * (g.nodes[j] + 1.0);
                    const GeometryEval ge = geo.eval(s, t);
                    const double fw =
                        f(ge.point) * g.weights[i] * g.weights[j] * hu * hv * std::abs(ge.jacobian.determinant());
                    if (fw == 0.0) continue;
                    const TensorEval te = evalTensor(space, s, t, 0);
                    for (std::size_t a = 0; a < te.dofs.size(); ++a)
                        if (te.dofs[a] >= 0) load[te.dofs[a]] += fw * te.value[a];
                }
        }
    return load;
}

LocalSystem assembleLocalSystem(const Discretization& disc, int k, const Source& f, const AssemblyOptions& opts)
{
    LocalSystem sys{EnrichedSpaceLayout(disc, k), opts.delta, {}, {}, {}, {}, {}};
    const int ne = sys.layout.size();

    const SparseMatrix vol = assembleVolume(disc, k, opts);
    Triplets tv;
    for (int c = 0; c < vol.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(vol, c); it; ++it) tv.emplace_back(it.row(), it.col(), it.value());
    sys.volume = fromTriplets(ne, tv);

    Triplets tm, tr;
    for (int b = 0; b < static_cast<int>(sys.layout.neighbors().size()); ++b)
        assembleCoupling(disc, sys.layout, b, opts, tm, tr);
    sys.consistency = fromTriplets(ne, tm);
    sys.penalty = fromTriplets(ne, tr);
    sys.matrix = sys.volume + sys.consistency + sys.penalty;
    sys.load = assembleLoad(disc, sys.layout, f, opts);
    return sys;
}

std::vector<LocalSystem> assembleLocalSystems(const Discretization& disc, const Source& f,
                                              const AssemblyOptions& opts)
{
    std::vector<LocalSystem> out;
    out.reserve(disc.numPatches());
    for (int k = 0; k < disc.numPatches(); ++k) out.push_back(assembleLocalSystem(disc, k, f, opts));
    return out;
}

// ---------------------------------------------------------------------------

std::vector<int> globalOffsets(const Discretization& disc)
{
    std::vector<int> off{0};
    for (int k = 0; k < disc.numPatches(); ++k) off.push_back(off.back() + disc.space(k).size());
    return off;
}

std::vector<int> enrichedToGlobal(const EnrichedSpaceLayout& layout, const std::vector<int>& offsets)
{
    std::vector<int> map(layout.size());
    for (int i = 0; i < layout.numBase(); ++i) map[i] = offsets[layout.patch()] + i;
    for (const auto& b : layout.neighbors())
        for (int i = 0; i < b.size(); ++i) map[b.offset + i] = offsets[b.patch] + b.trace_dofs[i];
    return map;
}

GlobalDgSystem assembleGlobalSystem(const std::vector<LocalSystem>& locals, const std::vector<int>& offsets)
{
    GlobalDgSystem sys;
    sys.offsets = offsets;
    const int n = offsets.back();
    Triplets ta, td;
    sys.load = Eigen::VectorXd::Zero(n);
    for (const LocalSystem& loc : locals) {
        const auto map = enrichedToGlobal(loc.layout, offsets);
        for (int c = 0; c < loc.matrix.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(loc.matrix, c); it; ++it)
                ta.emplace_back(map[it.row()], map[it.col()], it.value());
        const SparseMatrix dn = loc.volume + loc.penalty;
        for (int c = 0; c < dn.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(dn, c); it; ++it)
                td.emplace_back(map[it.row()], map[it.col()], it.value());
        for (int i = 0; i < loc.layout.size(); ++i) sys.load[map[i]] += loc.load[i];
    }
    sys.matrix = fromTriplets(n, ta);
    sys.norm = fromTriplets(n, td);
    return sys;
}

Eigen::VectorXd restrictToEnriched(const EnrichedSpaceLayout& layout, const std::vector<int>& offsets,
                                   const Eigen::VectorXd& global)
{
    const auto map = enrichedToGlobal(layout, offsets);
    Eigen::VectorXd out(layout.size());
    for (int i = 0; i < layout.size(); ++i) out[i] = global[map[i]];
    return out;
}

double evaluate(const TensorBSplineSpace& space, const Eigen::VectorXd& coeffs, double s, double t)
{
    const TensorEval te = evalTensor(space, s, t, 0);
    double v = 0.0;
    for (std::size_t a = 0; a < te.dofs.size(); ++a)
        if (te.dofs[a] >= 0) v += coeffs[te.dofs[a]] * te.value[a];
    return v;
}

double l2Error(const Discretization& disc, const Eigen::VectorXd& global, const Source& exact, int extra_points)
{
    const auto offsets = globalOffsets(disc);
    double err2 = 0.0;
    for (int k = 0; k < disc.numPatches(); ++k) {
        const TensorBSplineSpace& space = disc.space(k);
        const GeometryMap& geo = disc.topology().geometry(k);
        const Eigen::VectorXd c = global.segment(offsets[k], space.size());
        const int q = disc.degree() + 1 + extra_points + (geo.isAffine() ? 0 : 8);
        const GaussRule g = gaussLegendre(q);
        const auto bu = space.knots(0).breakpoints();
        const auto bv = space.knots(1).breakpoints();
        for (std::size_t ev = 1; ev < bv.size(); ++ev)
            for (std::size_t eu = 1; eu < bu.size(); ++eu) {
                const double hu = 0.5 * (bu[eu] - bu[eu - 1]);
                const double hv = 0.5 * (bv[ev] - bv[ev - 1]);
                for (int j = 0; j < q; ++j)
                    for (int i = 0; i < q; ++i) {
                        const double s = bu[eu - 1] + hu * (g.nodes[i] + 1.0);
                        const double t = bv[ev - 1] + hv * (g.nodes[j] + 1.0);
                        const GeometryEval ge = geo.eval(s, t);
                        const double diff = evaluate(space, c, s, t) - exact(ge.point);
                        err2 += diff * diff * g.weights[i] * g.weights[j] * hu * hv *
                                std::abs(ge.jacobian.determinant());
                    }
            }
    }
    return std::sqrt(err2);
}

CoercivityReport measureCoercivity(const GlobalDgSystem& sys)
{
    const Eigen::MatrixXd a = Eigen::MatrixXd(sys.matrix);
    const Eigen::MatrixXd d = Eigen::MatrixXd(sys.norm);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()),
                                                                 0.5 * (d + d.transpose()),
                                                                 Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("measureCoercivity: dG norm not definite");
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace ietidg
