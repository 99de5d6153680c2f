#include "ietidg/ieti_dp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ietidg {

namespace {

int findPosition(const std::vector<int>& list, int value)
{
    const auto it = std::find(list.begin(), list.end(), value);
    if (it == list.end()) return -1;
    return static_cast<int>(it - list.begin());
}

/// Skeleton index in patch l of the copy of patch k's dof `dof`.
int copySkeletonIndex(const EnrichedSpaceLayout& layout_l, int k, int dof)
{
    const NeighborBlock& b = layout_l.blockFor(k);
    const int pos = findPosition(b.trace_dofs, dof);
    if (pos < 0)
        throw TopologyError("dof " + std::to_string(dof) + " of patch " + std::to_string(k + 1) +
                            " has no copy in patch " + std::to_string(layout_l.patch() + 1));
    return b.offset + pos - layout_l.numInterior();
}

}  // namespace

Algorithm parseAlgorithm(const std::string& name)
{
    if (name == "A" || name == "a") return Algorithm::A;
    if (name == "B" || name == "b") return Algorithm::B;
    if (name == "C" || name == "c") return Algorithm::C;
    throw std::invalid_argument("unknown algorithm '" + name + "' (expected A, B or C)");
}

const char* toString(Algorithm alg) noexcept
{
    switch (alg) {
    case Algorithm::A: return "A";
    case Algorithm::B: return "B";
    case Algorithm::C: return "C";
    }
    return "?";
}

std::vector<int> skeletonOffsets(const std::vector<EnrichedSpaceLayout>& layouts)
{
    std::vector<int> off{0};
    for (const auto& l : layouts) off.push_back(off.back() + l.skeletonSize());
    return off;
}

// ---------------------------------------------------------------------------

JumpMatrix::JumpMatrix(std::vector<Row> rows, int cols) : rows_(std::move(rows)), cols_(cols)
{
    Triplets t;
    for (int i = 0; i < static_cast<int>(rows_.size()); ++i) {
        if (rows_[i].plus == rows_[i].minus || rows_[i].plus < 0 || rows_[i].minus < 0 ||
            rows_[i].plus >= cols || rows_[i].minus >= cols)
            throw std::invalid_argument("JumpMatrix: invalid row " + std::to_string(i));
        t.emplace_back(i, rows_[i].plus, 1.0);
        t.emplace_back(i, rows_[i].minus, -1.0);
    }
    b_.resize(static_cast<int>(rows_.size()), cols);
    b_.setFromTriplets(t.begin(), t.end());
}

Eigen::VectorXd JumpMatrix::apply(const Eigen::VectorXd& w) const
{
    Eigen::VectorXd out(rows());
    for (int i = 0; i < rows(); ++i) out[i] = w[rows_[i].plus] - w[rows_[i].minus];
    return out;
}

Eigen::VectorXd JumpMatrix::applyTranspose(const Eigen::VectorXd& lambda) const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cols_);
    for (int i = 0; i < rows(); ++i) {
        out[rows_[i].plus] += lambda[i];
        out[rows_[i].minus] -= lambda[i];
    }
    return out;
}

JumpMatrix buildJumpMatrix(const Discretization& disc, const std::vector<EnrichedSpaceLayout>& layouts,
                           Algorithm alg)
{
    const auto& topo = disc.topology();
    const auto off = skeletonOffsets(layouts);
    std::vector<JumpMatrix::Row> rows;
    for (int k = 0; k < disc.numPatches(); ++k) {
        const TensorBSplineSpace& space = disc.space(k);
        const int ni = layouts[k].numInterior();
        for (int l : topo.neighbors(k)) {
            const Side side = topo.glue(*topo.glueBetween(k, l)).sideOf(k);
            for (int dof : space.sideDofs(side)) {
                if (usesVertices(alg) && space.dof(dof).atAnyCorner()) continue;
                rows.push_back({off[k] + dof - ni, off[l] + copySkeletonIndex(layouts[l], k, dof), false});
            }
        }
    }
    if (alg == Algorithm::B) {
        for (int k = 0; k < disc.numPatches(); ++k) {
            const TensorBSplineSpace& space = disc.space(k);
            for (Corner c : kCorners) {
                const int dof = space.cornerDof(c);
                if (dof < 0) continue;
                const auto sides = cornerSides(c);
                const auto g1 = topo.glueOnSide(k, sides[0]);
                const auto g2 = topo.glueOnSide(k, sides[1]);
                if (!g1 || !g2) continue;
                int l1 = topo.glue(*g1).other(k);
                int l2 = topo.glue(*g2).other(k);
                if (l1 > l2) std::swap(l1, l2);
                rows.push_back({off[l1] + copySkeletonIndex(layouts[l1], k, dof),
                                off[l2] + copySkeletonIndex(layouts[l2], k, dof), true});
            }
        }
    }
    return JumpMatrix(std::move(rows), off.back());
}

Eigen::VectorXd buildScaling(const JumpMatrix& b)
{
    Eigen::VectorXd d = Eigen::VectorXd::Ones(b.cols());
    for (const auto& r : b.entries()) {
        d[r.plus] += 1.0;
        d[r.minus] += 1.0;
    }
    return d;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd edgeIntegrals(const Discretization& disc, int k, Side side)
{
    const TensorBSplineSpace& space = disc.space(k);
    const GeometryMap& geo = disc.topology().geometry(k);
    const int dir = runningDirection(side);
    const KnotVector& kv = space.knots(dir);
    const std::vector<int>& running = space.sideRunning(side);
    std::vector<int> position(kv.size(), -1);
    for (int i = 0; i < static_cast<int>(running.size()); ++i) position[running[i]] = i;

    const int q = space.degree() + 1 + (geo.isAffine() ? 0 : 8);
    const QuadratureRule rule = makeQuadrature(kv, q);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<int>(running.size()));
    for (std::size_t iq = 0; iq < rule.nodes.size(); ++iq) {
        const double x = rule.nodes[iq];
        const Eigen::Vector2d st = sidePoint(side, x);
        const double ds = geo.eval(st).jacobian.col(dir).norm();
        const BasisValues bv = evalBasis(kv, x);
        for (int a = 0; a < static_cast<int>(bv.values.size()); ++a) {
            const int pos = position[bv.first + a];
            if (pos >= 0) out[pos] += rule.weights[iq] * ds * bv.values[a];
        }
    }
    return out;
}

PrimalProgram buildConstraints(const Discretization& disc, const std::vector<EnrichedSpaceLayout>& layouts,
                               Algorithm alg)
{
    const auto& topo = disc.topology();
    const int np = disc.numPatches();
    struct RawRow {
        int id;
        double scale;
        std::vector<std::pair<int, double>> entries;  // skeleton index, value
    };
    std::vector<std::vector<RawRow>> raw(np);
    std::vector<PrimalDof> dofs;

    if (usesVertices(alg)) {
        for (int k = 0; k < np; ++k) {
            const TensorBSplineSpace& space = disc.space(k);
            for (Corner c : kCorners) {
                const int dof = space.cornerDof(c);
                if (dof < 0) continue;
                const int v = topo.vertexOf(k, c);
                if (topo.vertices()[v].patches.size() < 2) continue;
                const int id = static_cast<int>(dofs.size());
                dofs.push_back({PrimalDof::Kind::Vertex, k, c, -1, v});
                raw[k].push_back({id, 1.0, {{dof - layouts[k].numInterior(), 1.0}}});
                const auto sides = cornerSides(c);
                for (int l : topo.neighbors(k)) {
                    const Side s = topo.glue(*topo.glueBetween(k, l)).sideOf(k);
                    if (s != sides[0] && s != sides[1]) continue;
                    raw[l].push_back({id, 1.0, {{copySkeletonIndex(layouts[l], k, dof), 1.0}}});
                }
            }
        }
    }
    if (usesEdges(alg)) {
        for (int g = 0; g < static_cast<int>(topo.glues().size()); ++g) {
            const EdgeGlue& glue = topo.glue(g);
            for (int owner : {glue.k, glue.l}) {
                const Side side = glue.sideOf(owner);
                const int other = glue.other(owner);
                const Eigen::VectorXd w = edgeIntegrals(disc, owner, side);
                const auto& side_dofs = disc.space(owner).sideDofs(side);
                if (side_dofs.empty()) continue;
                const int id = static_cast<int>(dofs.size());
                dofs.push_back({PrimalDof::Kind::EdgeAverage, owner, Corner{}, g, -1});
                RawRow own{id, glue.length, {}};
                RawRow copy{id, glue.length, {}};
                for (int pos = 0; pos < static_cast<int>(side_dofs.size()); ++pos) {
                    own.entries.emplace_back(side_dofs[pos] - layouts[owner].numInterior(), w[pos]);
                    copy.entries.emplace_back(copySkeletonIndex(layouts[other], owner, side_dofs[pos]), w[pos]);
                }
                raw[owner].push_back(std::move(own));
                raw[other].push_back(std::move(copy));
            }
        }
    }

    // Greedy removal of dependent rows, patch by patch in id order. A primal
    // dof whose row is dependent on some patch is dropped everywhere.
    std::vector<int> total(dofs.size(), 0), kept(dofs.size(), 0);
    std::vector<char> dropped(dofs.size(), 0);
    std::vector<std::vector<Eigen::VectorXd>> accepted_rows(np);
    std::vector<std::vector<const RawRow*>> accepted(np);
    for (int k = 0; k < np; ++k)
        std::stable_sort(raw[k].begin(), raw[k].end(), [](const RawRow& a, const RawRow& b) { return a.id < b.id; });
    for (bool changed = true; changed;) {
        std::fill(total.begin(), total.end(), 0);
        std::fill(kept.begin(), kept.end(), 0);
        for (int k = 0; k < np; ++k) {
            accepted_rows[k].clear();
            accepted[k].clear();
            const int n = layouts[k].skeletonSize();
            std::vector<Eigen::VectorXd> basis;
            for (const RawRow& r : raw[k]) {
                if (dropped[r.id]) continue;
                ++total[r.id];
                Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
                for (const auto& [j, v] : r.entries) row[j] += v;
                Eigen::VectorXd res = row;
                for (int pass = 0; pass < 2; ++pass)
                    for (const auto& q : basis) res -= q.dot(res) * q;
                if (res.norm() <= 1e-10 * row.norm()) continue;
                basis.push_back(res.normalized());
                accepted_rows[k].push_back(row);
                accepted[k].push_back(&r);
                ++kept[r.id];
            }
        }
        changed = false;
        for (std::size_t id = 0; id < dofs.size(); ++id)
            if (!dropped[id] && kept[id] != total[id]) dropped[id] = changed = true;
    }
    std::vector<int> renumber(dofs.size(), -1);
    PrimalProgram prog;
    for (std::size_t id = 0; id < dofs.size(); ++id) {
        if (kept[id] == 0) continue;
        renumber[id] = static_cast<int>(prog.dofs.size());
        prog.dofs.push_back(dofs[id]);
    }
    prog.patches.resize(np);
    for (int k = 0; k < np; ++k) {
        PatchConstraints& pc = prog.patches[k];
        const int m = static_cast<int>(accepted[k].size());
        pc.c.resize(m, layouts[k].skeletonSize());
        for (int i = 0; i < m; ++i) {
            pc.c.row(i) = accepted_rows[k][i].transpose();
            pc.primal.push_back(renumber[accepted[k][i]->id]);
            pc.scale.push_back(accepted[k][i]->scale);
        }
    }
    return prog;
}

// ---------------------------------------------------------------------------

IetiDpSolver::IetiDpSolver(const Discretization& disc, const Source& f, const SolverOptions& opts)
    : disc_(&disc), opts_(opts)
{
    locals_ = assembleLocalSystems(disc, f, opts.assembly);
    const int np = numPatches();
    for (const auto& loc : locals_) {
        schur_.push_back(std::make_unique<PatchSchur>(loc));
        const Eigen::MatrixXd& s = schur_.back()->dense();
        double ratio = 1.0;
        if (s.rows() > 0) {
            const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s, Eigen::EigenvaluesOnly).eigenvalues();
            const double top = ev.cwiseAbs().maxCoeff();
            ratio = top > 0.0 ? ev.minCoeff() / top : 0.0;
        }
        local_min_ratio_.push_back(ratio);
    }
    const auto lay = layouts();
    skel_offsets_ = ietidg::skeletonOffsets(lay);
    jump_.emplace(buildJumpMatrix(disc, lay, opts.algorithm));
    scaling_ = buildScaling(*jump_);
    primal_ = buildConstraints(disc, lay, opts.algorithm);

    const int npi = numPrimal();
    s_pi_ = Eigen::MatrixXd::Zero(npi, npi);
    for (int k = 0; k < np; ++k) {
        const Eigen::MatrixXd& s = schur_[k]->dense();
        const PatchConstraints& pc = primal_.patches[k];
        const int n = static_cast<int>(s.rows());
        const int m = static_cast<int>(pc.c.rows());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
        kkt.topLeftCorner(n, n) = s;
        kkt.topRightCorner(n, m) = pc.c.transpose();
        kkt.bottomLeftCorner(m, n) = pc.c;
        saddle_.emplace_back(kkt);
        if (n + m > 0 && !(saddle_.back().rcond() > 1e-14))
            throw std::runtime_error("local saddle system of patch " + std::to_string(k + 1) +
                                     " is singular (patch lacks primal constraints)");
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + m, m);
        for (int i = 0; i < m; ++i) rhs(n + i, i) = pc.scale[i];
        psi_local_.push_back(m > 0 ? Eigen::MatrixXd(saddle_.back().solve(rhs).topRows(n)) : Eigen::MatrixXd(n, 0));
        const Eigen::MatrixXd loc = psi_local_[k].transpose() * s * psi_local_[k];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) s_pi_(pc.primal[i], pc.primal[j]) += loc(i, j);
    }
    s_pi_ = 0.5 * (s_pi_ + s_pi_.transpose()).eval();
    if (npi > 0) {
        s_pi_llt_.compute(s_pi_);
        if (s_pi_llt_.info() != Eigen::Success) throw std::runtime_error("primal Schur complement is not definite");
    }

    g_.resize(skeletonSize());
    for (int k = 0; k < np; ++k)
        g_.segment(skel_offsets_[k], schur_[k]->skeletonSize()) = schur_[k]->reducedLoad(locals_[k].load);
    const Eigen::VectorXd w0 = solveTilde(g_);
    d_ = jump_->apply(w0);
    // jumps at roundoff level: the constrained solution is already continuous
    if (d_.size() > 0 && d_.lpNorm<Eigen::Infinity>() <= 1e-13 * w0.lpNorm<Eigen::Infinity>()) d_.setZero();
}

int IetiDpSolver::firstIndefinitePatch(double tol) const
{
    for (int k = 0; k < numPatches(); ++k)
        if (local_min_ratio_[k] < -tol) return k;
    return -1;
}

std::vector<EnrichedSpaceLayout> IetiDpSolver::layouts() const
{
    std::vector<EnrichedSpaceLayout> out;
    for (const auto& l : locals_) out.push_back(l.layout);
    return out;
}

Eigen::MatrixXd IetiDpSolver::psi(int k) const
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(psi_local_[k].rows(), numPrimal());
    const auto& ids = primal_.patches[k].primal;
    for (int i = 0; i < static_cast<int>(ids.size()); ++i) out.col(ids[i]) = psi_local_[k].col(i);
    return out;
}

Eigen::MatrixXd IetiDpSolver::psi() const
{
    Eigen::MatrixXd out(skeletonSize(), numPrimal());
    for (int k = 0; k < numPatches(); ++k) out.middleRows(skel_offsets_[k], psi_local_[k].rows()) = psi(k);
    return out;
}

Eigen::VectorXd IetiDpSolver::applyS(const Eigen::VectorXd& w) const
{
    Eigen::VectorXd out(w.size());
    for (int k = 0; k < numPatches(); ++k) {
        const int n = schur_[k]->skeletonSize();
        out.segment(skel_offsets_[k], n) = schur_[k]->dense() * w.segment(skel_offsets_[k], n);
    }
    return out;
}

Eigen::VectorXd IetiDpSolver::solveTilde(const Eigen::VectorXd& x) const
{
    const int np = numPatches();
    Eigen::VectorXd w(skeletonSize());
    Eigen::VectorXd bpi = Eigen::VectorXd::Zero(numPrimal());
    for (int k = 0; k < np; ++k) {
        const int n = schur_[k]->skeletonSize();
        const PatchConstraints& pc = primal_.patches[k];
        const int m = static_cast<int>(pc.c.rows());
        if (n == 0) continue;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
        rhs.head(n) = x.segment(skel_offsets_[k], n);
        w.segment(skel_offsets_[k], n) = saddle_[k].solve(rhs).head(n);
        const Eigen::VectorXd local = psi_local_[k].transpose() * rhs.head(n);
        for (int i = 0; i < m; ++i) bpi[pc.primal[i]] += local[i];
    }
    if (numPrimal() == 0) return w;
    const Eigen::VectorXd wpi = s_pi_llt_.solve(bpi);
    for (int k = 0; k < np; ++k) {
        const auto& ids = primal_.patches[k].primal;
        if (ids.empty()) continue;
        Eigen::VectorXd c(ids.size());
        for (int i = 0; i < static_cast<int>(ids.size()); ++i) c[i] = wpi[ids[i]];
        w.segment(skel_offsets_[k], psi_local_[k].rows()) += psi_local_[k] * c;
    }
    return w;
}

Eigen::VectorXd IetiDpSolver::applyF(const Eigen::VectorXd& lambda) const
{
    return jump_->apply(solveTilde(jump_->applyTranspose(lambda)));
}

Eigen::VectorXd IetiDpSolver::applyPreconditioner(const Eigen::VectorXd& r) const
{
    Eigen::VectorXd y = jump_->applyTranspose(r).cwiseQuotient(scaling_);
    y = applyS(y).cwiseQuotient(scaling_);
    return jump_->apply(y);
}

Eigen::VectorXd IetiDpSolver::recoverSkeleton(const Eigen::VectorXd& lambda) const
{
    return solveTilde(g_ - jump_->applyTranspose(lambda));
}

Eigen::VectorXd IetiDpSolver::recoverSolution(const Eigen::VectorXd& lambda) const
{
    const Eigen::VectorXd w = recoverSkeleton(lambda);
    const auto offsets = globalOffsets(*disc_);
    Eigen::VectorXd u(offsets.back());
    for (int k = 0; k < numPatches(); ++k) {
        const PatchSchur& ps = *schur_[k];
        const Eigen::VectorXd full = ps.extend(w.segment(skel_offsets_[k], ps.skeletonSize()), locals_[k].load);
        const int nb = locals_[k].layout.numBase();
        u.segment(offsets[k], nb) = full.head(nb);
    }
    return u;
}

IetiDpSolver::Result IetiDpSolver::solve(const PcgOptions& opts) const
{
    Result res;
    PcgResult r = pcg([this](const Eigen::VectorXd& x) { return applyF(x); },
                      [this](const Eigen::VectorXd& x) { return applyPreconditioner(x); }, d_, opts);
    res.lambda = std::move(r.x);
    res.report = std::move(r.report);
    res.solution = recoverSolution(res.lambda);
    return res;
}

}  // namespace ietidg
