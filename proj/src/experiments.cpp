#include "ietidg/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace ietidg {

double sineSource(const Eigen::Vector2d& x)
{
    constexpr double pi = std::numbers::pi;
    return 2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y());
}

double sineSolution(const Eigen::Vector2d& x)
{
    constexpr double pi = std::numbers::pi;
    return std::sin(pi * x.x()) * std::sin(pi * x.y());
}

Eigen::VectorXd solveMonolithic(const GlobalDgSystem& sys)
{
    if (sys.matrix.rows() == 0) return Eigen::VectorXd(0);
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(sys.matrix);
    lu.factorize(sys.matrix);
    if (lu.info() != Eigen::Success) throw std::runtime_error("monolithic dG system is singular");
    return lu.solve(sys.load);
}

double dgNormDifference(const GlobalDgSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    const Eigen::VectorXd e = u - v;
    const double den = std::sqrt(std::max(0.0, v.dot(sys.norm * v)));
    const double num = std::sqrt(std::max(0.0, e.dot(sys.norm * e)));
    return den > 0.0 ? num / den : num;
}

Eigen::MatrixXd denseOperator(const LinearOperator& op, int n)
{
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        m.col(j) = op(e);
        e[j] = 0.0;
    }
    return m;
}

DenseSpectrum denseConditionNumber(const Eigen::MatrixXd& f, const Eigen::MatrixXd& m, double rank_tol)
{
    DenseSpectrum out;
    if (f.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ef(0.5 * (f + f.transpose()));
    const Eigen::VectorXd& lam = ef.eigenvalues();
    const double top = lam.cwiseAbs().maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < lam.size(); ++i)
        if (lam[i] > rank_tol * top) keep.push_back(i);
    out.rank = static_cast<int>(keep.size());
    if (keep.empty()) return out;
    Eigen::MatrixXd ur(f.rows(), out.rank);
    for (int j = 0; j < out.rank; ++j) ur.col(j) = ef.eigenvectors().col(keep[j]) * std::sqrt(lam[keep[j]]);
    const Eigen::MatrixXd h = ur.transpose() * (0.5 * (m + m.transpose())) * ur;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(h, Eigen::EigenvaluesOnly);
    // M F is scale free, so roundoff directions of F show up far below one
    const Eigen::VectorXd& mu = eh.eigenvalues();
    int first = 0;
    while (first < mu.size() && mu[first] <= kSpectrumZeroTol) ++first;
    out.rank = static_cast<int>(mu.size()) - first;
    if (out.rank == 0) return out;
    out.lambda_min = mu[first];
    out.lambda_max = mu[mu.size() - 1];
    out.kappa = out.lambda_max / out.lambda_min;
    return out;
}

OracleReport verifyWithOracle(const IetiDpSolver& solver, const IetiDpSolver::Result& res)
{
    OracleReport rep;
    const GlobalDgSystem sys = assembleGlobalSystem(solver.locals(), globalOffsets(solver.discretization()));
    const Eigen::VectorXd ref = solveMonolithic(sys);
    PcgOptions tight;
    tight.tol = kOracleSolveTol;
    tight.max_iter = 5000;
    // a random start leaves an initial residual far above |d|
    tight.random_start = false;
    rep.dg_difference = dgNormDifference(sys, solver.solve(tight).solution, ref);
    rep.solution_ok = rep.dg_difference <= 1e-6;

    const int n = solver.numMultipliers();
    const Eigen::MatrixXd f = denseOperator([&](const Eigen::VectorXd& x) { return solver.applyF(x); }, n);
    const Eigen::MatrixXd m =
        denseOperator([&](const Eigen::VectorXd& x) { return solver.applyPreconditioner(x); }, n);
    const DenseSpectrum sp = denseConditionNumber(f, m);
    rep.kappa_dense = sp.kappa;
    rep.lambda_min = sp.lambda_min;
    rep.lambda_max = sp.lambda_max;
    rep.range_dimension = sp.rank;
    rep.kappa_lanczos = res.report.kappa;
    rep.kappa_ok = std::abs(rep.kappa_lanczos - rep.kappa_dense) <= 0.1 * rep.kappa_dense;
    return rep;
}

ResultRow runExperiment(const ExperimentConfig& cfg, const MultiPatchTopology& topo)
{
    if (cfg.p < 1) throw std::invalid_argument("degree must be at least 1");
    if (cfg.r < 0 || cfg.disparity < 0) throw std::invalid_argument("refinement levels must be nonnegative");
    if (!(cfg.delta > 0.0)) throw std::invalid_argument("penalty parameter must be positive");
    const auto t0 = std::chrono::steady_clock::now();
    ResultRow row;
    row.config = cfg;

    const Discretization disc = refine(topo, cfg.p, cfg.r, cfg.disparity);
    SolverOptions so;
    so.algorithm = cfg.alg;
    so.assembly.delta = cfg.delta;
    const IetiDpSolver solver(disc, sineSource, so);

    const GlobalDgSystem global = assembleGlobalSystem(solver.locals(), globalOffsets(disc));
    Eigen::SimplicialLLT<SparseMatrix> llt(global.matrix);
    const int bad = solver.firstIndefinitePatch();
    row.coercive = llt.info() == Eigen::Success && bad < 0;
    if (!row.coercive) {
        std::cerr << "warning: " << cfg.domain << " p=" << cfg.p << " r=" << cfg.r << " e=" << cfg.disparity
                  << " delta=" << cfg.delta << ": ";
        if (bad >= 0)
            std::cerr << "local form of patch " << bad + 1 << " is indefinite";
        else
            std::cerr << "dG system is not positive definite";
        std::cerr << "; increase --delta\n";
    }

    PcgOptions po;
    po.tol = cfg.tol;
    po.max_iter = cfg.max_iter;
    po.seed = cfg.seed;
    po.preconditioned_residual = cfg.preconditioned_residual;
    const IetiDpSolver::Result res = solver.solve(po);
    row.iterations = res.report.iterations;
    row.kappa = res.report.kappa;
    row.converged = res.report.converged;
    row.dofs = disc.totalDofs();
    row.multipliers = solver.numMultipliers();
    row.primal = solver.numPrimal();
    if (cfg.oracle) row.oracle = verifyWithOracle(solver, res);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

ResultRow runExperiment(const ExperimentConfig& cfg)
{
    return runExperiment(cfg, makeDomain(cfg.domain));
}

std::vector<ExperimentConfig> expandSweep(const ExperimentConfig& base, const std::vector<Algorithm>& algs,
                                          const std::vector<int>& disparities, const std::vector<int>& refinements,
                                          const std::vector<int>& degrees)
{
    std::vector<ExperimentConfig> out;
    for (Algorithm a : algs)
        for (int e : disparities)
            for (int r : refinements)
                for (int p : degrees) {
                    ExperimentConfig c = base;
                    c.alg = a;
                    c.disparity = e;
                    c.r = r;
                    c.p = p;
                    out.push_back(c);
                }
    return out;
}

ConvergenceStudy convergenceStudy(const MultiPatchTopology& topo, int p, int r0, int r1, Algorithm alg,
                                  double delta, double tol)
{
    ConvergenceStudy cs;
    double prev_h = 0.0;
    for (int r = r0; r <= r1; ++r) {
        const Discretization disc = refine(topo, p, r);
        SolverOptions so;
        so.algorithm = alg;
        so.assembly.delta = delta;
        const IetiDpSolver solver(disc, sineSource, so);
        PcgOptions po;
        po.tol = tol;
        po.max_iter = 2000;
        po.random_start = false;
        const auto res = solver.solve(po);
        const double err = l2Error(disc, res.solution, sineSolution);
        double h = 0.0;
        for (int k = 0; k < disc.numPatches(); ++k) h = std::max(h, disc.gridSize(k));
        cs.levels.push_back(r);
        cs.orders.push_back(cs.errors.empty() ? 0.0 : std::log(cs.errors.back() / err) / std::log(prev_h / h));
        cs.errors.push_back(err);
        prev_h = h;
    }
    return cs;
}

namespace {

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string errorField(const ResultRow& r)
{
    return r.oracle ? fmt("%.3e", r.oracle->dg_difference) : std::string();
}

}  // namespace

void writeCsv(std::ostream& out, const std::vector<ResultRow>& rows, bool timing)
{
    out << "domain,alg,p,r,e,delta,it,kappa,err,seconds\n";
    for (const ResultRow& r : rows) {
        const ExperimentConfig& c = r.config;
        out << c.domain << ',' << toString(c.alg) << ',' << c.p << ',' << c.r << ',' << c.disparity << ','
            << fmt("%g", c.delta) << ',' << r.iterations << ',' << fmt("%.6g", r.kappa) << ',' << errorField(r) << ','
            << (timing ? fmt("%.3f", r.seconds) : std::string()) << '\n';
    }
}

void writeTable(std::ostream& out, const std::vector<ResultRow>& rows, bool timing)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %3s %2s %2s %2s %6s %5s %12s %10s %8s %s\n", "domain", "alg", "p", "r", "e",
                  "delta", "it", "kappa", "err", timing ? "seconds" : "", "status");
    out << buf;
    for (const ResultRow& r : rows) {
        const ExperimentConfig& c = r.config;
        std::string status = r.converged ? "ok" : "not converged";
        if (r.oracle && !r.oracle->passed()) status += ", oracle failed";
        std::snprintf(buf, sizeof buf, "%-12s %3s %2d %2d %2d %6g %5d %12.6g %10s %8s %s\n", c.domain.c_str(),
                      toString(c.alg), c.p, c.r, c.disparity, c.delta, r.iterations, r.kappa, errorField(r).c_str(),
                      timing ? fmt("%.3f", r.seconds).c_str() : "", status.c_str());
        out << buf;
    }
}

}  // namespace ietidg
