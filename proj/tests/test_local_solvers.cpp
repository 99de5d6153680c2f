#include "doctest.h"

#include <algorithm>
#include <random>

#include "ietidg/domains.hpp"
#include "ietidg/experiments.hpp"
#include "ietidg/local_solvers.hpp"
#include "ietidg/pcg.hpp"

using namespace ietidg;

namespace {

Eigen::VectorXd gaussian(int n, std::mt19937_64& gen)
{
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = nd(gen);
    return v;
}

MultiPatchTopology floatingSquares(int m, int n)
{
    const auto base = squareDomain(m, n);
    TopologyOptions o;
    for (int k = 0; k < base.numPatches(); ++k)
        for (Side s : kSides)
            if (base.isDirichlet(k, s)) o.free_sides.emplace_back(k, s);
    return squareDomain(m, n, o);
}

double energy(const LocalSystem& sys, const Eigen::VectorXd& u) { return u.dot(sys.matrix * u); }

}  // namespace

TEST_CASE("patch without interior dofs")
{
    const auto disc = refine(squareDomain(2, 1), 1, 0);
    const auto sys = assembleLocalSystem(disc, 0, sineSource);
    REQUIRE(sys.layout.numInterior() == 0);
    const PatchSchur s(sys);
    CHECK(s.numInterior() == 0);
    CHECK((s.dense() - Eigen::MatrixXd(sys.matrix)).norm() < 1e-14);
    CHECK((s.reducedLoad(sys.load) - sys.load).norm() == 0.0);
}

TEST_CASE("interior solves")
{
    const auto disc = refine(squareDomain(1, 1), 2, 3);
    const auto sys = assembleLocalSystem(disc, 0, sineSource);
    const PatchSchur s(sys);
    const int ni = s.numInterior();
    const Eigen::MatrixXd aii = Eigen::MatrixXd(sys.matrix).topLeftCorner(ni, ni);
    std::mt19937_64 gen(1);
    for (int i = 0; i < 5; ++i) {
        const Eigen::VectorXd b = gaussian(ni, gen);
        const Eigen::VectorXd x = s.solveInterior(b);
        CHECK((x - aii.inverse() * b).norm() <= 1e-11 * x.norm());
        CHECK((aii * x - b).norm() <= 1e-12 * b.norm() * aii.norm());
    }
}

TEST_CASE("Schur complement of a local system")
{
    const auto disc = refine(squareDomain(2, 2), 2, 2);
    const auto sys = assembleLocalSystem(disc, 3, sineSource);
    const PatchSchur s(sys);
    const int ni = s.numInterior(), ns = s.skeletonSize();
    const Eigen::MatrixXd a(sys.matrix);
    const Eigen::MatrixXd aii = a.topLeftCorner(ni, ni), aig = a.topRightCorner(ni, ns);
    const Eigen::MatrixXd agi = a.bottomLeftCorner(ns, ni), agg = a.bottomRightCorner(ns, ns);
    const Eigen::MatrixXd dense = agg - agi * aii.ldlt().solve(aig);
    CHECK((s.dense() - dense).norm() <= 1e-10 * dense.norm());
    CHECK((s.dense() - s.dense().transpose()).norm() == 0.0);

    std::mt19937_64 gen(2);
    for (int i = 0; i < 5; ++i) {
        const Eigen::VectorXd w = gaussian(ns, gen);
        CHECK((s.apply(w) - dense * w).norm() <= 1e-10 * (dense * w).norm());
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(a.rows());
        const Eigen::VectorXd u = s.extend(w, zero);
        CHECK(w.dot(s.dense() * w) == doctest::Approx(energy(sys, u)).epsilon(1e-10));
    }

    SUBCASE("reduced load")
    {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(a.rows());
        f.tail(ns) = gaussian(ns, gen);
        CHECK((s.reducedLoad(f) - f.tail(ns)).norm() == 0.0);
        f.setZero();
        f[0] = 1.0;
        const Eigen::VectorXd g = -agi * aii.inverse().col(0);
        CHECK((s.reducedLoad(f) - g).norm() <= 1e-12 * g.norm());
    }
    SUBCASE("Schur pipeline reproduces the local solve")
    {
        const Eigen::VectorXd u = a.ldlt().solve(sys.load);
        const Eigen::VectorXd w = s.dense().ldlt().solve(s.reducedLoad(sys.load));
        CHECK((w - u.tail(ns)).norm() <= 1e-11 * u.norm());
        CHECK((s.recoverInterior(w, sys.load) - u.head(ni)).norm() <= 1e-11 * u.norm());
    }
}

TEST_CASE("floating patch: constants")
{
    const auto disc = refine(floatingSquares(2, 2), 2, 2);
    const auto sys = assembleLocalSystem(disc, 0, sineSource);
    const PatchSchur s(sys);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(s.skeletonSize());
    CHECK(std::abs(one.dot(s.dense() * one)) <= 1e-10 * s.dense().norm());
    const Eigen::VectorXd ui = s.harmonicExtension(one);
    CHECK((ui - Eigen::VectorXd::Ones(ui.size())).norm() < 1e-10);
    const Eigen::VectorXd u = s.extend(one, Eigen::VectorXd::Zero(sys.layout.size()));
    CHECK(std::abs(u.dot(sys.volume * u)) < 1e-10);
}

TEST_CASE("harmonic extensions minimize the energy")
{
    const auto disc = refine(squareDomain(2, 2), 3, 2);
    const auto sys = assembleLocalSystem(disc, 1, sineSource);
    const PatchSchur s(sys);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.layout.size());
    CHECK(s.harmonicExtension(Eigen::VectorXd::Zero(s.skeletonSize())).norm() == 0.0);
    std::mt19937_64 gen(3);
    const Eigen::VectorXd w = gaussian(s.skeletonSize(), gen);
    const Eigen::VectorXd u = s.extend(w, zero);
    const double e0 = energy(sys, u);
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd v = u;
        v.head(s.numInterior()) += 0.1 * gaussian(s.numInterior(), gen);
        CHECK(energy(sys, v) >= e0);
    }

    // the volume-only extension minimizes the volume energy for the base boundary values
    const int nb = sys.layout.numBase(), ni = sys.layout.numInterior();
    const Eigen::VectorXd bnd = gaussian(nb - ni, gen);
    const Eigen::VectorXd interior = standardHarmonicExtension(sys, bnd);
    Eigen::VectorXd full(nb);
    full << interior, bnd;
    const Eigen::MatrixXd vol = Eigen::MatrixXd(sys.volume).topLeftCorner(nb, nb);
    CHECK((vol * full).head(ni).norm() < 1e-10 * bnd.norm() * vol.norm());
}

TEST_CASE("indefinite interior blocks are rejected")
{
    const auto disc = refine(squareDomain(1, 1), 2, 1);
    auto sys = assembleLocalSystem(disc, 0, sineSource);
    sys.matrix = -sys.matrix;
    CHECK_THROWS(PatchSchur(sys));
}

// --- PCG -------------------------------------------------------------------

TEST_CASE("random start vectors")
{
    const auto a = randomVector(1000, 42);
    CHECK(a.maxCoeff() <= 1.0);
    CHECK(a.minCoeff() >= -1.0);
    CHECK(std::abs(a.mean()) < 0.1);
    CHECK(a == randomVector(1000, 42));
    CHECK(a != randomVector(1000, 43));
}

TEST_CASE("identity system converges at once")
{
    const LinearOperator id = [](const Eigen::VectorXd& x) { return x; };
    std::mt19937_64 gen(4);
    const Eigen::VectorXd b = gaussian(30, gen);
    PcgOptions opts;
    opts.random_start = false;
    const auto r = pcg(id, id, b, opts);
    CHECK(r.report.converged);
    CHECK(r.report.iterations == 1);
    CHECK(r.report.kappa == doctest::Approx(1.0));
    CHECK((r.x - b).norm() < 1e-14);
}

TEST_CASE("zero and empty right-hand sides")
{
    const LinearOperator id = [](const Eigen::VectorXd& x) { return x; };
    auto r = pcg(id, id, Eigen::VectorXd::Zero(5));
    CHECK(r.report.converged);
    CHECK(r.x.norm() == 0.0);
    r = pcg(id, id, Eigen::VectorXd(0));
    CHECK(r.report.converged);
}

TEST_CASE("condition estimate of a Jacobi preconditioned system")
{
    std::mt19937_64 gen(5);
    const int n = 60;
    Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return std::normal_distribution<double>()(gen); });
    Eigen::MatrixXd a = q * q.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    a.diagonal().array() *= Eigen::ArrayXd::LinSpaced(n, 1.0, 50.0);
    const Eigen::VectorXd dinv = a.diagonal().cwiseInverse();
    const LinearOperator op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
    const LinearOperator pre = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return dinv.cwiseProduct(x); };
    PcgOptions opts;
    opts.tol = 1e-12;
    const Eigen::VectorXd b = gaussian(n, gen);
    const auto r = pcg(op, pre, b, opts);
    CHECK(r.report.converged);
    CHECK((a * r.x - b).norm() <= 1e-10 * b.norm());

    const Eigen::MatrixXd sq = dinv.cwiseSqrt().asDiagonal() * a * dinv.cwiseSqrt().asDiagonal();
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sq).eigenvalues();
    CHECK(r.report.kappa == doctest::Approx(ev[n - 1] / ev[0]).epsilon(0.01));

    const auto again = pcg(op, pre, b, opts);
    CHECK(again.report.iterations == r.report.iterations);
    CHECK(again.x == r.x);
    CHECK(again.report.residuals == r.report.residuals);
}

TEST_CASE("non-convergence and breakdown are reported")
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(20, 20);
    a.diagonal() = Eigen::VectorXd::LinSpaced(20, 1.0, 1e4);
    const LinearOperator op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
    const LinearOperator id = [](const Eigen::VectorXd& x) { return x; };
    PcgOptions opts;
    opts.max_iter = 3;
    opts.tol = 1e-12;
    const auto r = pcg(op, id, Eigen::VectorXd::Ones(20), opts);
    CHECK(!r.report.converged);
    CHECK(r.report.iterations == 3);
    const auto& h = r.report.residuals;
    const double attained = (a * r.x - Eigen::VectorXd::Ones(20)).norm() / std::sqrt(20.0);
    CHECK(attained == doctest::Approx(*std::min_element(h.begin(), h.end())).epsilon(1e-8));

    const LinearOperator neg = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return -x; };
    const auto bad = pcg(neg, id, Eigen::VectorXd::Ones(4));
    CHECK(bad.report.breakdown);
    CHECK(!bad.report.converged);
}

TEST_CASE("Ritz values of a known tridiagonal")
{
    // Lanczos matrix of CG on diag(1, 2, 3) with b = (1, 1, 1)
    const Eigen::Vector3d d(1, 2, 3);
    const LinearOperator op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return d.cwiseProduct(x); };
    const LinearOperator id = [](const Eigen::VectorXd& x) { return x; };
    PcgOptions opts;
    opts.random_start = false;
    opts.tol = 1e-14;
    const auto r = pcg(op, id, Eigen::VectorXd::Ones(3), opts);
    CHECK(r.report.iterations == 3);
    CHECK(r.report.lambda_min == doctest::Approx(1.0));
    CHECK(r.report.lambda_max == doctest::Approx(3.0));
    const auto rb = lanczosRitzValues({2.0}, {});
    CHECK(rb.lambda_min == doctest::Approx(0.5));
}
