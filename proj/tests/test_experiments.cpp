#include "doctest.h"

#include <sstream>

#include "ietidg/experiments.hpp"
#include "oracles.hpp"

using namespace ietidg;

TEST_CASE("manufactured data")
{
    const Eigen::Vector2d x(0.25, 0.5);
    CHECK(sineSolution(x) == doctest::Approx(std::sin(M_PI * 0.25)));
    CHECK(sineSource(x) == doctest::Approx(2 * M_PI * M_PI * sineSolution(x)));
}

TEST_CASE("sweep order")
{
    const auto cfgs = expandSweep({}, {Algorithm::A, Algorithm::C}, {0, 1}, {1, 2}, {2, 3});
    REQUIRE(cfgs.size() == 16);
    CHECK((cfgs[0].alg == Algorithm::A));
    CHECK(cfgs[0].disparity == 0);
    CHECK(cfgs[0].r == 1);
    CHECK(cfgs[0].p == 2);
    CHECK(cfgs[1].p == 3);
    CHECK(cfgs[2].r == 2);
    CHECK(cfgs[4].disparity == 1);
    CHECK((cfgs[8].alg == Algorithm::C));
}

TEST_CASE("smallest end-to-end case passes the oracle")
{
    ExperimentConfig cfg;
    cfg.domain = "square-1x2";
    cfg.p = 1;
    cfg.r = 1;
    cfg.oracle = true;
    for (Algorithm alg : {Algorithm::A, Algorithm::B, Algorithm::C}) {
        cfg.alg = alg;
        const auto row = runExperiment(cfg);
        REQUIRE(row.oracle);
        CHECK(row.converged);
        CHECK(row.coercive);
        CHECK(row.oracle->passed());
        CHECK(row.kappa >= 1.0);
        // B and C pin both edge functions of this mesh, leaving a zero dual problem
        CHECK(row.iterations >= (alg == Algorithm::A ? 1 : 0));
    }
    // one element per patch leaves only Dirichlet dofs
    cfg.r = 0;
    cfg.alg = Algorithm::A;
    const auto empty = runExperiment(cfg);
    REQUIRE(empty.oracle);
    CHECK(empty.dofs == 0);
    CHECK(empty.oracle->passed());
    const auto study = convergenceStudy(makeDomain("square-1x2"), 1, 1, 3, Algorithm::C);
    REQUIRE(study.orders.size() == 3);
    CHECK(study.errors[2] < study.errors[1]);
    CHECK(study.orders[2] > 1.5);
}

TEST_CASE("dense condition number against the nonsymmetric product")
{
    const auto disc = refine(makeDomain("square-2x2"), 2, 2);
    SolverOptions opts;
    opts.algorithm = Algorithm::C;
    const IetiDpSolver s(disc, sineSource, opts);
    const int n = s.numMultipliers();
    const Eigen::MatrixXd f = denseOperator([&](const Eigen::VectorXd& x) { return s.applyF(x); }, n);
    const Eigen::MatrixXd m = denseOperator([&](const Eigen::VectorXd& x) { return s.applyPreconditioner(x); }, n);
    const auto a = denseConditionNumber(f, m);
    const auto b = oracle::productSpectrum(m, f);
    CHECK(a.kappa == doctest::Approx(b.kappa).epsilon(1e-6));
    CHECK(b.max_imag < 1e-8);
    CHECK(a.rank <= n);

    const auto res = s.solve();
    const auto rep = verifyWithOracle(s, res);
    CHECK(rep.passed());
    CHECK(rep.kappa_lanczos == doctest::Approx(b.kappa).epsilon(0.1));
}

TEST_CASE("roundoff-level dual operator has an empty range")
{
    // vertex and edge constraints of the coarsest ring pin every jump
    const auto disc = refine(makeDomain("ring12"), 2, 0);
    SolverOptions opts;
    opts.algorithm = Algorithm::C;
    const IetiDpSolver s(disc, sineSource, opts);
    const auto res = s.solve();
    CHECK(res.report.iterations == 0);
    const auto rep = verifyWithOracle(s, res);
    CHECK(rep.range_dimension == 0);
    CHECK(rep.kappa_dense == 1.0);
    CHECK(rep.passed());
}

TEST_CASE("table output is deterministic")
{
    ExperimentConfig cfg;
    cfg.domain = "ring12";
    cfg.p = 2;
    cfg.r = 1;
    std::vector<ResultRow> rows;
    for (Algorithm alg : {Algorithm::A, Algorithm::B}) {
        cfg.alg = alg;
        rows.push_back(runExperiment(cfg));
    }
    std::ostringstream a, b, t;
    writeCsv(a, rows, false);
    rows[0] = runExperiment(rows[0].config);
    rows[1] = runExperiment(rows[1].config);
    writeCsv(b, rows, false);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("domain,alg,p,r,e,delta,it,kappa,err,seconds\n", 0) == 0);
    CHECK(a.str().find("ring12,A,2,1,0,4,") != std::string::npos);
    writeTable(t, rows, false);
    CHECK(t.str().find("kappa") != std::string::npos);
}

TEST_CASE("invalid configurations")
{
    ExperimentConfig cfg;
    cfg.p = 0;
    CHECK_THROWS(runExperiment(cfg));
    cfg = {};
    cfg.domain = "hexagon";
    CHECK_THROWS(runExperiment(cfg));
    cfg = {};
    cfg.r = -1;
    CHECK_THROWS(runExperiment(cfg));
    cfg = {};
    cfg.delta = -1.0;
    CHECK_THROWS(runExperiment(cfg));
}

TEST_CASE("non-convergence is reported, not thrown")
{
    ExperimentConfig cfg;
    cfg.domain = "square-3x3";
    cfg.max_iter = 1;
    cfg.tol = 1e-12;
    const auto row = runExperiment(cfg);
    CHECK(!row.converged);
    CHECK(row.iterations == 1);
}
