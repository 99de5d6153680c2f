#include "doctest.h"

#include <cmath>
#include <random>

#include "ietidg/dg_assembly.hpp"
#include "ietidg/domains.hpp"
#include "ietidg/experiments.hpp"
#include "oracles.hpp"

using namespace ietidg;

namespace {

TopologyOptions allFree(int patches)
{
    TopologyOptions o;
    for (int k = 0; k < patches; ++k)
        for (Side s : kSides) o.free_sides.emplace_back(k, s);
    return o;
}

// Only the sides that are not glued may be declared free.
MultiPatchTopology floatingSquares(int m, int n)
{
    const auto base = squareDomain(m, n);
    TopologyOptions o;
    for (int k = 0; k < base.numPatches(); ++k)
        for (Side s : kSides)
            if (base.isDirichlet(k, s)) o.free_sides.emplace_back(k, s);
    return squareDomain(m, n, o);
}

MultiPatchTopology twoUnitSquares()
{
    std::vector<Patch> ps{makePatch(GeometryMap::rectangle(0, 0, 1, 1)), makePatch(GeometryMap::rectangle(1, 0, 2, 1))};
    TopologyOptions o;
    for (Side s : {Side::West, Side::South, Side::North}) o.free_sides.emplace_back(0, s);
    for (Side s : {Side::East, Side::South, Side::North}) o.free_sides.emplace_back(1, s);
    return MultiPatchTopology(ps, {{0, 1, Side::East, Side::West, false}}, o);
}

Eigen::VectorXd grevilleInterpolant(const Discretization& disc, const std::function<double(Eigen::Vector2d)>& u)
{
    const auto offsets = globalOffsets(disc);
    Eigen::VectorXd c(offsets.back());
    for (int k = 0; k < disc.numPatches(); ++k) {
        const auto& sp = disc.space(k);
        const int p = sp.degree();
        auto greville = [p](const std::vector<double>& kn, int j) {
            double s = 0.0;
            for (int i = 1; i <= p; ++i) s += kn[j + i];
            return s / p;
        };
        for (int i = 0; i < sp.size(); ++i) {
            const auto& d = sp.dof(i);
            const double s = greville(sp.knots(0).knots(), d.j1), t = greville(sp.knots(1).knots(), d.j2);
            c[offsets[k] + i] = u(disc.topology().geometry(k).point(s, t));
        }
    }
    return c;
}

}  // namespace

TEST_CASE("bilinear stiffness on the unit square")
{
    const Discretization disc(squareDomain(1, 1, allFree(1)), 1, {{std::vector<double>{0, 1}, std::vector<double>{0, 1}}});
    const Eigen::MatrixXd a(assembleVolume(disc, 0));
    REQUIRE(a.rows() == 4);
    for (int i = 0; i < 4; ++i) CHECK(a(i, i) == doctest::Approx(2.0 / 3.0));
    CHECK((a * Eigen::VectorXd::Ones(4)).norm() < 1e-14);
}

TEST_CASE("volume matrix against over-integration")
{
    SUBCASE("affine, p = 2, 2 x 2 elements")
    {
        const auto topo = squareDomain(1, 1, allFree(1));
        const Discretization disc(topo, 2, {{std::vector<double>{0, 0.5, 1}, std::vector<double>{0, 0.5, 1}}});
        const EnrichedSpaceLayout layout(disc, 0);
        const auto ref = oracle::bruteForceLocal(disc, layout, 4.0, 2, 3);
        CHECK(oracle::relDiff(Eigen::MatrixXd(assembleVolume(disc, 0)), ref.volume) < 1e-12);
    }
    SUBCASE("ring patches")
    {
        const auto disc = refine(ringDomain(), 2, 1);
        for (int k : {0, 4, 8}) {
            const EnrichedSpaceLayout layout(disc, k);
            const auto ref = oracle::bruteForceLocal(disc, layout, 4.0, 3, 8);
            CHECK(oracle::relDiff(Eigen::MatrixXd(assembleVolume(disc, k)), ref.volume.topLeftCorner(layout.numBase(), layout.numBase())) < 1e-10);
        }
    }
}

TEST_CASE("penalty term on a matching linear edge")
{
    const Discretization disc(twoUnitSquares(), 1,
                              {{std::vector<double>{0, 1}, std::vector<double>{0, 1}},
                               {std::vector<double>{0, 1}, std::vector<double>{0, 1}}});
    AssemblyOptions opts;
    opts.delta = 2.0;
    const auto sys = assembleLocalSystem(disc, 0, [](const Eigen::Vector2d&) { return 0.0; }, opts);
    const Eigen::MatrixXd pen(sys.penalty);
    const double sigma = 2.0 / std::sqrt(2.0);
    const auto& east = disc.space(0).sideDofs(Side::East);
    REQUIRE(east.size() == 2);
    CHECK(pen(east[0], east[0]) == doctest::Approx(sigma / 3.0));
    CHECK(pen(east[0], east[1]) == doctest::Approx(sigma / 6.0));
    CHECK(pen(east[1], east[1]) == doctest::Approx(sigma / 3.0));
    const int c0 = sys.layout.copyIndex(1, 0);
    CHECK(pen(east[0], c0) == doctest::Approx(-sigma / 3.0));
    CHECK(pen(c0, c0) == doctest::Approx(sigma / 3.0));
}

TEST_CASE("continuous functions have no jump energy")
{
    const auto topo = floatingSquares(2, 2);
    for (int p = 1; p <= 3; ++p) {
        const auto disc = refine(topo, p, 0);
        const auto offsets = globalOffsets(disc);
        const auto g = grevilleInterpolant(disc, [](Eigen::Vector2d x) { return 1.0 + 2.0 * x.x() - 0.5 * x.y(); });
        for (int k = 0; k < disc.numPatches(); ++k) {
            const auto sys = assembleLocalSystem(disc, k, [](const Eigen::Vector2d&) { return 0.0; });
            const auto w = restrictToEnriched(sys.layout, offsets, g);
            CHECK((sys.penalty * w).norm() < 1e-12);
            CHECK(std::abs(w.dot(sys.consistency * w)) < 1e-12);
        }
    }
}

TEST_CASE("coupling terms against the fine-subdivision oracle")
{
    for (const char* name : {"square-2x2", "ring12"}) {
        for (int p = 1; p <= 3; ++p) {
            const auto disc = refine(makeDomain(name), p, 1);
            for (int k = 0; k < 2; ++k) {
                const auto sys = assembleLocalSystem(disc, k, [](const Eigen::Vector2d&) { return 0.0; });
                const auto ref = oracle::bruteForceLocal(disc, sys.layout, sys.delta, 1, 2);
                INFO(name << " p=" << p << " k=" << k);
                CHECK(oracle::relDiff(Eigen::MatrixXd(sys.consistency), ref.consistency) < 1e-10);
                CHECK(oracle::relDiff(Eigen::MatrixXd(sys.penalty), ref.penalty) < 1e-10);
            }
        }
    }
}

TEST_CASE("load vectors")
{
    const Discretization q1(squareDomain(1, 1, allFree(1)), 1, {{std::vector<double>{0, 1}, std::vector<double>{0, 1}}});
    const EnrichedSpaceLayout l1(q1, 0);
    CHECK(assembleLoad(q1, l1, [](const Eigen::Vector2d&) { return 0.0; }).norm() == 0.0);
    const auto ones = assembleLoad(q1, l1, [](const Eigen::Vector2d&) { return 1.0; });
    for (int i = 0; i < 4; ++i) CHECK(ones[i] == doctest::Approx(0.25));

    const Discretization q3(squareDomain(1, 1, allFree(1)), 3,
                            {{std::vector<double>{0, 0.25, 0.5, 0.75, 1}, std::vector<double>{0, 0.25, 0.5, 0.75, 1}}});
    AssemblyOptions opts;
    opts.extra_points = 4;
    const auto f = assembleLoad(q3, EnrichedSpaceLayout(q3, 0), sineSource, opts);
    CHECK(std::abs(f.sum() - 8.0) < 1e-10);
}

TEST_CASE("artificial dofs carry no load")
{
    const auto disc = refine(squareDomain(2, 2), 2, 1);
    const auto sys = assembleLocalSystem(disc, 0, sineSource);
    CHECK(sys.load.tail(sys.layout.size() - sys.layout.numBase()).norm() == 0.0);
    CHECK(sys.layout.neighbors().size() == 2);
}

TEST_CASE("global dG system")
{
    SUBCASE("constants have zero dG norm without Dirichlet sides")
    {
        const auto disc = refine(floatingSquares(2, 2), 2, 1);
        const auto locals = assembleLocalSystems(disc, sineSource);
        const auto sys = assembleGlobalSystem(locals, globalOffsets(disc));
        const Eigen::VectorXd c = Eigen::VectorXd::Constant(sys.matrix.rows(), 3.0);
        CHECK(std::abs(c.dot(sys.norm * c)) < 1e-10);
        CHECK((sys.matrix * c).norm() < 1e-10);
    }
    SUBCASE("monolithic solution satisfies the discrete equation")
    {
        const auto disc = refine(squareDomain(2, 2), 2, 2);
        const auto locals = assembleLocalSystems(disc, sineSource);
        const auto sys = assembleGlobalSystem(locals, globalOffsets(disc));
        const Eigen::VectorXd u = solveMonolithic(sys);
        std::mt19937_64 gen(5);
        std::normal_distribution<double> nd;
        const Eigen::VectorXd res = sys.matrix * u - sys.load;
        for (int i = 0; i < 20; ++i) {
            Eigen::VectorXd v(u.size());
            for (int j = 0; j < v.size(); ++j) v[j] = nd(gen);
            CHECK(std::abs(v.dot(res)) <= 1e-10 * v.norm() * sys.load.norm());
        }
        CHECK(l2Error(disc, u, sineSolution) < 1e-2);
    }
    SUBCASE("a_h and the dG norm are equivalent")
    {
        const auto disc = refine(squareDomain(2, 2), 2, 1);
        const auto sys = assembleGlobalSystem(assembleLocalSystems(disc, sineSource), globalOffsets(disc));
        const auto c = measureCoercivity(sys);
        MESSAGE("equivalence constants: " << c.min_ratio << " " << c.max_ratio);
        CHECK(c.min_ratio > 0.1);
        CHECK(c.max_ratio < 10.0);
    }
}

TEST_CASE("enriched layout and global numbering")
{
    const auto disc = refine(ringDomain(), 2, 1);
    const auto offsets = globalOffsets(disc);
    CHECK(offsets.back() == disc.totalDofs());
    for (int k = 0; k < disc.numPatches(); ++k) {
        const EnrichedSpaceLayout layout(disc, k);
        int expected = layout.numBase();
        int last = -1;
        for (const auto& b : layout.neighbors()) {
            CHECK(b.patch > last);
            last = b.patch;
            CHECK(b.offset == expected);
            expected += b.size();
            CHECK(b.pair_grid_size == doctest::Approx(disc.pairGridSize(k, b.patch)));
        }
        CHECK(layout.size() == expected);
        const auto map = enrichedToGlobal(layout, offsets);
        for (const auto& b : layout.neighbors())
            for (int pos = 0; pos < b.size(); ++pos) CHECK(map[b.offset + pos] == offsets[b.patch] + b.trace_dofs[pos]);
    }
}
