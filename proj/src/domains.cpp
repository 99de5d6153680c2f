#include "ietidg/domains.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace ietidg {

MultiPatchTopology squareDomain(int m, int n, TopologyOptions opts)
{
    if (m < 1 || n < 1) throw std::invalid_argument("squareDomain: need at least one patch per direction");
    std::vector<Patch> patches;
    std::vector<EdgeGlue> glues;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) {
            patches.push_back(makePatch(GeometryMap::rectangle(double(i) / m, double(j) / n, double(i + 1) / m,
                                                               double(j + 1) / n)));
            const int k = i + m * j;
            if (i > 0) glues.push_back({k - 1, k, Side::East, Side::West, false});
            if (j > 0) glues.push_back({k - m, k, Side::North, Side::South, false});
        }
    return MultiPatchTopology(std::move(patches), std::move(glues), std::move(opts));
}

MultiPatchTopology ringDomain()
{
    constexpr int layers = 3;
    constexpr int sectors = 4;
    const KnotVector quad(2, {0, 0, 0, 1, 1, 1});
    const double w = 1.0 / std::sqrt(2.0);
    auto number = [](int layer, int sector) { return layers * sector + layer; };
    std::vector<Patch> patches;
    std::vector<EdgeGlue> glues;
    for (int j = 0; j < sectors; ++j) {
        const double a = j * std::numbers::pi / 2.0;
        const Eigen::Vector2d e0(std::cos(a), std::sin(a));
        const Eigen::Vector2d e1(std::cos(a) - std::sin(a), std::sin(a) + std::cos(a));
        const Eigen::Vector2d e2(-std::sin(a), std::cos(a));
        for (int i = 0; i < layers; ++i) {
            const double r0 = 1.0 + double(i) / layers;
            const double r1 = 1.0 + double(i + 1) / layers;
            std::vector<Eigen::Vector2d> ctrl;
            std::vector<double> weights;
            for (int b = 0; b < 3; ++b) {
                const double r = r0 + 0.5 * b * (r1 - r0);
                for (const auto& [dir, wt] : {std::pair{e0, 1.0}, std::pair{e1, w}, std::pair{e2, 1.0}}) {
                    ctrl.push_back(r * dir);
                    weights.push_back(wt);
                }
            }
            patches.push_back(makePatch(GeometryMap(quad, quad, std::move(ctrl), std::move(weights))));
            const int k = number(i, j);
            if (i > 0) glues.push_back({number(i - 1, j), k, Side::North, Side::South, false});
            if (j > 0) glues.push_back({number(i, j - 1), k, Side::East, Side::West, false});
            if (j == sectors - 1) glues.push_back({number(i, 0), k, Side::West, Side::East, false});
        }
    }
    return MultiPatchTopology(std::move(patches), std::move(glues));
}

MultiPatchTopology footprintDomain()
{
    const std::vector<double> xs{0, 1, 2, 3, 4, 5};
    const std::vector<double> ys{0, 2, 4, 5, 6, 7, 8};
    // Occupied cells per row from the bottom.
    const std::vector<std::string> rows{".##..", ".###.", ".###.", "#####", "#####", "##.##"};
    const double scale = 1.0 / 8.0;

    // Cells of both checkerboard colors in row-major order, interleaved so
    // that edge neighbors get numbers of opposite parity.
    std::array<std::vector<std::pair<int, int>>, 2> color;
    for (int j = 0; j < static_cast<int>(rows.size()); ++j)
        for (int i = 0; i + 1 < static_cast<int>(xs.size()); ++i)
            if (rows[j][i] == '#') color[(i + j) % 2].emplace_back(i, j);
    if (color[0].size() != color[1].size()) throw std::logic_error("footprint layout is not balanced");

    std::vector<Patch> patches;
    std::vector<std::vector<int>> id(rows.size(), std::vector<int>(xs.size() - 1, -1));
    for (std::size_t n = 0; n < 2 * color[0].size(); ++n) {
        const auto [i, j] = color[n % 2][n / 2];
        id[j][i] = static_cast<int>(patches.size());
        Patch p = makePatch(GeometryMap::rectangle(scale * xs[i], scale * ys[j], scale * xs[i + 1], scale * ys[j + 1]));
        if (ys[j + 1] - ys[j] > 1.5) p.grid[1] = {0.0, 0.5, 1.0};
        patches.push_back(std::move(p));
    }
    std::vector<EdgeGlue> glues;
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            const int k = id[j][i];
            if (k < 0) continue;
            if (i > 0 && id[j][i - 1] >= 0) glues.push_back({id[j][i - 1], k, Side::East, Side::West, false});
            if (j > 0 && id[j - 1][i] >= 0) glues.push_back({id[j - 1][i], k, Side::North, Side::South, false});
        }
    return MultiPatchTopology(std::move(patches), std::move(glues));
}

MultiPatchTopology makeDomain(const std::string& name)
{
    static const std::regex square(R"(square-(\d+)x(\d+))");
    std::smatch m;
    if (std::regex_match(name, m, square)) return squareDomain(std::stoi(m[1]), std::stoi(m[2]));
    if (name == "ring12") return ringDomain();
    if (name == "footprint") return footprintDomain();
    throw std::invalid_argument("unknown domain '" + name + "' (expected square-MxN, ring12 or footprint)");
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> readNumbers(std::istringstream& ls)
{
    std::vector<double> v;
    double x;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw std::runtime_error("expected a number");
    return v;
}

Side readSide(std::istringstream& ls)
{
    std::string s;
    if (!(ls >> s)) throw std::runtime_error("expected a side name");
    return parseSide(s);
}

}  // namespace

MultiPatchTopology readDomain(std::istream& in)
{
    struct PatchRecord {
        int ps = -1, pt = -1;
        std::vector<double> ks, kt, gs, gt;
        std::vector<Eigen::Vector2d> points;
        std::vector<double> weights;
    };
    std::vector<Patch> patches;
    std::vector<EdgeGlue> glues;
    TopologyOptions opts;
    std::optional<PatchRecord> cur;
    std::string line;
    int lineno = 0;
    auto fail = [&lineno](const std::string& what) {
        throw std::runtime_error("domain file line " + std::to_string(lineno) + ": " + what);
    };
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
            std::istringstream ls(line);
            std::string key;
            if (!(ls >> key)) continue;
            if (key == "patch") {
                if (cur) fail("nested patch");
                cur.emplace();
            } else if (key == "end") {
                if (!cur) fail("'end' outside a patch");
                if (cur->ps < 1 || cur->pt < 1) fail("patch without degree");
                KnotVector u(cur->ps, cur->ks), v(cur->pt, cur->kt);
                const std::size_t n = static_cast<std::size_t>(u.size()) * v.size();
                if (cur->points.size() != n) fail("expected " + std::to_string(n) + " control points");
                bool rational = false;
                for (double w : cur->weights) rational = rational || w != 1.0;
                Patch p = makePatch(GeometryMap(u, v, cur->points, rational ? cur->weights : std::vector<double>{}));
                if (!cur->gs.empty()) p.grid[0] = cur->gs;
                if (!cur->gt.empty()) p.grid[1] = cur->gt;
                patches.push_back(std::move(p));
                cur.reset();
            } else if (cur) {
                if (key == "degree") {
                    if (!(ls >> cur->ps >> cur->pt)) fail("degree needs two integers");
                } else if (key == "knots_s") {
                    cur->ks = readNumbers(ls);
                } else if (key == "knots_t") {
                    cur->kt = readNumbers(ls);
                } else if (key == "grid_s") {
                    cur->gs = readNumbers(ls);
                } else if (key == "grid_t") {
                    cur->gt = readNumbers(ls);
                } else if (key == "point") {
                    const auto v = readNumbers(ls);
                    if (v.size() != 2 && v.size() != 3) fail("point needs x y [weight]");
                    cur->points.emplace_back(v[0], v[1]);
                    cur->weights.push_back(v.size() == 3 ? v[2] : 1.0);
                } else {
                    fail("unknown patch record '" + key + "'");
                }
            } else if (key == "glue") {
                EdgeGlue g;
                int flipped = 0;
                if (!(ls >> g.k)) fail("glue needs a patch number");
                g.side_k = readSide(ls);
                if (!(ls >> g.l)) fail("glue needs a second patch number");
                g.side_l = readSide(ls);
                if (!(ls >> flipped)) fail("glue needs an orientation flag");
                g.k -= 1;
                g.l -= 1;
                g.flipped = flipped != 0;
                glues.push_back(g);
            } else if (key == "free") {
                int k = 0;
                if (!(ls >> k)) fail("free needs a patch number");
                opts.free_sides.emplace_back(k - 1, readSide(ls));
            } else {
                fail("unknown record '" + key + "'");
            }
        }
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (cur) throw std::runtime_error("domain file: unterminated patch");
    return MultiPatchTopology(std::move(patches), std::move(glues), std::move(opts));
}

MultiPatchTopology readDomainFile(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open domain file " + path);
    return readDomain(in);
}

void writeDomain(std::ostream& out, const MultiPatchTopology& topo)
{
    out << std::setprecision(17);
    auto list = [&out](const char* key, const std::vector<double>& v) {
        out << key;
        for (double x : v) out << ' ' << x;
        out << '\n';
    };
    for (int k = 0; k < topo.numPatches(); ++k) {
        const Patch& p = topo.patch(k);
        const GeometryMap& g = p.geometry;
        out << "patch\n";
        out << "degree " << g.knots(0).degree() << ' ' << g.knots(1).degree() << '\n';
        list("knots_s", g.knots(0).knots());
        list("knots_t", g.knots(1).knots());
        list("grid_s", p.grid[0]);
        list("grid_t", p.grid[1]);
        for (std::size_t i = 0; i < g.control().size(); ++i) {
            out << "point " << g.control()[i].x() << ' ' << g.control()[i].y();
            if (g.isRational()) out << ' ' << g.weights()[i];
            out << '\n';
        }
        out << "end\n";
    }
    for (const EdgeGlue& e : topo.glues())
        out << "glue " << e.k + 1 << ' ' << toString(e.side_k) << ' ' << e.l + 1 << ' ' << toString(e.side_l) << ' '
            << (e.flipped ? 1 : 0) << '\n';
    for (const auto& [k, s] : topo.options().free_sides) out << "free " << k + 1 << ' ' << toString(s) << '\n';
}

}  // namespace ietidg
