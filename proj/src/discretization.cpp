#include "ietidg/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ietidg {

Discretization::Discretization(MultiPatchTopology topology, int degree,
                               std::vector<std::array<std::vector<double>, 2>> grids)
    : topo_(std::move(topology)), degree_(degree)
{
    if (degree_ < 1) throw std::invalid_argument("Discretization: degree must be positive");
    if (static_cast<int>(grids.size()) != topo_.numPatches())
        throw std::invalid_argument("Discretization: one grid per patch required");
    spaces_.reserve(grids.size());
    for (int k = 0; k < topo_.numPatches(); ++k) {
        spaces_.emplace_back(KnotVector::fromBreakpoints(degree_, grids[k][0]),
                             KnotVector::fromBreakpoints(degree_, grids[k][1]),
                             topo_.dirichletMask(k));
    }
}

double Discretization::pairGridSize(int k, int l) const
{
    return std::min(gridSize(k), gridSize(l));
}

double Discretization::quasiUniformity() const
{
    double q = 1.0;
    for (const auto& s : spaces_) q = std::min({q, s.knots(0).quasiUniformity(), s.knots(1).quasiUniformity()});
    return q;
}

double Discretization::maxLogHOverH() const
{
    double v = 0.0;
    for (int k = 0; k < numPatches(); ++k) v = std::max(v, std::log(1.0 / hatGridSize(k)));
    return v;
}

int Discretization::totalDofs() const
{
    int n = 0;
    for (const auto& s : spaces_) n += s.size();
    return n;
}

std::vector<double> refineBreakpoints(std::span<const double> breaks, int steps, int patch_number,
                                      int extra_uniform)
{
    std::vector<double> b(breaks.begin(), breaks.end());
    auto split = [&b](double fraction) {
        std::vector<double> out{b.front()};
        for (std::size_t i = 1; i < b.size(); ++i) {
            out.push_back(b[i - 1] + fraction * (b[i] - b[i - 1]));
            out.push_back(b[i]);
        }
        b = std::move(out);
    };
    for (int r = 0; r < steps; ++r) {
        if (r == 0)
            split(patch_number % 2 == 0 ? 4.0 / 9.0 : 6.0 / 11.0);
        else
            split(0.5);
    }
    for (int e = 0; e < extra_uniform; ++e) split(0.5);
    return b;
}

Discretization refine(const MultiPatchTopology& topo, int degree, int steps, int disparity)
{
    if (steps < 0 || disparity < 0) throw std::invalid_argument("refine: negative refinement count");
    std::vector<std::array<std::vector<double>, 2>> grids;
    for (int k = 0; k < topo.numPatches(); ++k) {
        const int number = k + 1;
        const int extra = (number % 2 == 0) ? disparity : 0;
        const auto& g = topo.patch(k).grid;
        grids.push_back({refineBreakpoints(g[0], steps, number, extra),
                         refineBreakpoints(g[1], steps, number, extra)});
    }
    return Discretization(topo, degree, std::move(grids));
}

}  // namespace ietidg
