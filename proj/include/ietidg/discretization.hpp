#pragma once

/// Per-patch spline spaces over a multi-patch topology, and the refinement
/// protocol used by the experiments.

#include <array>
#include <span>
#include <vector>

#include "ietidg/geometry.hpp"
#include "ietidg/spline.hpp"

namespace ietidg {

class Discretization {
public:
    /// `grids[k]` holds the breakpoints of patch k per direction; knot vectors
    /// have maximum smoothness.
    Discretization(MultiPatchTopology topology, int degree,
                   std::vector<std::array<std::vector<double>, 2>> grids);

    const MultiPatchTopology& topology() const noexcept { return topo_; }
    int numPatches() const noexcept { return topo_.numPatches(); }
    int degree() const noexcept { return degree_; }
    const TensorBSplineSpace& space(int k) const { return spaces_[k]; }

    /// h-hat_k, the largest parametric knot span.
    double hatGridSize(int k) const { return spaces_[k].maxSpan(); }
    /// h_k = h-hat_k * H_k.
    double gridSize(int k) const { return hatGridSize(k) * topo_.diameter(k); }
    /// h_{kl} = min(h_k, h_l).
    double pairGridSize(int k, int l) const;

    /// Smallest min-span / max-span ratio over all patches and directions.
    double quasiUniformity() const;
    /// max_k log(H_k / h_k).
    double maxLogHOverH() const;

    int totalDofs() const;

private:
    MultiPatchTopology topo_;
    int degree_;
    std::vector<TensorBSplineSpace> spaces_;
};

/// Breakpoints after r refinement steps: the first step inserts one knot per
/// span at 4/9 (even 1-based patch number) or 6/11 (odd) of its length, later
/// steps bisect uniformly. `extra_uniform` further bisections follow
/// (grid-size disparity).
std::vector<double> refineBreakpoints(std::span<const double> breaks, int steps, int patch_number,
                                      int extra_uniform = 0);

/// Discretization of degree p after r steps; patches with even 1-based number
/// receive `disparity` extra uniform refinements.
Discretization refine(const MultiPatchTopology& topo, int degree, int steps, int disparity = 0);

}  // namespace ietidg
