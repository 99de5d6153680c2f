#pragma once

/// Patch-local SIPG systems on enriched spaces with artificial interfaces.
///
/// The enriched space of patch k holds its own spline space followed by one
/// trace copy of every edge neighbor's space, neighbors in ascending order.
/// The local form is
///
///   a_e(u,v) = int grad u . grad v
///            + sum_l int_{edge} 1/2 (du/dn (v_l - v) + dv/dn (u_l - u))
///            + sum_l int_{edge} delta p^2 / h_kl (u_l - u)(v_l - v)
///
/// where u_l is the artificial copy of the neighbor trace.

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ietidg/discretization.hpp"

namespace ietidg {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;
using Source = std::function<double(const Eigen::Vector2d&)>;

/// One artificial interface of patch k: the trace space of neighbor l on the
/// common edge.
struct NeighborBlock {
    int patch = -1;                  ///< neighbor index l
    int glue = -1;
    TraceMap own_trace;              ///< edge parameter -> parameter domain of k
    TraceMap neighbor_trace;         ///< edge parameter -> parameter domain of l
    std::vector<int> trace_dofs;     ///< dofs of V^(l) with nonzero trace, l's edge order
    std::vector<int> running;        ///< univariate index of each trace dof
    int offset = 0;                  ///< enriched index of the first copy dof
    double pair_grid_size = 0.0;     ///< h_kl

    int size() const noexcept { return static_cast<int>(trace_dofs.size()); }
};

class EnrichedSpaceLayout {
public:
    EnrichedSpaceLayout(const Discretization& disc, int k);

    int patch() const noexcept { return patch_; }
    int numBase() const noexcept { return num_base_; }
    int numInterior() const noexcept { return num_interior_; }
    int numBoundary() const noexcept { return num_base_ - num_interior_; }
    int size() const noexcept { return size_; }
    /// Skeleton dimension: everything except the interior dofs.
    int skeletonSize() const noexcept { return size_ - num_interior_; }

    const std::vector<NeighborBlock>& neighbors() const noexcept { return blocks_; }
    const NeighborBlock& blockFor(int l) const;
    /// Enriched index of the copy of l's trace dof at edge position `pos`.
    int copyIndex(int l, int pos) const { return blockFor(l).offset + pos; }
    bool isCopy(int enriched) const noexcept { return enriched >= num_base_; }

private:
    int patch_;
    int num_base_;
    int num_interior_;
    int size_;
    std::vector<NeighborBlock> blocks_;
};

struct AssemblyOptions {
    double delta = 4.0;
    /// Gauss points per span and direction are degree + 1 + extra_points.
    int extra_points = 0;
    /// Additional points where a non-affine geometry makes the integrand
    /// non-polynomial.
    int curved_extra_points = 8;
};

/// A^(k) and f_e^(k) with their form contributions kept apart.
struct LocalSystem {
    EnrichedSpaceLayout layout;
    double delta = 0.0;
    SparseMatrix volume;       ///< a^(k)
    SparseMatrix consistency;  ///< m^(k)
    SparseMatrix penalty;      ///< r^(k)
    SparseMatrix matrix;       ///< A^(k) = a + m + r
    Eigen::VectorXd load;      ///< zero on artificial dofs
};

/// Volume stiffness a^(k) on the base dofs (size numBase()).
SparseMatrix assembleVolume(const Discretization& disc, int k, const AssemblyOptions& opts = {});

/// Adds m^(k) and r^(k) over the edge to neighbor block `block` (enriched
/// indices). Integration uses the union of both sides' breakpoints.
void assembleCoupling(const Discretization& disc, const EnrichedSpaceLayout& layout, int block,
                      const AssemblyOptions& opts, Triplets& consistency, Triplets& penalty);

/// Load vector on the enriched space.
Eigen::VectorXd assembleLoad(const Discretization& disc, const EnrichedSpaceLayout& layout,
                             const Source& f, const AssemblyOptions& opts = {});

LocalSystem assembleLocalSystem(const Discretization& disc, int k, const Source& f,
                                const AssemblyOptions& opts = {});

std::vector<LocalSystem> assembleLocalSystems(const Discretization& disc, const Source& f,
                                              const AssemblyOptions& opts = {});

/// Global numbering of the base spaces: patch k owns [offsets[k], offsets[k+1]).
std::vector<int> globalOffsets(const Discretization& disc);

/// Global index of every enriched dof of a layout (copies map to the
/// neighbor's dof).
std::vector<int> enrichedToGlobal(const EnrichedSpaceLayout& layout, const std::vector<int>& offsets);

/// The monolithic dG system a_h, the dG-norm matrix d and the load, obtained
/// by identifying artificial dofs with the neighbor's trace dofs.
struct GlobalDgSystem {
    std::vector<int> offsets;
    SparseMatrix matrix;
    SparseMatrix norm;
    Eigen::VectorXd load;
};

GlobalDgSystem assembleGlobalSystem(const std::vector<LocalSystem>& locals,
                                    const std::vector<int>& offsets);

/// Enriched coefficient vector of patch k from global base coefficients.
Eigen::VectorXd restrictToEnriched(const EnrichedSpaceLayout& layout, const std::vector<int>& offsets,
                                   const Eigen::VectorXd& global);

/// Value of the spline with base coefficients `coeffs` at (s,t).
double evaluate(const TensorBSplineSpace& space, const Eigen::VectorXd& coeffs, double s, double t);

/// L2 error of a multi-patch function given by global base coefficients.
double l2Error(const Discretization& disc, const Eigen::VectorXd& global, const Source& exact,
               int extra_points = 3);

/// Smallest generalized eigenvalue of (a_h, d) on the dG-norm unit sphere
/// and the largest one; dense, for small instances.
struct CoercivityReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
};

CoercivityReport measureCoercivity(const GlobalDgSystem& sys);

}  // namespace ietidg
