#pragma once

/// Patch geometry maps and multi-patch topology.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ietidg/spline.hpp"

namespace ietidg {

class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularGeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GeometryEval {
    Eigen::Vector2d point;
    /// Columns are dG/ds and dG/dt.
    Eigen::Matrix2d jacobian;
};

/// Tensor-product B-spline or NURBS map G : [0,1]^2 -> R^2.
///
/// Control points are stored with the first index running fastest
/// (index j1 + n1 * j2).
class GeometryMap {
public:
    GeometryMap(KnotVector u, KnotVector v, std::vector<Eigen::Vector2d> control,
                std::vector<double> weights = {});

    /// Bilinear map of the quadrilateral with corners in (SW, SE, NW, NE) order.
    static GeometryMap bilinear(const Eigen::Vector2d& sw, const Eigen::Vector2d& se,
                                const Eigen::Vector2d& nw, const Eigen::Vector2d& ne);
    static GeometryMap rectangle(double x0, double y0, double x1, double y1);

    /// Point and Jacobian; throws SingularGeometryError if |det| < 1e-14 H^2.
    GeometryEval eval(double s, double t) const;
    GeometryEval eval(const Eigen::Vector2d& st) const { return eval(st.x(), st.y()); }
    /// Point only, without the singularity check.
    Eigen::Vector2d point(double s, double t) const;

    const KnotVector& knots(int dir) const { return kv_[dir]; }
    const std::vector<Eigen::Vector2d>& control() const noexcept { return control_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    bool isRational() const noexcept { return !weights_.empty(); }
    /// True if the Jacobian is constant (checked on a sample grid).
    bool isAffine() const noexcept { return affine_; }
    /// Patch diameter H_k.
    double diameter() const noexcept { return diameter_; }

private:
    GeometryEval evalUnchecked(double s, double t) const;

    std::array<KnotVector, 2> kv_;
    std::vector<Eigen::Vector2d> control_;
    std::vector<double> weights_;
    double diameter_ = 0.0;
    bool affine_ = false;
};

/// Maximum pairwise distance over the boundary points of a (p+2) x (p+2)
/// parameter sample, p the larger geometry degree.
double patchDiameter(const GeometryMap& g);

/// One patch of a multi-patch domain: its geometry and the coarsest
/// discretization grid (breakpoints per direction).
struct Patch {
    GeometryMap geometry;
    std::array<std::vector<double>, 2> grid;
};

/// Patch from a geometry, with the coarse grid taken from its knot vectors.
Patch makePatch(GeometryMap geometry);

/// Common edge of patches k < l. The edge parameter tau runs along side_k in
/// its running direction; on side_l it runs the same way unless `flipped`.
struct EdgeGlue {
    int k = 0;
    int l = 0;
    Side side_k = Side::West;
    Side side_l = Side::West;
    bool flipped = false;
    double length = 0.0;  ///< physical edge length (filled by the topology)

    /// Side, running parameter and outward sign for the given patch.
    Side sideOf(int patch) const { return patch == k ? side_k : side_l; }
    int other(int patch) const { return patch == k ? l : k; }
};

/// Map from the edge parameter to one side's parameter domain.
struct TraceMap {
    Side side = Side::West;
    bool reversed = false;

    double running(double tau) const noexcept { return reversed ? 1.0 - tau : tau; }
    Eigen::Vector2d param(double tau) const noexcept { return sidePoint(side, running(tau)); }
};

struct Vertex {
    Eigen::Vector2d point;
    std::vector<std::pair<int, Corner>> patches;  ///< sorted by patch index
};

struct TopologyOptions {
    /// Sides left without boundary condition; every other non-glued side is
    /// Dirichlet. Only meaningful for tests of floating configurations.
    std::vector<std::pair<int, Side>> free_sides;
    int max_patches_per_vertex = 8;
    double conformity_tol = 1e-8;  ///< relative to min(H_k, H_l)
};

/// Patches, glued edges, vertices and boundary masks of a multi-patch domain.
class MultiPatchTopology {
public:
    /// Validates the glue list geometrically; throws TopologyError on failure.
    MultiPatchTopology(std::vector<Patch> patches, std::vector<EdgeGlue> glues,
                       TopologyOptions options = {});

    int numPatches() const noexcept { return static_cast<int>(patches_.size()); }
    const Patch& patch(int k) const { return patches_[k]; }
    const GeometryMap& geometry(int k) const { return patches_[k].geometry; }
    double diameter(int k) const { return patches_[k].geometry.diameter(); }

    const std::vector<EdgeGlue>& glues() const noexcept { return glues_; }
    const EdgeGlue& glue(int g) const { return glues_[g]; }
    /// Edge neighbors of k in ascending order.
    const std::vector<int>& neighbors(int k) const { return neighbors_[k]; }
    /// Glue index between k and l, if any.
    std::optional<int> glueBetween(int k, int l) const;
    /// Glue index on a side of patch k, if glued.
    std::optional<int> glueOnSide(int k, Side s) const;

    std::array<bool, 4> dirichletMask(int k) const { return dirichlet_[k]; }
    bool isDirichlet(int k, Side s) const { return dirichlet_[k][index(s)]; }

    const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
    int vertexOf(int k, Corner c) const { return corner_vertex_[k][index(c)]; }

    TraceMap traceMap(int glue, int patch) const;

    const TopologyOptions& options() const noexcept { return options_; }

private:
    std::vector<Patch> patches_;
    std::vector<EdgeGlue> glues_;
    TopologyOptions options_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::array<int, 4>> side_glue_;
    std::vector<std::array<bool, 4>> dirichlet_;
    std::vector<Vertex> vertices_;
    std::vector<std::array<int, 4>> corner_vertex_;
};

/// Trace parameterization of one side of a glued edge: parameter point and
/// the length factor |dG/d tau| for line integrals.
struct TracePoint {
    Eigen::Vector2d param;
    Eigen::Vector2d physical;
    double length_factor = 0.0;
};

TracePoint traceParameterization(const MultiPatchTopology& topo, int glue, int patch, double tau);

/// Measured surrogates of the geometric assumptions.
struct AssumptionReport {
    double c1 = 0.0;                      ///< max(|grad G|/H, H |grad G^{-1}|)
    double max_conformity_residual = 0.0; ///< absolute, over all glues
    std::vector<double> glue_residuals;
    int max_patches_per_vertex = 0;
    int num_interior_vertices = 0;
};

/// Samples every glue (4(p+1) points) and every Jacobian ((4p)^2 grid).
/// Throws TopologyError naming the first nonconforming edge.
AssumptionReport verifyAssumptions(const MultiPatchTopology& topo);

}  // namespace ietidg
