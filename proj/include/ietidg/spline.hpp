#pragma once

/// Univariate and tensor-product B-spline spaces, basis evaluation and
/// Gauss-Legendre quadrature.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ietidg {

/// p-open knot vector over [a,b] (usually [0,1]).
///
/// The first and last breakpoint carry multiplicity p+1, interior breakpoints
/// multiplicity 1..p. Spans are half-open [xi_i, xi_{i+1}) except the last
/// nonempty span, which is closed at the right end.
class KnotVector {
public:
    KnotVector(int degree, std::vector<double> knots);

    /// Open knot vector with `elements` equal spans on [0,1].
    static KnotVector uniform(int degree, int elements);

    /// Open knot vector with the given strictly increasing breakpoints;
    /// interior breakpoints are repeated `interior_multiplicity` times.
    static KnotVector fromBreakpoints(int degree, std::span<const double> breaks,
                                      int interior_multiplicity = 1);

    int degree() const noexcept { return degree_; }
    const std::vector<double>& knots() const noexcept { return knots_; }
    /// Number of basis functions n.
    int size() const noexcept { return static_cast<int>(knots_.size()) - degree_ - 1; }
    double front() const noexcept { return knots_.front(); }
    double back() const noexcept { return knots_.back(); }

    std::vector<double> breakpoints() const;
    std::vector<int> multiplicities() const;
    int numElements() const { return static_cast<int>(breakpoints().size()) - 1; }

    /// Largest span length; this is the parametric grid size h-hat.
    double maxSpan() const;
    double minSpan() const;
    double quasiUniformity() const { return minSpan() / maxSpan(); }

    /// Index i with knots[i] <= x < knots[i+1], degree() <= i < size().
    /// Throws std::domain_error if x lies outside [front(), back()].
    int findSpan(double x) const;

private:
    int degree_;
    std::vector<double> knots_;
};

/// The p+1 possibly nonzero basis values at a point; values[j] belongs to
/// basis function first + j.
struct BasisValues {
    int first = 0;
    std::vector<double> values;
};

/// Values and derivatives; derivs(d, j) is the d-th derivative of basis
/// function first + j.
struct BasisDerivatives {
    int first = 0;
    Eigen::MatrixXd derivs;
};

BasisValues evalBasis(const KnotVector& kv, double x);

/// Rows for orders greater than the degree are zero.
BasisDerivatives evalBasisDerivs(const KnotVector& kv, double x, int max_order);

// ---------------------------------------------------------------------------
// Parameter-domain sides and corners of the unit square.

enum class Side : std::uint8_t { West = 0, East = 1, South = 2, North = 3 };
enum class Corner : std::uint8_t { SouthWest = 0, SouthEast = 1, NorthWest = 2, NorthEast = 3 };

inline constexpr std::array<Side, 4> kSides{Side::West, Side::East, Side::South, Side::North};
inline constexpr std::array<Corner, 4> kCorners{Corner::SouthWest, Corner::SouthEast,
                                                Corner::NorthWest, Corner::NorthEast};

inline constexpr int index(Side s) noexcept { return static_cast<int>(s); }
inline constexpr int index(Corner c) noexcept { return static_cast<int>(c); }

const char* toString(Side s) noexcept;
Side parseSide(const std::string& name);

/// Direction (0 = s, 1 = t) along which the side runs.
inline constexpr int runningDirection(Side s) noexcept
{
    return (s == Side::West || s == Side::East) ? 1 : 0;
}

/// Corner at running parameter 0 (end == false) or 1 (end == true) of a side.
Corner sideCorner(Side s, bool end) noexcept;

/// The two sides meeting at a corner (the s-side first).
std::array<Side, 2> cornerSides(Corner c) noexcept;

/// Parameter-domain point of the side at running coordinate `running`.
Eigen::Vector2d sidePoint(Side s, double running) noexcept;

/// Parameter-domain location of a corner.
Eigen::Vector2d cornerPoint(Corner c) noexcept;

/// Outward unit normal of the unit square at a side.
Eigen::Vector2d parametricNormal(Side s) noexcept;

// ---------------------------------------------------------------------------

/// Classification of one tensor-product dof.
struct DofInfo {
    int j1 = 0;
    int j2 = 0;
    std::uint8_t sides = 0;    ///< bit index(Side) set if the trace on that side is nonzero
    std::uint8_t corners = 0;  ///< bit index(Corner) set if the value at that corner is nonzero

    bool onSide(Side s) const noexcept { return (sides >> index(s)) & 1U; }
    bool atCorner(Corner c) const noexcept { return (corners >> index(c)) & 1U; }
    bool atAnyCorner() const noexcept { return corners != 0; }
};

/// Tensor-product spline space S[p,Xi1] x S[p,Xi2] on the unit square with
/// homogeneous Dirichlet conditions on masked sides.
///
/// Dofs are ordered interior first, then boundary; inside each block
/// lexicographically by (j2, j1). Dofs whose basis function does not vanish on
/// a Dirichlet side are removed.
class TensorBSplineSpace {
public:
    TensorBSplineSpace(KnotVector u, KnotVector v, std::array<bool, 4> dirichlet = {});

    const KnotVector& knots(int dir) const { return kv_[dir]; }
    int degree() const noexcept { return kv_[0].degree(); }
    bool dirichlet(Side s) const noexcept { return dirichlet_[index(s)]; }

    int size() const noexcept { return static_cast<int>(dofs_.size()); }
    int numInterior() const noexcept { return num_interior_; }
    int numBoundary() const noexcept { return size() - num_interior_; }
    bool isInterior(int dof) const noexcept { return dof < num_interior_; }

    /// -1 if the tensor function has been removed.
    int dofAt(int j1, int j2) const { return lookup_[j1 + kv_[0].size() * j2]; }
    const DofInfo& dof(int i) const { return dofs_[i]; }

    /// Dofs with nonzero trace on a side, in increasing running index.
    const std::vector<int>& sideDofs(Side s) const { return side_dofs_[index(s)]; }
    /// Running (univariate) index of each entry of sideDofs(s).
    const std::vector<int>& sideRunning(Side s) const { return side_running_[index(s)]; }

    /// -1 if removed.
    int cornerDof(Corner c) const { return corner_dofs_[index(c)]; }

    /// h-hat: largest knot span over both directions.
    double maxSpan() const;

private:
    std::array<KnotVector, 2> kv_;
    std::array<bool, 4> dirichlet_;
    std::vector<DofInfo> dofs_;
    std::vector<int> lookup_;
    int num_interior_ = 0;
    std::array<std::vector<int>, 4> side_dofs_;
    std::array<std::vector<int>, 4> side_running_;
    std::array<int, 4> corner_dofs_{-1, -1, -1, -1};
};

// ---------------------------------------------------------------------------

/// Gauss-Legendre rule with q points on [-1,1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gaussLegendre(int q);

/// Composite Gauss rule on a partition: q points per span.
struct QuadratureRule {
    int points_per_span = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

QuadratureRule makeQuadrature(std::span<const double> breaks, int q);
QuadratureRule makeQuadrature(const KnotVector& kv, int q);

/// Tensor rule over the elements of a spline space; points in the parameter
/// domain.
struct QuadratureRule2D {
    std::vector<Eigen::Vector2d> points;
    std::vector<double> weights;
};

QuadratureRule2D makeQuadrature(const TensorBSplineSpace& space, int q);

/// Merge two sorted breakpoint lists, dropping duplicates closer than tol.
std::vector<double> mergeBreakpoints(std::span<const double> a, std::span<const double> b,
                                     double tol = 1e-13);

}  // namespace ietidg
