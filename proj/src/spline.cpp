#include "ietidg/spline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ietidg {

namespace {

constexpr double kKnotTol = 1e-14;

}  // namespace

KnotVector::KnotVector(int degree, std::vector<double> knots)
    : degree_(degree), knots_(std::move(knots))
{
    if (degree_ < 1) throw std::invalid_argument("KnotVector: degree must be positive");
    if (static_cast<int>(knots_.size()) < 2 * degree_ + 2)
        throw std::invalid_argument("KnotVector: too few knots for degree");
    if (!std::is_sorted(knots_.begin(), knots_.end()))
        throw std::invalid_argument("KnotVector: knots must be nondecreasing");
    if (!(knots_.back() > knots_.front()))
        throw std::invalid_argument("KnotVector: empty parameter interval");

    const auto mult = multiplicities();
    if (mult.front() != degree_ + 1 || mult.back() != degree_ + 1)
        throw std::invalid_argument("KnotVector: end multiplicities must be degree+1");
    for (std::size_t i = 1; i + 1 < mult.size(); ++i) {
        if (mult[i] < 1 || mult[i] > degree_)
            throw std::invalid_argument("KnotVector: interior multiplicity must lie in 1..degree");
    }
}

KnotVector KnotVector::uniform(int degree, int elements)
{
    if (elements < 1) throw std::invalid_argument("KnotVector::uniform: need at least one element");
    std::vector<double> breaks(elements + 1);
    for (int i = 0; i <= elements; ++i) breaks[i] = static_cast<double>(i) / elements;
    breaks.back() = 1.0;
    return fromBreakpoints(degree, breaks);
}

KnotVector KnotVector::fromBreakpoints(int degree, std::span<const double> breaks,
                                       int interior_multiplicity)
{
    if (breaks.size() < 2) throw std::invalid_argument("KnotVector: need at least two breakpoints");
    std::vector<double> knots;
    knots.reserve(breaks.size() * interior_multiplicity + 2 * (degree + 1));
    knots.insert(knots.end(), degree + 1, breaks.front());
    for (std::size_t i = 1; i + 1 < breaks.size(); ++i)
        knots.insert(knots.end(), interior_multiplicity, breaks[i]);
    knots.insert(knots.end(), degree + 1, breaks.back());
    return KnotVector(degree, std::move(knots));
}

std::vector<double> KnotVector::breakpoints() const
{
    std::vector<double> out{knots_.front()};
    for (double k : knots_)
        if (k - out.back() > kKnotTol) out.push_back(k);
    return out;
}

std::vector<int> KnotVector::multiplicities() const
{
    std::vector<int> out{1};
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (knots_[i] - knots_[i - 1] > kKnotTol)
            out.push_back(1);
        else
            ++out.back();
    }
    return out;
}

double KnotVector::maxSpan() const
{
    const auto b = breakpoints();
    double h = 0.0;
    for (std::size_t i = 1; i < b.size(); ++i) h = std::max(h, b[i] - b[i - 1]);
    return h;
}

double KnotVector::minSpan() const
{
    const auto b = breakpoints();
    double h = b.back() - b.front();
    for (std::size_t i = 1; i < b.size(); ++i) h = std::min(h, b[i] - b[i - 1]);
    return h;
}

int KnotVector::findSpan(double x) const
{
    if (!(x >= front() && x <= back()))
        throw std::domain_error("KnotVector::findSpan: point " + std::to_string(x) +
                                " outside the parameter interval");
    const int n = size();
    if (x >= knots_[n]) return n - 1;
    // Largest i in [p, n-1] with knots[i] <= x.
    const auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, x);
    return static_cast<int>(it - knots_.begin()) - 1;
}

BasisValues evalBasis(const KnotVector& kv, double x)
{
    const int p = kv.degree();
    const int span = kv.findSpan(x);
    const auto& U = kv.knots();

    BasisValues out;
    out.first = span - p;
    out.values.assign(p + 1, 0.0);
    std::vector<double> left(p + 1), right(p + 1);
    out.values[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - U[span + 1 - j];
        right[j] = U[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = out.values[r] / (right[r + 1] + left[j - r]);
            out.values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out.values[j] = saved;
    }
    return out;
}

BasisDerivatives evalBasisDerivs(const KnotVector& kv, double x, int max_order)
{
    const int p = kv.degree();
    const int span = kv.findSpan(x);
    const auto& U = kv.knots();
    const int n = std::min(max_order, p);

    // Triangular table of basis values (upper) and knot differences (lower).
    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - U[span + 1 - j];
        right[j] = U[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }

    BasisDerivatives out;
    out.first = span - p;
    out.derivs = Eigen::MatrixXd::Zero(std::max(max_order, 0) + 1, p + 1);
    for (int j = 0; j <= p; ++j) out.derivs(0, j) = ndu(j, p);

    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= n; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                d = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                d += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                d += a(s2, k) * ndu(r, pk);
            }
            out.derivs(k, r) = d;
            std::swap(s1, s2);
        }
    }
    int factor = p;
    for (int k = 1; k <= n; ++k) {
        out.derivs.row(k) *= factor;
        factor *= (p - k);
    }
    return out;
}

// ---------------------------------------------------------------------------

const char* toString(Side s) noexcept
{
    switch (s) {
    case Side::West: return "west";
    case Side::East: return "east";
    case Side::South: return "south";
    case Side::North: return "north";
    }
    return "?";
}

Side parseSide(const std::string& name)
{
    for (Side s : kSides)
        if (name == toString(s)) return s;
    throw std::invalid_argument("unknown side '" + name + "'");
}

Corner sideCorner(Side s, bool end) noexcept
{
    switch (s) {
    case Side::West: return end ? Corner::NorthWest : Corner::SouthWest;
    case Side::East: return end ? Corner::NorthEast : Corner::SouthEast;
    case Side::South: return end ? Corner::SouthEast : Corner::SouthWest;
    case Side::North: return end ? Corner::NorthEast : Corner::NorthWest;
    }
    return Corner::SouthWest;
}

std::array<Side, 2> cornerSides(Corner c) noexcept
{
    const int bits = index(c);
    return {(bits & 1) ? Side::East : Side::West, (bits & 2) ? Side::North : Side::South};
}

Eigen::Vector2d sidePoint(Side s, double running) noexcept
{
    switch (s) {
    case Side::West: return {0.0, running};
    case Side::East: return {1.0, running};
    case Side::South: return {running, 0.0};
    case Side::North: return {running, 1.0};
    }
    return {0.0, 0.0};
}

Eigen::Vector2d cornerPoint(Corner c) noexcept
{
    const int bits = index(c);
    return {(bits & 1) ? 1.0 : 0.0, (bits & 2) ? 1.0 : 0.0};
}

Eigen::Vector2d parametricNormal(Side s) noexcept
{
    switch (s) {
    case Side::West: return {-1.0, 0.0};
    case Side::East: return {1.0, 0.0};
    case Side::South: return {0.0, -1.0};
    case Side::North: return {0.0, 1.0};
    }
    return {0.0, 0.0};
}

// ---------------------------------------------------------------------------

TensorBSplineSpace::TensorBSplineSpace(KnotVector u, KnotVector v, std::array<bool, 4> dirichlet)
    : kv_{std::move(u), std::move(v)}, dirichlet_(dirichlet)
{
    if (kv_[0].degree() != kv_[1].degree())
        throw std::invalid_argument("TensorBSplineSpace: both directions need the same degree");
    const int n1 = kv_[0].size();
    const int n2 = kv_[1].size();

    auto classify = [&](int j1, int j2) {
        DofInfo d{j1, j2, 0, 0};
        if (j1 == 0) d.sides |= 1U << index(Side::West);
        if (j1 == n1 - 1) d.sides |= 1U << index(Side::East);
        if (j2 == 0) d.sides |= 1U << index(Side::South);
        if (j2 == n2 - 1) d.sides |= 1U << index(Side::North);
        for (Corner c : kCorners) {
            const auto [a, b] = cornerSides(c);
            if (d.onSide(a) && d.onSide(b)) d.corners |= 1U << index(c);
        }
        return d;
    };

    std::vector<DofInfo> interior, boundary;
    for (int j2 = 0; j2 < n2; ++j2) {
        for (int j1 = 0; j1 < n1; ++j1) {
            const DofInfo d = classify(j1, j2);
            bool removed = false;
            for (Side s : kSides) removed = removed || (d.onSide(s) && dirichlet_[index(s)]);
            if (removed) continue;
            (d.sides == 0 ? interior : boundary).push_back(d);
        }
    }
    num_interior_ = static_cast<int>(interior.size());
    dofs_ = std::move(interior);
    dofs_.insert(dofs_.end(), boundary.begin(), boundary.end());

    lookup_.assign(static_cast<std::size_t>(n1) * n2, -1);
    for (int i = 0; i < size(); ++i) lookup_[dofs_[i].j1 + n1 * dofs_[i].j2] = i;

    for (Side s : kSides) {
        const int dir = runningDirection(s);
        const int n = kv_[dir].size();
        for (int j = 0; j < n; ++j) {
            int j1 = 0, j2 = 0;
            switch (s) {
            case Side::West: j1 = 0; j2 = j; break;
            case Side::East: j1 = n1 - 1; j2 = j; break;
            case Side::South: j1 = j; j2 = 0; break;
            case Side::North: j1 = j; j2 = n2 - 1; break;
            }
            const int d = dofAt(j1, j2);
            if (d < 0) continue;
            side_dofs_[index(s)].push_back(d);
            side_running_[index(s)].push_back(j);
        }
    }
    for (Corner c : kCorners) {
        const int bits = index(c);
        corner_dofs_[bits] = dofAt((bits & 1) ? n1 - 1 : 0, (bits & 2) ? n2 - 1 : 0);
    }
}

double TensorBSplineSpace::maxSpan() const
{
    return std::max(kv_[0].maxSpan(), kv_[1].maxSpan());
}

// ---------------------------------------------------------------------------

GaussRule gaussLegendre(int q)
{
    if (q < 1) throw std::invalid_argument("gaussLegendre: need at least one point");
    GaussRule rule;
    rule.nodes.resize(q);
    rule.weights.resize(q);
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (q == 1) p0 = 1.0;
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= q; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = q * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[q - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[q - 1 - i] = w;
    }
    if (q % 2 == 1) rule.nodes[q / 2] = 0.0;
    return rule;
}

QuadratureRule makeQuadrature(std::span<const double> breaks, int q)
{
    const GaussRule g = gaussLegendre(q);
    QuadratureRule rule;
    rule.points_per_span = q;
    for (std::size_t e = 1; e < breaks.size(); ++e) {
        const double a = breaks[e - 1];
        const double b = breaks[e];
        const double half = 0.5 * (b - a);
        for (int i = 0; i < q; ++i) {
            rule.nodes.push_back(a + half * (g.nodes[i] + 1.0));
            rule.weights.push_back(half * g.weights[i]);
        }
    }
    return rule;
}

QuadratureRule makeQuadrature(const KnotVector& kv, int q)
{
    const auto b = kv.breakpoints();
    return makeQuadrature(b, q);
}

QuadratureRule2D makeQuadrature(const TensorBSplineSpace& space, int q)
{
    const QuadratureRule qu = makeQuadrature(space.knots(0), q);
    const QuadratureRule qv = makeQuadrature(space.knots(1), q);
    QuadratureRule2D rule;
    rule.points.reserve(qu.nodes.size() * qv.nodes.size());
    for (std::size_t j = 0; j < qv.nodes.size(); ++j)
        for (std::size_t i = 0; i < qu.nodes.size(); ++i) {
            rule.points.emplace_back(qu.nodes[i], qv.nodes[j]);
            rule.weights.push_back(qu.weights[i] * qv.weights[j]);
        }
    return rule;
}

std::vector<double> mergeBreakpoints(std::span<const double> a, std::span<const double> b, double tol)
{
    std::vector<double> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double x : all)
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    return out;
}

}  // namespace ietidg
