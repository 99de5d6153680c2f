#include "ietidg/local_solvers.hpp"

#include <stdexcept>
#include <string>

namespace ietidg {

PatchSchur::PatchSchur(const LocalSystem& sys)
    : ni_(sys.layout.numInterior()), ns_(sys.layout.skeletonSize())
{
    const SparseMatrix& a = sys.matrix;
    aii_ = a.topLeftCorner(ni_, ni_);
    aig_ = a.topRightCorner(ni_, ns_);
    agg_ = a.bottomRightCorner(ns_, ns_);
    s_ = Eigen::MatrixXd(agg_);
    if (ni_ == 0) return;
    llt_.compute(aii_);
    if (llt_.info() != Eigen::Success)
        throw std::runtime_error("interior matrix of patch " + std::to_string(sys.layout.patch() + 1) +
                                 " is not positive definite");
    const Eigen::MatrixXd x = llt_.solve(Eigen::MatrixXd(aig_));
    s_.noalias() -= aig_.transpose() * x;
    s_ = 0.5 * (s_ + s_.transpose()).eval();
}

Eigen::VectorXd PatchSchur::solveInterior(const Eigen::VectorXd& b) const
{
    if (ni_ == 0) return Eigen::VectorXd(0);
    return llt_.solve(b);
}

Eigen::VectorXd PatchSchur::apply(const Eigen::VectorXd& w) const
{
    Eigen::VectorXd y = agg_ * w;
    if (ni_ > 0) y -= aig_.transpose() * solveInterior(aig_ * w);
    return y;
}

Eigen::VectorXd PatchSchur::reducedLoad(const Eigen::VectorXd& load) const
{
    Eigen::VectorXd g = load.tail(ns_);
    if (ni_ > 0) g -= aig_.transpose() * solveInterior(load.head(ni_));
    return g;
}

Eigen::VectorXd PatchSchur::harmonicExtension(const Eigen::VectorXd& w) const
{
    if (ni_ == 0) return Eigen::VectorXd(0);
    return -solveInterior(aig_ * w);
}

Eigen::VectorXd PatchSchur::recoverInterior(const Eigen::VectorXd& w, const Eigen::VectorXd& load) const
{
    if (ni_ == 0) return Eigen::VectorXd(0);
    return solveInterior(load.head(ni_) - aig_ * w);
}

Eigen::VectorXd PatchSchur::extend(const Eigen::VectorXd& w, const Eigen::VectorXd& load) const
{
    Eigen::VectorXd u(ni_ + ns_);
    u.head(ni_) = recoverInterior(w, load);
    u.tail(ns_) = w;
    return u;
}

Eigen::VectorXd standardHarmonicExtension(const LocalSystem& sys, const Eigen::VectorXd& boundary)
{
    const int ni = sys.layout.numInterior();
    const int nb = sys.layout.numBoundary();
    if (ni == 0) return Eigen::VectorXd(0);
    const SparseMatrix& a = sys.volume;
    const SparseMatrix aii = a.topLeftCorner(ni, ni);
    const SparseMatrix aib = a.block(0, ni, ni, nb);
    Eigen::SimplicialLLT<SparseMatrix> llt(aii);
    if (llt.info() != Eigen::Success) throw std::runtime_error("standardHarmonicExtension: singular interior");
    return -llt.solve(aib * boundary);
}

}  // namespace ietidg
