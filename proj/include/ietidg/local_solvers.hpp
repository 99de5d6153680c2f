#pragma once

/// Interior elimination on one enriched patch system.
///
/// Enriched dofs are ordered interior first, so the skeleton index of an
/// enriched dof i >= N_I is i - N_I.

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "ietidg/dg_assembly.hpp"

namespace ietidg {

class PatchSchur {
public:
    /// Factors A_II and forms the dense Schur complement.
    explicit PatchSchur(const LocalSystem& sys);

    int numInterior() const noexcept { return ni_; }
    int skeletonSize() const noexcept { return ns_; }

    /// A_II^{-1} b.
    Eigen::VectorXd solveInterior(const Eigen::VectorXd& b) const;
    /// S w, matrix-free.
    Eigen::VectorXd apply(const Eigen::VectorXd& w) const;
    /// Dense S.
    const Eigen::MatrixXd& dense() const noexcept { return s_; }
    /// g = f_G - A_GI A_II^{-1} f_I.
    Eigen::VectorXd reducedLoad(const Eigen::VectorXd& load) const;
    /// u_I = -A_II^{-1} A_IG w (discrete harmonic extension).
    Eigen::VectorXd harmonicExtension(const Eigen::VectorXd& w) const;
    /// u_I = A_II^{-1} (f_I - A_IG w).
    Eigen::VectorXd recoverInterior(const Eigen::VectorXd& w, const Eigen::VectorXd& load) const;
    /// Full enriched vector (u_I, w).
    Eigen::VectorXd extend(const Eigen::VectorXd& w, const Eigen::VectorXd& load) const;

private:
    int ni_ = 0;
    int ns_ = 0;
    SparseMatrix aii_, aig_, agg_;
    Eigen::SimplicialLLT<SparseMatrix> llt_;
    Eigen::MatrixXd s_;
};

/// Standard harmonic extension on the base space: interior values with
/// a^(k)(u, v) = 0 for all interior v, given the base boundary values.
Eigen::VectorXd standardHarmonicExtension(const LocalSystem& sys, const Eigen::VectorXd& boundary);

}  // namespace ietidg
