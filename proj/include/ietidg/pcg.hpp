#pragma once

/// Preconditioned conjugate gradients with a Lanczos condition estimate.

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace ietidg {

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct PcgOptions {
    double tol = 1e-6;
    int max_iter = 500;
    std::uint64_t seed = 42;
    /// Start from a random vector with entries in [-1, 1]; zero otherwise.
    bool random_start = true;
    /// Stop on the preconditioned residual sqrt(r.z) instead of |r|_2.
    bool preconditioned_residual = false;
};

struct PcgReport {
    int iterations = 0;
    bool converged = false;
    /// Non-positive curvature or preconditioner product encountered.
    bool breakdown = false;
    std::vector<double> residuals;  ///< relative to the right-hand side, one per iterate
    double lambda_min = 1.0;
    double lambda_max = 1.0;
    double kappa = 1.0;
};

struct PcgResult {
    Eigen::VectorXd x;  // smallest-residual iterate when not converged
    PcgReport report;
};

/// Entries (x >> 11) * 2^-53 of a mt19937_64 stream mapped to [-1, 1].
Eigen::VectorXd randomVector(int n, std::uint64_t seed);

/// Extreme eigenvalues of the Lanczos matrix built from PCG step lengths
/// alpha_k and update ratios beta_k.
struct RitzBounds {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
};
RitzBounds lanczosRitzValues(const std::vector<double>& alpha, const std::vector<double>& beta);

/// Solves a x = b; stops when the residual is below tol |b|_2.
PcgResult pcg(const LinearOperator& a, const LinearOperator& precond, const Eigen::VectorXd& b,
              const PcgOptions& opts = {});

}  // namespace ietidg
