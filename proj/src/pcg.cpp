#include "ietidg/pcg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace ietidg {

Eigen::VectorXd randomVector(int n, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        v[i] = 2.0 * u - 1.0;
    }
    return v;
}

RitzBounds lanczosRitzValues(const std::vector<double>& alpha, const std::vector<double>& beta)
{
    const int m = static_cast<int>(alpha.size());
    if (m == 0) return {};
    Eigen::VectorXd diag(m), off(std::max(m - 1, 0));
    for (int j = 0; j < m; ++j) {
        diag[j] = 1.0 / alpha[j];
        if (j > 0) diag[j] += beta[j - 1] / alpha[j - 1];
        if (j + 1 < m) off[j] = std::sqrt(beta[j]) / alpha[j];
    }
    if (m == 1) return {diag[0], diag[0]};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

PcgResult pcg(const LinearOperator& a, const LinearOperator& precond, const Eigen::VectorXd& b,
              const PcgOptions& opts)
{
    PcgResult res;
    const int n = static_cast<int>(b.size());
    const double bnorm = b.norm();
    res.x = Eigen::VectorXd::Zero(n);
    if (n == 0 || bnorm == 0.0) {
        res.report.converged = true;
        res.report.residuals.push_back(0.0);
        return res;
    }
    if (opts.random_start) res.x = randomVector(n, opts.seed);

    Eigen::VectorXd r = b - a(res.x);
    Eigen::VectorXd z = precond(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double rz0 = std::sqrt(std::abs(b.dot(precond(b))));
    auto measure = [&](double rz_now) {
        return opts.preconditioned_residual ? std::sqrt(std::abs(rz_now)) / rz0 : r.norm() / bnorm;
    };

    std::vector<double> alpha, beta;
    double rel = measure(rz);
    res.report.residuals.push_back(rel);
    Eigen::VectorXd best = res.x;
    double best_rel = rel;
    while (rel > opts.tol && res.report.iterations < opts.max_iter) {
        const Eigen::VectorXd ap = a(p);
        const double pap = p.dot(ap);
        if (!(pap > 0.0) || !(rz > 0.0)) {
            res.report.breakdown = true;
            break;
        }
        const double al = rz / pap;
        res.x += al * p;
        r -= al * ap;
        z = precond(r);
        const double rz_new = r.dot(z);
        const double be = rz_new / rz;
        alpha.push_back(al);
        beta.push_back(be);
        rz = rz_new;
        p = z + be * p;
        ++res.report.iterations;
        rel = measure(rz);
        res.report.residuals.push_back(rel);
        if (rel < best_rel) {
            best_rel = rel;
            best = res.x;
        }
    }
    res.report.converged = rel <= opts.tol;
    // past the attainable accuracy the recursive residual can drift upward
    if (!res.report.converged) res.x = std::move(best);
    const RitzBounds rb = lanczosRitzValues(alpha, beta);
    res.report.lambda_min = rb.lambda_min;
    res.report.lambda_max = rb.lambda_max;
    res.report.kappa = alpha.empty() ? 1.0 : rb.lambda_max / rb.lambda_min;
    return res;
}

}  // namespace ietidg
