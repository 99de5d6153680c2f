#pragma once

/// Experiment driver: refinement protocol, IETI-DP solve, oracle checks and
/// table output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ietidg/domains.hpp"
#include "ietidg/ieti_dp.hpp"

namespace ietidg {

/// f = 2 pi^2 sin(pi x) sin(pi y).
double sineSource(const Eigen::Vector2d& x);
/// u = sin(pi x) sin(pi y).
double sineSolution(const Eigen::Vector2d& x);

struct ExperimentConfig {
    std::string domain = "square-2x2";
    int p = 2;
    int r = 2;
    Algorithm alg = Algorithm::C;
    double delta = 4.0;
    int disparity = 0;
    double tol = 1e-6;
    int max_iter = 500;
    std::uint64_t seed = 42;
    bool oracle = false;
    bool preconditioned_residual = false;
};

struct OracleReport {
    double dg_difference = 0.0;   ///< relative dG-norm distance to the monolithic solution
    double kappa_lanczos = 1.0;
    double kappa_dense = 1.0;
    double lambda_min = 1.0;      ///< dense, on range(F)
    double lambda_max = 1.0;
    int range_dimension = 0;
    bool solution_ok = false;     ///< dg_difference <= 1e-6
    bool kappa_ok = false;        ///< within 10%
    bool passed() const noexcept { return solution_ok && kappa_ok; }
};

struct ResultRow {
    ExperimentConfig config;
    int iterations = 0;
    double kappa = 1.0;
    bool converged = false;
    int dofs = 0;
    int multipliers = 0;
    int primal = 0;
    bool coercive = true;
    std::optional<OracleReport> oracle;
    double seconds = 0.0;
};

/// Monolithic sparse solve of the dG system.
Eigen::VectorXd solveMonolithic(const GlobalDgSystem& sys);

/// Relative distance |u - v|_d / |v|_d.
double dgNormDifference(const GlobalDgSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Condition number of the preconditioned operator on range(F) from dense
/// matrices F and M (rank tolerance relative to the largest eigenvalue of F;
/// eigenvalues of M F up to kSpectrumZeroTol count as zero).
inline constexpr double kSpectrumZeroTol = 1e-8;
struct DenseSpectrum {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
    double kappa = 1.0;
    int rank = 0;
};
DenseSpectrum denseConditionNumber(const Eigen::MatrixXd& f, const Eigen::MatrixXd& m, double rank_tol = 1e-10);

/// Dense matrix of a linear operator of size n, column by column.
Eigen::MatrixXd denseOperator(const LinearOperator& op, int n);

/// PCG tolerance of the solve compared against the monolithic solution;
/// that solve starts from zero.
inline constexpr double kOracleSolveTol = 1e-10;

/// Monolithic solution check (against a re-solve at kOracleSolveTol) and the
/// dense condition number compared with the estimate of `res`.
OracleReport verifyWithOracle(const IetiDpSolver& solver, const IetiDpSolver::Result& res);

ResultRow runExperiment(const ExperimentConfig& cfg, const MultiPatchTopology& topo);
ResultRow runExperiment(const ExperimentConfig& cfg);

/// Configurations in table order: algorithm, disparity, refinement, degree.
std::vector<ExperimentConfig> expandSweep(const ExperimentConfig& base, const std::vector<Algorithm>& algs,
                                          const std::vector<int>& disparities, const std::vector<int>& refinements,
                                          const std::vector<int>& degrees);

/// L2 errors of the manufactured solution for r = r0..r1 and observed orders
/// between consecutive levels (orders[0] is unused and zero).
struct ConvergenceStudy {
    std::vector<int> levels;
    std::vector<double> errors;
    std::vector<double> orders;
};
ConvergenceStudy convergenceStudy(const MultiPatchTopology& topo, int p, int r0, int r1, Algorithm alg,
                                  double delta = 4.0, double tol = 1e-10);

/// CSV header and rows; the seconds column is filled only if `timing`.
void writeCsv(std::ostream& out, const std::vector<ResultRow>& rows, bool timing);
/// Aligned plain-text table.
void writeTable(std::ostream& out, const std::vector<ResultRow>& rows, bool timing);

}  // namespace ietidg
