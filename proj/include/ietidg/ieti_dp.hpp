#pragma once

/// Dual-primal tearing and interconnecting for the patch-local dG systems.
///
/// The skeleton of patch k is its enriched space without interior dofs. All
/// skeletons are concatenated in patch order to form the global vector space
/// the jump matrix acts on.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ietidg/dg_assembly.hpp"
#include "ietidg/local_solvers.hpp"
#include "ietidg/pcg.hpp"

namespace ietidg {

/// Choice of primal dofs: vertex values (A), edge averages (B) or both (C).
enum class Algorithm { A, B, C };

Algorithm parseAlgorithm(const std::string& name);
const char* toString(Algorithm alg) noexcept;

inline bool usesVertices(Algorithm a) noexcept { return a != Algorithm::B; }
inline bool usesEdges(Algorithm a) noexcept { return a != Algorithm::A; }

/// Start of each patch's skeleton in the global skeleton vector.
std::vector<int> skeletonOffsets(const std::vector<EnrichedSpaceLayout>& layouts);

/// Signed Boolean constraint matrix; each row is w[plus] - w[minus] = 0.
class JumpMatrix {
public:
    struct Row {
        int plus;
        int minus;
        bool corner;  ///< row between two artificial copies of a corner function
    };

    JumpMatrix(std::vector<Row> rows, int cols);

    int rows() const noexcept { return static_cast<int>(rows_.size()); }
    int cols() const noexcept { return cols_; }
    const std::vector<Row>& entries() const noexcept { return rows_; }
    const SparseMatrix& matrix() const noexcept { return b_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& w) const;
    Eigen::VectorXd applyTranspose(const Eigen::VectorXd& lambda) const;

private:
    std::vector<Row> rows_;
    int cols_;
    SparseMatrix b_;
};

/// Edge rows for every own side dof against the neighbor's copy, in the order
/// patch k, neighbor l ascending, side dof. Vertex-based algorithms omit rows
/// of corner functions; algorithm B adds rows between the two copies of each
/// corner function whose corner lies between two glued sides.
JumpMatrix buildJumpMatrix(const Discretization& disc, const std::vector<EnrichedSpaceLayout>& layouts,
                           Algorithm alg);

/// Multiplicity scaling d_ii = 1 + number of rows touching dof i.
Eigen::VectorXd buildScaling(const JumpMatrix& b);

struct PrimalDof {
    enum class Kind { Vertex, EdgeAverage };
    Kind kind = Kind::Vertex;
    int owner = 0;       ///< patch whose function is constrained
    Corner corner{};     ///< vertex dofs
    int glue = -1;       ///< edge dofs
    int vertex = -1;     ///< vertex dofs: index into the topology vertex table
};

/// Constraint rows of one patch on its skeleton. Row i evaluates the nodal
/// functional of primal dof `primal[i]` times `scale[i]` (1 for vertex
/// values, the edge length for averages, whose rows are edge integrals).
struct PatchConstraints {
    Eigen::MatrixXd c;
    std::vector<int> primal;
    std::vector<double> scale;
};

struct PrimalProgram {
    std::vector<PrimalDof> dofs;
    std::vector<PatchConstraints> patches;
};

/// Constraint matrices of all patches. Linearly dependent rows are removed
/// together with primal dofs that lose all their rows; throws if a primal dof
/// loses only some.
PrimalProgram buildConstraints(const Discretization& disc, const std::vector<EnrichedSpaceLayout>& layouts,
                               Algorithm alg);

/// Integrals over the edge of the traces of patch k's functions on `side`,
/// indexed like sideDofs(side). Uses k's geometry.
Eigen::VectorXd edgeIntegrals(const Discretization& disc, int k, Side side);

struct SolverOptions {
    Algorithm algorithm = Algorithm::C;
    AssemblyOptions assembly;
};

class IetiDpSolver {
public:
    IetiDpSolver(const Discretization& disc, const Source& f, const SolverOptions& opts = {});

    const Discretization& discretization() const noexcept { return *disc_; }
    Algorithm algorithm() const noexcept { return opts_.algorithm; }
    int numPatches() const noexcept { return static_cast<int>(locals_.size()); }
    const LocalSystem& local(int k) const { return locals_[k]; }
    const std::vector<LocalSystem>& locals() const noexcept { return locals_; }
    std::vector<EnrichedSpaceLayout> layouts() const;
    const PatchSchur& schur(int k) const { return *schur_[k]; }
    const std::vector<int>& skeletonOffsets() const noexcept { return skel_offsets_; }
    int skeletonSize() const noexcept { return skel_offsets_.back(); }
    const JumpMatrix& jump() const noexcept { return *jump_; }
    const Eigen::VectorXd& scaling() const noexcept { return scaling_; }
    const PrimalProgram& primal() const noexcept { return primal_; }
    int numPrimal() const noexcept { return static_cast<int>(primal_.dofs.size()); }
    int numMultipliers() const noexcept { return jump_->rows(); }

    /// Primal basis on patch k, one column per global primal dof.
    Eigen::MatrixXd psi(int k) const;
    /// Global primal basis (skeleton size x number of primal dofs).
    Eigen::MatrixXd psi() const;
    const Eigen::MatrixXd& primalSchur() const noexcept { return s_pi_; }

    /// Smallest eigenvalue of S^(k) relative to its largest one.
    double localCoercivity(int k) const { return local_min_ratio_[k]; }
    /// Index of the first patch with an indefinite local form, or -1.
    int firstIndefinitePatch(double tol = 1e-9) const;

    /// Block-diagonal S and the reduced load g on the global skeleton.
    Eigen::VectorXd applyS(const Eigen::VectorXd& w) const;
    const Eigen::VectorXd& reducedLoad() const noexcept { return g_; }

    /// w = S-tilde^{-1} x: the dual part from the constrained local solves
    /// plus the primal correction.
    Eigen::VectorXd solveTilde(const Eigen::VectorXd& x) const;
    Eigen::VectorXd applyF(const Eigen::VectorXd& lambda) const;
    Eigen::VectorXd applyPreconditioner(const Eigen::VectorXd& r) const;
    const Eigen::VectorXd& rhs() const noexcept { return d_; }

    /// Skeleton solution w = S-tilde^{-1}(g - B^T lambda).
    Eigen::VectorXd recoverSkeleton(const Eigen::VectorXd& lambda) const;
    /// Global base coefficients (interiors recovered), numbered by globalOffsets.
    Eigen::VectorXd recoverSolution(const Eigen::VectorXd& lambda) const;

    struct Result {
        Eigen::VectorXd lambda;
        Eigen::VectorXd solution;
        PcgReport report;
    };
    Result solve(const PcgOptions& opts = {}) const;

private:
    const Discretization* disc_;
    SolverOptions opts_;
    std::vector<LocalSystem> locals_;
    std::vector<std::unique_ptr<PatchSchur>> schur_;
    std::vector<int> skel_offsets_;
    std::optional<JumpMatrix> jump_;
    Eigen::VectorXd scaling_;
    PrimalProgram primal_;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> saddle_;
    std::vector<Eigen::MatrixXd> psi_local_;  ///< columns follow primal_.patches[k].primal
    Eigen::MatrixXd s_pi_;
    Eigen::LLT<Eigen::MatrixXd> s_pi_llt_;
    Eigen::VectorXd g_;
    std::vector<double> local_min_ratio_;
    Eigen::VectorXd d_;
};

}  // namespace ietidg
