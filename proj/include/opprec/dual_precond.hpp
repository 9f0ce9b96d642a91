#pragma once

#include "opprec/mlop.hpp"
#include "opprec/spectral.hpp"

#include <Eigen/SparseCore>

namespace opprec {

struct PrecondConfig {
    double s = 0.5;
    int d = 2;
    double beta = 5.3;
};

/// Operator preconditioner for piecewise constant trial spaces:
///
///   G = D^{-1} (p^T B^S p + q^T B^B q) D^{-1},
///
/// D = diag |T|, (p)_{nu T} = 1/d_{T,nu} for interior vertices nu of T,
/// (q)_{T'T} = delta - 1/(d+1) sum_{shared interior nu} 1/d_{T,nu},
/// B^B = beta D^{1-2s/d}. Vectors are indexed by the leaves in forest order.
class Preconditioner {
public:
    Preconditioner(const LevelHierarchy& hierarchy, const PrecondConfig& config);

    const PrecondConfig& config() const { return config_; }
    Eigen::Index size() const { return D_diag_.size(); }

    const Eigen::VectorXd& D_diag() const { return D_diag_; }
    const Eigen::SparseMatrix<double>& p() const { return p_; }
    const Eigen::SparseMatrix<double>& q() const { return q_; }
    const Eigen::VectorXd& BB_diag() const { return BB_diag_; }
    const MultiLevelOperator& BS() const { return BS_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& r, std::uint64_t* flops = nullptr) const;
    /// D^{-1} p^T B^S p D^{-1} r
    Eigen::VectorXd apply_multilevel(const Eigen::VectorXd& r) const;
    /// D^{-1} q^T B^B q D^{-1} r, with B^B taken for beta = `beta`.
    Eigen::VectorXd apply_bubble(const Eigen::VectorXd& r, double beta) const;

    /// G as a dense matrix, with B^S from the dense oracle. Test oracle.
    Eigen::MatrixXd dense() const;

private:
    void check_size(const Eigen::VectorXd& r) const;

    PrecondConfig config_;
    MultiLevelOperator BS_;
    Eigen::VectorXd D_diag_;
    Eigen::SparseMatrix<double> p_;
    Eigen::SparseMatrix<double> q_;
    Eigen::VectorXd bubble_weight_;  // |T|^{1-2s/d}
    Eigen::VectorXd BB_diag_;
};

/// beta equalizing the spectral radii of the two summands of G A:
/// rho(D^-1 p^T B^S p D^-1 A) / rho(D^-1 q^T D^{1-2s/d} q D^-1 A).
/// Throws SingularOperand if either radius vanishes.
double calibrate_beta(const Preconditioner& prec, const LinearOperator& A,
                      const LanczosOptions& options = default_lanczos_options());

} // namespace opprec
