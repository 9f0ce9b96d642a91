#pragma once

#include "opprec/errors.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>

namespace opprec {

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct SpectralResult {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct LanczosOptions {
    double tol = 1e-6;
    int maxit = 400;
    std::uint64_t seed = 0;
};

/// Seed for the Lanczos start vector: OPPREC_SEED if set, else 0.
std::uint64_t default_seed();

/// Options with the default tolerance, iteration limit and default_seed().
LanczosOptions default_lanczos_options();

/// Extreme eigenvalues of G A by Lanczos in the A inner product with full
/// reorthogonalization; one application of A and of G per step. Stops once
/// the residual estimate of both extreme Ritz pairs is below tol relative to
/// the Ritz value. Returns converged = false when maxit is hit; throws
/// InnerProductBreakdown on a negative A-norm.
SpectralResult lanczos_condition(const LinearOperator& A, const LinearOperator& G, Eigen::Index n,
                                 const LanczosOptions& options = default_lanczos_options());

/// Largest eigenvalue of G A (G may be only semidefinite); same recurrence,
/// convergence tested on the top Ritz pair only.
SpectralResult lanczos_max(const LinearOperator& A, const LinearOperator& G, Eigen::Index n,
                           const LanczosOptions& options = default_lanczos_options());

/// Throws NotConverged unless `r.converged`.
const SpectralResult& require_converged(const SpectralResult& r);

struct PcgResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Preconditioned CG for A x = rhs, relative residual tolerance. Throws
/// NotConverged after maxit steps.
PcgResult pcg_solve(const LinearOperator& A, const LinearOperator& G, const Eigen::VectorXd& rhs, double tol = 1e-8,
                    int maxit = 1000);

} // namespace opprec
