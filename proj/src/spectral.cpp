#include "opprec/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

namespace opprec {

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("OPPREC_SEED"); env != nullptr && *env != '\0') {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, std::string("OPPREC_SEED is not an integer: ") + env);
        }
    }
    return 0;
}

LanczosOptions default_lanczos_options()
{
    LanczosOptions o;
    o.seed = default_seed();
    return o;
}

namespace {

enum class Ends { Both, Max };

SpectralResult lanczos(const LinearOperator& A, const LinearOperator& G, Eigen::Index n, const LanczosOptions& opt,
                       Ends ends)
{
    if (n <= 0) {
        throw Error(ErrorCode::SizeMismatch, "empty operator");
    }
    const int maxit = static_cast<int>(std::min<Eigen::Index>(opt.maxit, n));

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        w[i] = nd(rng);
    }

    Eigen::MatrixXd V(n, maxit + 1);   // A-orthonormal basis
    Eigen::MatrixXd AV(n, maxit + 1);  // A times the basis
    std::vector<double> alpha, beta;

    auto normalize_into = [&](int k, const Eigen::VectorXd& v) {
        const Eigen::VectorXd Av = A(v);
        const double nrm2 = v.dot(Av);
        if (!(nrm2 > 0.0)) {
            if (nrm2 < 0.0 || !std::isfinite(nrm2)) {
                throw Error(ErrorCode::InnerProductBreakdown, "non-positive A-norm in Lanczos");
            }
            return 0.0;
        }
        const double nrm = std::sqrt(nrm2);
        V.col(k) = v / nrm;
        AV.col(k) = Av / nrm;
        return nrm;
    };
    SpectralResult res;
    if (normalize_into(0, w) == 0.0) {
        if (ends == Ends::Max) {
            // A annihilates the start vector: report a zero radius, the caller decides.
            res.converged = true;
            return res;
        }
        throw Error(ErrorCode::InnerProductBreakdown, "A-norm of the start vector vanishes");
    }

    for (int k = 0; k < maxit; ++k) {
        w = G(AV.col(k));
        const double a = w.dot(AV.col(k));
        alpha.push_back(a);
        // Full reorthogonalization in the A inner product, twice.
        for (int pass = 0; pass < 2; ++pass) {
            w -= V.leftCols(k + 1) * (AV.leftCols(k + 1).transpose() * w);
        }

        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            T(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) {
                T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
        const Eigen::VectorXd& theta = eig.eigenvalues();

        const double b = normalize_into(k + 1, w);
        res.iterations = k + 1;
        res.lambda_min = theta[0];
        res.lambda_max = theta[m - 1];
        // Residual of the Ritz pair (theta_i, V y_i) in the A-norm is |b * y_i(last)|.
        const double r_min = std::abs(b * eig.eigenvectors()(m - 1, 0));
        const double r_max = std::abs(b * eig.eigenvectors()(m - 1, m - 1));
        bool done = r_max <= opt.tol * std::abs(res.lambda_max);
        if (ends == Ends::Both) {
            done = done && r_min <= opt.tol * std::abs(res.lambda_min);
        }
        if (done || b == 0.0 || k + 1 == n) {
            res.converged = true;
            break;
        }
        beta.push_back(b);
    }
    res.kappa = res.lambda_max / res.lambda_min;
    return res;
}

} // namespace

SpectralResult lanczos_condition(const LinearOperator& A, const LinearOperator& G, Eigen::Index n,
                                 const LanczosOptions& options)
{
    return lanczos(A, G, n, options, Ends::Both);
}

SpectralResult lanczos_max(const LinearOperator& A, const LinearOperator& G, Eigen::Index n,
                           const LanczosOptions& options)
{
    return lanczos(A, G, n, options, Ends::Max);
}

const SpectralResult& require_converged(const SpectralResult& r)
{
    if (!r.converged) {
        throw Error(ErrorCode::NotConverged,
                    "Lanczos did not converge in " + std::to_string(r.iterations) + " iterations");
    }
    return r;
}

PcgResult pcg_solve(const LinearOperator& A, const LinearOperator& G, const Eigen::VectorXd& rhs, double tol,
                    int maxit)
{
    PcgResult out;
    out.x = Eigen::VectorXd::Zero(rhs.size());
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) {
        return out;
    }
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd z = G(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (int k = 1; k <= maxit; ++k) {
        const Eigen::VectorXd Ap = A(p);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) {
            throw Error(ErrorCode::InnerProductBreakdown, "non-positive curvature in CG");
        }
        const double step = rz / pAp;
        out.x += step * p;
        r -= step * Ap;
        out.iterations = k;
        out.relative_residual = r.norm() / bnorm;
        if (out.relative_residual <= tol) {
            return out;
        }
        z = G(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw Error(ErrorCode::NotConverged, "PCG did not reach tolerance in " + std::to_string(maxit) + " iterations");
}

} // namespace opprec
