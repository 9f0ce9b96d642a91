#include "opprec/dual_precond.hpp"

#include <cmath>

namespace opprec {

Preconditioner::Preconditioner(const LevelHierarchy& hierarchy, const PrecondConfig& config)
    : config_(config), BS_(hierarchy, config.s, config.d)
{
    if (!(config.beta > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "beta must be positive");
    }
    const MeshForest& forest = hierarchy.forest();
    const LevelMesh& leaf = hierarchy.leaf_level();
    const auto nt = static_cast<Eigen::Index>(leaf.elements.size());
    const auto nv = static_cast<Eigen::Index>(leaf.interior_vertex_ids.size());
    const double exponent = 1.0 - 2.0 * config.s / config.d;

    D_diag_.resize(nt);
    bubble_weight_.resize(nt);
    std::vector<Eigen::Triplet<double>> pt;
    // element lists per interior vertex, for q
    std::vector<std::vector<Eigen::Index>> around(static_cast<std::size_t>(nv));
    for (Eigen::Index t = 0; t < nt; ++t) {
        const auto& n = forest.node(leaf.elements[static_cast<std::size_t>(t)]);
        D_diag_[t] = n.area;
        bubble_weight_[t] = std::pow(n.area, exponent);
        for (Index v : n.vertex_ids) {
            const Index s = leaf.interior_slot(v);
            if (s != kNone) {
                pt.emplace_back(s, t, 1.0 / leaf.valence_of(v));
                around[static_cast<std::size_t>(s)].push_back(t);
            }
        }
    }
    p_.resize(nv, nt);
    p_.setFromTriplets(pt.begin(), pt.end());

    std::vector<Eigen::Triplet<double>> qt;
    for (Eigen::Index t = 0; t < nt; ++t) {
        qt.emplace_back(t, t, 1.0);
    }
    const double share = 1.0 / (config.d + 1);
    for (Eigen::Index s = 0; s < nv; ++s) {
        const double w = share / leaf.valence_of(leaf.interior_vertex_ids[static_cast<std::size_t>(s)]);
        for (Eigen::Index a : around[static_cast<std::size_t>(s)]) {
            for (Eigen::Index b : around[static_cast<std::size_t>(s)]) {
                qt.emplace_back(a, b, -w);  // duplicates are summed
            }
        }
    }
    q_.resize(nt, nt);
    q_.setFromTriplets(qt.begin(), qt.end());
    q_.prune(0.0);
    BB_diag_ = config.beta * bubble_weight_;
}

void Preconditioner::check_size(const Eigen::VectorXd& r) const
{
    if (r.size() != size()) {
        throw Error(ErrorCode::SizeMismatch,
                    "expected " + std::to_string(size()) + " element values, got " + std::to_string(r.size()));
    }
}

Eigen::VectorXd Preconditioner::apply(const Eigen::VectorXd& r, std::uint64_t* flops) const
{
    check_size(r);
    const Eigen::VectorXd x = r.cwiseQuotient(D_diag_);
    const Eigen::VectorXd ml = p_.transpose() * BS_.apply(p_ * x, flops);
    const Eigen::VectorXd bub = q_.transpose() * BB_diag_.cwiseProduct(q_ * x);
    if (flops != nullptr) {
        // two divisions, two products with p and q each, one diagonal scaling, one sum
        *flops += static_cast<std::uint64_t>(4 * p_.nonZeros() + 4 * q_.nonZeros() + 4 * size());
    }
    return (ml + bub).cwiseQuotient(D_diag_);
}

Eigen::VectorXd Preconditioner::apply_multilevel(const Eigen::VectorXd& r) const
{
    check_size(r);
    const Eigen::VectorXd x = r.cwiseQuotient(D_diag_);
    return (p_.transpose() * BS_.apply(p_ * x)).cwiseQuotient(D_diag_);
}

Eigen::VectorXd Preconditioner::apply_bubble(const Eigen::VectorXd& r, double beta) const
{
    check_size(r);
    const Eigen::VectorXd x = r.cwiseQuotient(D_diag_);
    return (q_.transpose() * (beta * bubble_weight_).cwiseProduct(q_ * x)).cwiseQuotient(D_diag_);
}

Eigen::MatrixXd Preconditioner::dense() const
{
    const Eigen::MatrixXd B = assemble_BS_dense(BS_);
    const Eigen::MatrixXd P = Eigen::MatrixXd(p_);
    const Eigen::MatrixXd Q = Eigen::MatrixXd(q_);
    Eigen::MatrixXd inner = P.transpose() * B * P + Q.transpose() * BB_diag_.asDiagonal() * Q;
    const Eigen::VectorXd dinv = D_diag_.cwiseInverse();
    inner = dinv.asDiagonal() * inner * dinv.asDiagonal();
    return 0.5 * (inner + inner.transpose());
}

double calibrate_beta(const Preconditioner& prec, const LinearOperator& A, const LanczosOptions& options)
{
    const auto n = prec.size();
    const SpectralResult ml =
        lanczos_max(A, [&](const Eigen::VectorXd& r) { return prec.apply_multilevel(r); }, n, options);
    const SpectralResult bub =
        lanczos_max(A, [&](const Eigen::VectorXd& r) { return prec.apply_bubble(r, 1.0); }, n, options);
    require_converged(ml);
    require_converged(bub);
    if (!(ml.lambda_max > 0.0) || !(bub.lambda_max > 0.0)) {
        throw Error(ErrorCode::SingularOperand, "vanishing spectral radius in beta calibration");
    }
    return ml.lambda_max / bub.lambda_max;
}

} // namespace opprec
