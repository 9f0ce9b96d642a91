#include "opprec/experiment.hpp"

#include "opprec/dual_precond.hpp"
#include "opprec/galerkin.hpp"
#include "opprec/meshes.hpp"
#include "opprec/transfer.hpp"

#include <json.hpp>

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace opprec {

namespace {

using Clock = std::chrono::steady_clock;

// Median over `samples` of the time per call; each sample repeats the call
// until it has run for at least ~2 ms. One warm-up call first.
double median_seconds(const std::function<void()>& fn, int samples)
{
    fn();
    std::vector<double> times;
    for (int k = 0; k < std::max(samples, 10); ++k) {
        int reps = 0;
        const auto t0 = Clock::now();
        double elapsed = 0.0;
        do {
            fn();
            ++reps;
            elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
        } while (elapsed < 2e-3);
        times.push_back(elapsed / reps);
    }
    std::nth_element(times.begin(), times.begin() + static_cast<long>(times.size() / 2), times.end());
    return times[times.size() / 2];
}

LinearOperator dense_op(const Eigen::MatrixXd& M)
{
    return [&M](const Eigen::VectorXd& x) -> Eigen::VectorXd { return M * x; };
}

double max_relative_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

template <typename Apply>
Eigen::MatrixXd matrix_of(Eigen::Index n, Apply&& apply)
{
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        M.col(c) = apply(Eigen::VectorXd::Unit(n, c));
    }
    return M;
}

constexpr std::size_t kDenseCheckTriangles = 200;

} // namespace

int rounds_per_row(Refinement r)
{
    return r == Refinement::Uniform ? 2 : 8;
}

void validate(const ExperimentSpec& spec)
{
    auto bad = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
    if (spec.levels < 1) {
        bad("levels must be at least 1");
    }
    if (!(spec.s >= 0.0 && spec.s <= 1.0)) {
        bad("s must lie in [0, 1]");
    }
    if (spec.beta && !(*spec.beta > 0.0)) {
        bad("beta must be positive");
    }
    if (spec.refinement == Refinement::Corners && spec.geometry != Geometry::Cube) {
        bad("corner refinement requires the cube geometry");
    }
    if ((spec.op == OperatorKind::Stiffness || spec.op == OperatorKind::Mass) && spec.geometry != Geometry::UnitSquare) {
        bad("stiffness and mass operators require the unit_square geometry");
    }
    if (spec.op == OperatorKind::SingleLayer && spec.geometry != Geometry::Cube) {
        bad("the single layer operator requires the closed cube surface");
    }
}

double run_experiment(const ExperimentSpec& spec, const std::function<void(const ReportRow&)>& on_row)
{
    validate(spec);
    SingleLayerOptions sl;
    sl.threads = spec.threads;
    const bool cube = spec.geometry == Geometry::Cube;

    double beta = spec.beta.value_or(0.0);
    if (!spec.beta) {
        if (!cube) {
            beta = 5.3;  // unused: the unit square rows only involve B^S
        } else {
            // Calibration mesh: four uniform bisection rounds, 192 triangles.
            auto f = MeshForest::build_initial(cube_surface());
            f.refine_uniform(4);
            auto h = LevelHierarchy::extract(f);
            const Eigen::MatrixXd A = assemble_single_layer(f, sl);
            beta = calibrate_beta(Preconditioner(h, {spec.s, 2, 1.0}), dense_op(A));
        }
    }

    auto forest = MeshForest::build_initial(cube ? cube_surface() : unit_square(true));
    for (int row = 0; row < spec.levels; ++row) {
        if (row > 0) {
            if (spec.refinement == Refinement::Uniform) {
                forest.refine_uniform(rounds_per_row(spec.refinement));
            } else {
                refine_corners(forest, rounds_per_row(spec.refinement));
            }
        }
        const auto h = LevelHierarchy::extract(forest);
        ReportRow r;
        r.h_min = min_diameter(forest);

        if (cube) {
            const Preconditioner G(h, {spec.s, 2, beta});
            r.dofs = static_cast<long>(G.size());
            const Eigen::VectorXd probe = Eigen::VectorXd::Ones(G.size());
            Eigen::VectorXd sink;
            r.sec_per_dof = median_seconds([&] { sink = G.apply(probe); }, spec.timing_samples) /
                            static_cast<double>(r.dofs);
            if (spec.op == OperatorKind::SingleLayer) {
                const Eigen::MatrixXd A = assemble_single_layer(forest, sl);
                const auto I = [](const Eigen::VectorXd& x) { return x; };
                r.kappa_A = require_converged(lanczos_condition(dense_op(A), I, A.rows())).kappa;
                r.kappa_GA = require_converged(lanczos_condition(
                                                   dense_op(A), [&](const Eigen::VectorXd& x) { return G.apply(x); },
                                                   A.rows()))
                                 .kappa;
            }
            if (spec.dense_check && forest.num_leaves() <= kDenseCheckTriangles) {
                const Eigen::MatrixXd fast = matrix_of(G.size(), [&](const Eigen::VectorXd& x) { return G.apply(x); });
                r.dense_deviation = max_relative_deviation(G.dense(), fast);
            }
        } else {
            const MultiLevelOperator B(h, spec.s);
            r.dofs = static_cast<long>(B.size());
            const Eigen::VectorXd probe = Eigen::VectorXd::Ones(B.size());
            Eigen::VectorXd sink;
            r.sec_per_dof = median_seconds([&] { sink = B.apply(probe); }, spec.timing_samples) /
                            static_cast<double>(std::max<long>(r.dofs, 1));
            if (spec.op == OperatorKind::Stiffness || spec.op == OperatorKind::Mass) {
                const Eigen::SparseMatrix<double> K = spec.op == OperatorKind::Stiffness
                                                          ? assemble_stiffness(h.leaf_level(), forest)
                                                          : assemble_mass(h.leaf_level(), forest);
                const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
                if (solver.info() != Eigen::Success) {
                    throw Error(ErrorCode::SingularOperand, "FEM matrix factorization failed");
                }
                const auto Kop = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return K * x; };
                const auto I = [](const Eigen::VectorXd& x) { return x; };
                r.kappa_A = require_converged(lanczos_condition(Kop, I, K.rows())).kappa;
                // spectrum of K^{-1} B^S: equivalence of the multilevel form with the FEM norm
                r.kappa_GA = require_converged(lanczos_condition(
                                                   [&](const Eigen::VectorXd& x) { return B.apply(x); },
                                                   [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
                                                       return solver.solve(x);
                                                   },
                                                   B.size()))
                                 .kappa;
            }
            if (spec.dense_check && forest.num_leaves() <= kDenseCheckTriangles) {
                const Eigen::MatrixXd fast = matrix_of(B.size(), [&](const Eigen::VectorXd& x) { return B.apply(x); });
                r.dense_deviation = max_relative_deviation(assemble_BS_dense(B), fast);
            }
        }
        on_row(r);
    }
    return beta;
}

std::string format_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, std::ostream& out)
{
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    if (format == ReportFormat::Csv) {
        out << "dofs,h_min,kappa_A,kappa_GA,sec_per_dof\n";
        for (const auto& r : rows) {
            out << r.dofs << ',' << format_number(r.h_min) << ',' << opt(r.kappa_A) << ',' << opt(r.kappa_GA) << ','
                << format_number(r.sec_per_dof) << '\n';
        }
    } else {
        // numbers go through the same 6-digit formatting as the CSV
        auto num = [](double v) { return nlohmann::json::parse(format_number(v)); };
        auto onum = [&](const std::optional<double>& v) { return v ? num(*v) : nlohmann::json(nullptr); };
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json o;
            o["dofs"] = r.dofs;
            o["h_min"] = num(r.h_min);
            o["kappa_A"] = onum(r.kappa_A);
            o["kappa_GA"] = onum(r.kappa_GA);
            o["sec_per_dof"] = num(r.sec_per_dof);
            if (r.dense_deviation) {
                o["dense_deviation"] = num(*r.dense_deviation);
            }
            arr.push_back(o);
        }
        out << arr.dump(2) << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoFailure, "report write failed");
    }
}

void emit_report_file(const std::vector<ReportRow>& rows, ReportFormat format, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path);
    }
    emit_report(rows, format, out);
}

std::vector<ReportRow> parse_json_report(const std::string& text)
{
    std::vector<ReportRow> rows;
    try {
        for (const auto& o : nlohmann::json::parse(text)) {
            ReportRow r;
            r.dofs = o.at("dofs").get<long>();
            r.h_min = o.at("h_min").get<double>();
            auto opt = [&](const char* key) -> std::optional<double> {
                if (!o.contains(key) || o.at(key).is_null()) {
                    return std::nullopt;
                }
                return o.at(key).get<double>();
            };
            r.kappa_A = opt("kappa_A");
            r.kappa_GA = opt("kappa_GA");
            r.sec_per_dof = o.at("sec_per_dof").get<double>();
            r.dense_deviation = opt("dense_deviation");
            rows.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::IoFailure, std::string("bad JSON report: ") + e.what());
    }
    return rows;
}

} // namespace opprec
