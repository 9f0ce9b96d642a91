#include "opprec/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>

using namespace opprec;

int main(int argc, char** argv)
{
    CLI::App app{"Multilevel operator preconditioning experiments"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "Refine a mesh and report one row per level");

    ExperimentSpec spec;
    std::string geometry = "cube", refine = "uniform", op = "single_layer", format = "csv", out, beta = "5.3";
    run->add_option("--geometry", geometry, "cube | unit_square")->check(CLI::IsMember({"cube", "unit_square"}));
    run->add_option("--refine", refine, "uniform | corners")->check(CLI::IsMember({"uniform", "corners"}));
    run->add_option("--levels", spec.levels, "Number of report rows")->check(CLI::PositiveNumber);
    run->add_option("--s", spec.s, "Sobolev order of the multilevel form")->check(CLI::Range(0.0, 1.0));
    run->add_option("--beta", beta, "Bubble weight, or 'auto' to calibrate");
    run->add_option("--operator", op, "single_layer | stiffness | mass | none")
        ->check(CLI::IsMember({"single_layer", "stiffness", "mass", "none"}));
    run->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--out", out, "Output file (default stdout)");
    run->add_option("--threads", spec.threads, "Assembly threads (0: all cores)");
    run->add_flag("--dense-check", spec.dense_check, "Compare fast and dense operators on small meshes");

    CLI11_PARSE(app, argc, argv);

    try {
        spec.geometry = geometry == "cube" ? Geometry::Cube : Geometry::UnitSquare;
        spec.refinement = refine == "uniform" ? Refinement::Uniform : Refinement::Corners;
        const std::map<std::string, OperatorKind> ops{{"single_layer", OperatorKind::SingleLayer},
                                                      {"stiffness", OperatorKind::Stiffness},
                                                      {"mass", OperatorKind::Mass},
                                                      {"none", OperatorKind::None}};
        spec.op = ops.at(op);
        if (beta == "auto") {
            spec.beta.reset();
        } else {
            try {
                spec.beta = std::stod(beta);
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidArgument, "--beta expects a number or 'auto'");
            }
        }
        const ReportFormat fmt = format == "csv" ? ReportFormat::Csv : ReportFormat::Json;

        std::vector<ReportRow> rows;
        const double used = run_experiment(spec, [&](const ReportRow& r) {
            rows.push_back(r);
            // rewrite the file after each row so a long run leaves partial results
            if (!out.empty()) {
                emit_report_file(rows, fmt, out);
            }
            std::cerr << "dofs " << r.dofs;
            if (r.dense_deviation) {
                std::cerr << "  dense deviation " << format_number(*r.dense_deviation);
            }
            std::cerr << std::endl;
        });
        if (!spec.beta) {
            std::cerr << "calibrated beta " << format_number(used) << '\n';
        }
        if (out.empty()) {
            emit_report(rows, fmt, std::cout);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::InvalidArgument ? 2 : 1;
    }
    return 0;
}
