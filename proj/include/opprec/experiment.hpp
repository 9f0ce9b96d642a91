#pragma once

#include "opprec/errors.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace opprec {

enum class Geometry { Cube, UnitSquare };
enum class Refinement { Uniform, Corners };
enum class OperatorKind { SingleLayer, Stiffness, Mass, None };
enum class ReportFormat { Csv, Json };

struct ExperimentSpec {
    Geometry geometry = Geometry::Cube;
    Refinement refinement = Refinement::Uniform;
    int levels = 5;
    double s = 0.5;
    std::optional<double> beta = 5.3;  ///< empty: calibrate
    OperatorKind op = OperatorKind::SingleLayer;
    int threads = 1;
    bool dense_check = false;
    int timing_samples = 11;
};

/// One table row; empty optionals are reported as empty fields.
struct ReportRow {
    long dofs = 0;
    double h_min = 0.0;
    std::optional<double> kappa_A;
    std::optional<double> kappa_GA;
    double sec_per_dof = 0.0;
    std::optional<double> dense_deviation;  ///< only with dense_check

    bool operator==(const ReportRow&) const = default;
};

/// Number of bisection rounds between consecutive rows: 2 for uniform
/// refinement (dofs x4), 8 marking rounds for corner refinement.
int rounds_per_row(Refinement r);

/// Throws InvalidArgument for inconsistent combinations.
void validate(const ExperimentSpec& spec);

/// Runs the experiment row by row; `on_row` sees every row as soon as it is
/// complete. Returns the beta actually used.
double run_experiment(const ExperimentSpec& spec, const std::function<void(const ReportRow&)>& on_row);

/// 6 significant digits, shortest form (e.g. 2.6e-05).
std::string format_number(double x);

void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, std::ostream& out);
void emit_report_file(const std::vector<ReportRow>& rows, ReportFormat format, const std::string& path);
std::vector<ReportRow> parse_json_report(const std::string& text);

} // namespace opprec
