#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "aoinet/simcore.hpp"

namespace aoinet {

namespace exit_code {
constexpr int ok = 0;
constexpr int validation = 1;
constexpr int usage = 2;
} // namespace exit_code

/// Thrown for bad command-line input (maps to exit_code::usage).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fixed CSV number format: 6 significant digits.
std::string format_number(double value);

/// A one-parameter grid, parsed from "param=start:stop:step". Parameters are
/// `lambda.<class>` or `mu.<node>`; the bare forms are accepted when the
/// network has a single class or node.
struct SweepGrid {
    std::string param;
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;

    static SweepGrid parse(std::string_view text);
    std::vector<double> points() const;
    /// Copy of `net` with the swept parameter set to `value`.
    NetworkSpec apply(const NetworkSpec& net, double value) const;
};

/// Rates 0.01, 0.02, ..., 0.99 used by the reproduction commands.
std::vector<double> reproduction_grid();

/// Boundary stand-in for a vanishing second class.
inline constexpr double kBoundaryRate = 1e-9;

struct TandemMinimum {
    int n = 0;
    double lambda = 0.0;
    double h = 0.0;
};

struct TandemSummary {
    std::vector<TandemMinimum> minima; // n = 1, 2, 5, 10
    double saturation_gap = 0.0;       // n=10 minus n=1 at rho = 0.99
};

struct TwoClassSummary {
    double boundary_min_h_alpha = 0.0;
    double boundary_lambda_a = 0.0;
    double interior_min_h_alpha = 0.0;
    double interior_lambda_a = 0.0;
    double interior_lambda_b = 0.0;
    double min_sum = 0.0;
    double sum_lambda_a = 0.0;
    double sum_lambda_b = 0.0;
    double sum_h_alpha = 0.0;
    double sum_h_beta = 0.0;
};

/// Tandem sweep (mu = 1) over reproduction_grid().
TandemSummary tandem_summary();
/// Two-class sweep (all mu = 1) over reproduction_grid() squared.
TwoClassSummary two_class_summary();

int cmd_validate(const std::string& spec_path, std::ostream& out, std::ostream& err);
int cmd_analyze(const std::string& spec_path, std::ostream& out, std::ostream& err);
/// `trace`, when non-null, receives `class,gen_time,exit_time` lines.
int cmd_simulate(const std::string& spec_path, const SimConfig& cfg, std::ostream& out, std::ostream& err,
                 std::ostream* trace = nullptr);
int cmd_sweep(const std::string& spec_path, const SweepGrid& grid, bool simulate, const SimConfig& cfg,
              std::ostream& out, std::ostream& err);
/// figure: fig3 | fig5a | fig5b | all.
int cmd_reproduce(const std::string& figure, const std::string& out_dir, std::ostream& out, std::ostream& err);

} // namespace aoinet
