#pragma once

#include <string>
#include <vector>

#include "fissure/solver.hpp"

namespace fissure {

struct SweepConfig {
    std::string geometry_path;
    FissuredMedium medium;
    ProblemData data;
    std::vector<double> eps;  // strictly decreasing, in (0, 1]
    double target_h = 0.05;
    int refinements = 0;
    std::string output_dir;   // empty: no files written
    double tol = 1e-10;
    unsigned threads = 0;     // 0: one task per eps
};

// "key = value" lines; '#' starts a comment. Relative geometry paths resolve against base_dir.
SweepConfig parse_sweep_config(const std::string& text, const std::string& base_dir = ".");
SweepConfig load_sweep_config(const std::string& path);

struct ReportRow {
    double eps = 0.0;
    double err_u1_L2 = 0.0;
    double err_eu2_L2 = 0.0;
    double err_p1_H1 = 0.0;
    double err_p2_H1 = 0.0;
    double ratio_tau_n = 0.0;
    double eta_L2 = 0.0;
    double beta_h = 0.0;
    std::string status = "ok";

    // boundedness diagnostics of the eps-solution itself
    double u1_L2 = 0.0;
    double eu2_L2 = 0.0;
    double p1_H1 = 0.0;
    double p2_H1 = 0.0;
    double dz_p2_L2 = 0.0;
    double div_u1_L2 = 0.0;
};

struct ConvergenceReport {
    std::vector<ReportRow> rows;
    double limit_tangential_L2 = 0.0;  // ||u_tau|| of the limit solution
    double limit_beta_h = 0.0;
    int velocity_unknowns = 0;
    int pressure_unknowns = 0;
    bool complete = true;
};

// Builds one mesh, solves the limit problem once and every eps-problem concurrently.
// On failure the partial report (with failure rows) is written before the error propagates.
ConvergenceReport run_sweep(const SweepConfig& config, ConvergenceReport* partial = nullptr);

void emit_report(const ConvergenceReport& report, const std::string& dir);
ConvergenceReport read_report(const std::string& dir);

// Trend of one error column across the eps list.
struct ColumnTrend {
    bool non_increasing = true;
    bool plateau = false;   // some successive ratio above 0.9
    double final_over_initial = 0.0;
    std::vector<double> rates;  // log(e_k/e_{k+1}) / log(eps_k/eps_{k+1})
};

ColumnTrend analyze_column(const std::vector<double>& eps, const std::vector<double>& err);

struct ManufacturedCase {
    std::string name;
    RawMedium geometry;
    ProblemData data;
    bool limit = false;  // the exact fields solve the limit problem (else every eps-problem)
    Expr p_rock, u_rock_x, u_rock_z;
    Expr p_fissure, u_tau;  // manifold fields, functions of x
};

ManufacturedCase manufactured_case(const std::string& name);
std::vector<std::string> manufactured_case_names();

struct ManufacturedErrors {
    double u_rock_L2 = 0.0;
    double p_rock_L2 = 0.0;
    double p_fissure_L2 = 0.0;
    double u_tau_L2 = 0.0;
};

ManufacturedErrors manufactured_errors(const SolutionField& sol, const ManufacturedCase& mc);

}  // namespace fissure
