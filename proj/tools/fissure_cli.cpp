#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fissure/fissure.h"

namespace {

int fail(fsd_status st) {
    std::fprintf(stderr, "error: %s\n", fsd_last_error());
    return static_cast<int>(st);
}

void print_summary(const fsd_solve_summary& s) {
    std::printf("eps                       %.6g\n", s.eps);
    std::printf("velocity_unknowns         %d\n", s.velocity_unknowns);
    std::printf("pressure_unknowns         %d\n", s.pressure_unknowns);
    std::printf("relative_residual         %.3e\n", s.residual);
    std::printf("rock_velocity_L2          %.10g\n", s.rock_velocity_l2);
    std::printf("rock_divergence_L2        %.10g\n", s.rock_divergence_l2);
    std::printf("rock_pressure_L2          %.10g\n", s.rock_pressure_l2);
    std::printf("gamma_flux_L2             %.10g\n", s.gamma_flux_l2);
    std::printf("strip_velocity_L2         %.10g\n", s.strip_velocity_l2);
    std::printf("strip_tangential_L2       %.10g\n", s.strip_tangential_l2);
    std::printf("strip_normal_L2           %.10g\n", s.strip_normal_l2);
    std::printf("strip_pressure_L2         %.10g\n", s.strip_pressure_l2);
    std::printf("strip_pressure_H1         %.10g\n", s.strip_pressure_h1);
    if (s.eps > 0.0) std::printf("eta_L2                    %.10g\n", s.eta_l2);
    std::printf("max_conservation_residual %.3e\n", s.max_conservation_residual);
    std::printf("max_stress_residual       %.3e\n", s.max_stress_residual);
    std::printf("max_flux_residual         %.3e\n", s.max_flux_residual);
    std::printf("energy_defect             %.3e\n", s.energy_defect);
}

void print_report(const fsd_report* rep) {
    std::printf("%-10s %-12s %-12s %-12s %-12s %-12s %-12s %-12s %s\n", "eps", "err_u1_L2", "err_eu2_L2", "err_p1_H1",
                "err_p2_H1", "ratio_tau_n", "eta_L2", "beta_h", "status");
    std::vector<fsd_row> rows(fsd_report_rows(rep));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        fsd_report_row(rep, k, &rows[k]);
        const fsd_row& r = rows[k];
        std::printf("%-10.4g %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e %-12.4e %s\n", r.eps, r.err_u1_L2,
                    r.err_eu2_L2, r.err_p1_H1, r.err_p2_H1, r.ratio_tau_n, r.eta_L2, r.beta_h, r.status);
    }
    if (rows.size() < 2) return;
    std::printf("observed rates in eps (log e_k/e_k+1 / log eps_k/eps_k+1):\n");
    auto rate = [](double a, double b, double ea, double eb) {
        return (a > 0.0 && b > 0.0) ? std::log(a / b) / std::log(ea / eb) : NAN;
    };
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const fsd_row &a = rows[k], &b = rows[k + 1];
        std::printf("  %.4g -> %.4g: u1 %.3f  eu2 %.3f  p1 %.3f  p2 %.3f\n", a.eps, b.eps,
                    rate(a.err_u1_L2, b.err_u1_L2, a.eps, b.eps), rate(a.err_eu2_L2, b.err_eu2_L2, a.eps, b.eps),
                    rate(a.err_p1_H1, b.err_p1_H1, a.eps, b.eps), rate(a.err_p2_H1, b.err_p2_H1, a.eps, b.eps));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fissured Darcy flow: eps-scaled and limit mixed problems"};
    app.require_subcommand(1);

    std::string geom, out, config, dump, dir;
    double h = 0.0, eps = 0.0;

    auto* validate = app.add_subcommand("validate", "Validate a geometry file");
    validate->add_option("geometry", geom, "Geometry file")->required();

    auto* mesh = app.add_subcommand("mesh", "Build a mesh and optionally export it");
    mesh->set_help_flag("--help", "Print this help message and exit");
    mesh->add_option("geometry", geom, "Geometry file")->required();
    mesh->add_option("--h", h, "Target mesh size")->required();
    mesh->add_option("--out", out, "Mesh export path");

    auto* seps = app.add_subcommand("solve-eps", "Solve the eps-scaled problem");
    seps->add_option("config", config, "Sweep config file")->required();
    seps->add_option("--eps", eps, "Scaling parameter in (0,1]")->required();
    seps->add_option("--dump", dump, "Write the assembled system as triplets");

    auto* slim = app.add_subcommand("solve-limit", "Solve the limit problem");
    slim->add_option("config", config, "Sweep config file")->required();
    slim->add_option("--dump", dump, "Write the assembled system as triplets");

    auto* sweep = app.add_subcommand("sweep", "Run the eps sweep and write the report");
    sweep->add_option("config", config, "Sweep config file")->required();
    sweep->add_option("--out", out, "Output directory (overrides config)");

    auto* report = app.add_subcommand("report", "Print a written sweep report");
    report->add_option("dir", dir, "Report directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (*validate) {
        fsd_medium* m = nullptr;
        fsd_status st = fsd_medium_load(geom.c_str(), &m);
        if (st != FSD_OK) return fail(st);
        fsd_medium_info info;
        fsd_medium_info_get(m, &info);
        std::printf("valid: %d fissure(s), G = (%g, %g), z in (%g, %g), total height %g, slope cap %g\n", info.fissures,
                    info.x_lo, info.x_hi, info.bottom, info.top, info.total_height, info.slope_cap);
        fsd_medium_free(m);
        return 0;
    }
    if (*mesh) {
        fsd_medium* m = nullptr;
        fsd_status st = fsd_medium_load(geom.c_str(), &m);
        if (st != FSD_OK) return fail(st);
        fsd_mesh* mh = nullptr;
        st = fsd_mesh_build(m, h, &mh);
        fsd_medium_free(m);
        if (st != FSD_OK) return fail(st);
        fsd_mesh_info info;
        fsd_mesh_info_get(mh, &info);
        std::printf("vertices %d\ncells %d (block %d, strip %d)\nfacets %d (gamma %d, drained %d, lateral wall %d)\n"
                    "min angle %.2f deg\n",
                    info.vertices, info.cells, info.block_cells, info.strip_cells, info.facets, info.gamma_facets,
                    info.drained_facets, info.lateral_wall_facets, info.min_angle_deg);
        if (!out.empty()) {
            st = fsd_mesh_write(mh, out.c_str());
            if (st != FSD_OK) {
                fsd_mesh_free(mh);
                return fail(st);
            }
            std::printf("written %s\n", out.c_str());
        }
        fsd_mesh_free(mh);
        return 0;
    }
    if (*report) {
        fsd_report* r = nullptr;
        fsd_status st = fsd_report_read(dir.c_str(), &r);
        if (st != FSD_OK) return fail(st);
        print_report(r);
        fsd_report_free(r);
        return 0;
    }

    fsd_config* c = nullptr;
    fsd_status st = fsd_config_load(config.c_str(), &c);
    if (st != FSD_OK) return fail(st);
    fsd_solve_summary s;
    if (*seps) {
        st = fsd_solve_eps(c, eps, dump.empty() ? nullptr : dump.c_str(), &s);
        if (st == FSD_OK) print_summary(s);
    } else if (*slim) {
        st = fsd_solve_limit(c, dump.empty() ? nullptr : dump.c_str(), &s);
        if (st == FSD_OK) print_summary(s);
    } else {
        if (!out.empty()) fsd_config_set_output(c, out.c_str());
        fsd_report* r = nullptr;
        st = fsd_run_sweep(c, &r);
        if (r) {
            print_report(r);
            fsd_report_free(r);
        }
    }
    fsd_config_free(c);
    return st == FSD_OK ? 0 : fail(st);
}
