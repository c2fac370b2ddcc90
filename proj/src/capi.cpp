#include "fissure/fissure.h"

#include <algorithm>
#include <memory>
#include <new>
#include <string>

#include "fissure/harness.hpp"

struct fsd_medium {
    std::shared_ptr<const fissure::FissuredMedium> medium;
};
struct fsd_mesh {
    std::shared_ptr<const fissure::MixedMesh> mesh;
};
struct fsd_config {
    fissure::SweepConfig cfg;
};
struct fsd_report {
    fissure::ConvergenceReport rep;
};

namespace {

thread_local std::string last_error;

fsd_status map_code(fissure::ErrorCode c) {
    using fissure::ErrorCode;
    switch (c) {
        case ErrorCode::invalid_argument: return FSD_ERR_INVALID_ARGUMENT;
        case ErrorCode::parse: return FSD_ERR_PARSE;
        case ErrorCode::io: return FSD_ERR_IO;
        case ErrorCode::overlap: return FSD_ERR_OVERLAP;
        case ErrorCode::vertical_tangent: return FSD_ERR_VERTICAL_TANGENT;
        case ErrorCode::disconnected_block: return FSD_ERR_DISCONNECTED_BLOCK;
        case ErrorCode::outside_domain: return FSD_ERR_OUTSIDE_DOMAIN;
        case ErrorCode::target_too_coarse: return FSD_ERR_TARGET_TOO_COARSE;
        case ErrorCode::mesh_quality: return FSD_ERR_MESH_QUALITY;
        case ErrorCode::coefficient: return FSD_ERR_COEFFICIENT;
        case ErrorCode::limit_data: return FSD_ERR_LIMIT_DATA;
        case ErrorCode::singular: return FSD_ERR_SINGULAR;
        case ErrorCode::tolerance: return FSD_ERR_TOLERANCE;
        case ErrorCode::too_large: return FSD_ERR_TOO_LARGE;
        case ErrorCode::evaluation: return FSD_ERR_EVALUATION;
        case ErrorCode::unknown_case: return FSD_ERR_UNKNOWN_CASE;
    }
    return FSD_ERR_INTERNAL;
}

template <class F>
fsd_status guard(F&& f) {
    try {
        last_error.clear();
        f();
        return FSD_OK;
    } catch (const fissure::Error& e) {
        last_error = std::string(fissure::error_code_name(e.code())) + ": " + e.what();
        return map_code(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown failure";
    }
    return FSD_ERR_INTERNAL;
}

fsd_status null_arg(const char* what) {
    last_error = std::string("InvalidArgument: null ") + what;
    return FSD_ERR_INVALID_ARGUMENT;
}

std::shared_ptr<const fissure::MixedMesh> config_mesh(const fissure::SweepConfig& cfg) {
    auto medium = std::make_shared<const fissure::FissuredMedium>(cfg.medium);
    fissure::MixedMesh m = fissure::build_mesh(medium, cfg.target_h);
    for (int r = 0; r < cfg.refinements; ++r) m = fissure::refine(m);
    return std::make_shared<const fissure::MixedMesh>(std::move(m));
}

void summarize(const fissure::SolutionField& s, const fissure::DiscreteSystem& sys, fsd_solve_summary* out) {
    *out = fsd_solve_summary{};
    out->eps = sys.layout->kind == fissure::SystemKind::limit ? 0.0 : sys.eps;
    out->velocity_unknowns = sys.layout->n_vel();
    out->pressure_unknowns = sys.layout->n_pres();
    out->residual = s.residual;
    out->rock_velocity_l2 = s.rock_velocity_l2();
    out->rock_pressure_l2 = s.rock_pressure_l2();
    out->rock_divergence_l2 = s.rock_divergence_l2();
    out->gamma_flux_l2 = s.gamma_flux_l2();
    out->strip_velocity_l2 = s.strip_velocity_l2();
    out->strip_tangential_l2 = s.strip_tangential_l2();
    out->strip_normal_l2 = s.strip_normal_l2();
    out->strip_pressure_l2 = s.strip_pressure_l2();
    out->strip_pressure_h1 = s.strip_pressure_h1();
    out->eta_l2 = out->eps > 0.0 ? s.eta_l2() : 0.0;
    auto c = fissure::conservation_residual(s, sys);
    out->max_conservation_residual = c.empty() ? 0.0 : *std::max_element(c.begin(), c.end());
    auto ir = fissure::interface_residuals(s, sys);
    out->max_stress_residual = ir.max_stress;
    out->max_flux_residual = ir.max_flux;
    out->energy_defect = fissure::energy_defect(s, sys);
}

}  // namespace

extern "C" {

const char* fsd_last_error(void) { return last_error.c_str(); }

const char* fsd_status_name(fsd_status status) {
    switch (status) {
        case FSD_OK: return "OK";
        case FSD_ERR_INTERNAL: return "InternalError";
        default:
            if (status > FSD_OK && status < FSD_ERR_INTERNAL)
                return fissure::error_code_name(static_cast<fissure::ErrorCode>(status - 1));
    }
    return "UnknownStatus";
}

fsd_status fsd_medium_load(const char* path, fsd_medium** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guard([&] {
        auto m = std::make_unique<fsd_medium>();
        m->medium = std::make_shared<const fissure::FissuredMedium>(fissure::load_geometry(path));
        *out = m.release();
    });
}

fsd_status fsd_medium_parse(const char* text, fsd_medium** out) {
    if (!text) return null_arg("text");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guard([&] {
        auto m = std::make_unique<fsd_medium>();
        m->medium = std::make_shared<const fissure::FissuredMedium>(fissure::validate_medium(fissure::parse_geometry(text)));
        *out = m.release();
    });
}

fsd_status fsd_medium_info_get(const fsd_medium* medium, fsd_medium_info* out) {
    if (!medium) return null_arg("medium");
    if (!out) return null_arg("out");
    return guard([&] {
        const auto& m = *medium->medium;
        out->x_lo = m.x_lo();
        out->x_hi = m.x_hi();
        out->bottom = m.bottom();
        out->top = m.top();
        out->slope_cap = m.slope_cap();
        out->fissures = m.fissure_count();
        out->total_height = m.total_height();
    });
}

void fsd_medium_free(fsd_medium* medium) { delete medium; }

fsd_status fsd_mesh_build(const fsd_medium* medium, double target_h, fsd_mesh** out) {
    if (!medium) return null_arg("medium");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guard([&] {
        auto m = std::make_unique<fsd_mesh>();
        m->mesh = std::make_shared<const fissure::MixedMesh>(fissure::build_mesh(medium->medium, target_h));
        *out = m.release();
    });
}

fsd_status fsd_mesh_refine(const fsd_mesh* mesh, fsd_mesh** out) {
    if (!mesh) return null_arg("mesh");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guard([&] {
        auto m = std::make_unique<fsd_mesh>();
        m->mesh = std::make_shared<const fissure::MixedMesh>(fissure::refine(*mesh->mesh));
        *out = m.release();
    });
}

fsd_status fsd_mesh_info_get(const fsd_mesh* mesh, fsd_mesh_info* out) {
    if (!mesh) return null_arg("mesh");
    if (!out) return null_arg("out");
    return guard([&] {
        const auto& m = *mesh->mesh;
        *out = fsd_mesh_info{};
        out->vertices = static_cast<int>(m.vertices.size());
        out->cells = static_cast<int>(m.cells.size());
        out->facets = static_cast<int>(m.facets.size());
        for (const auto& r : m.cell_region) (r.kind == fissure::RegionKind::block ? out->block_cells : out->strip_cells)++;
        for (const auto& f : m.facets) {
            switch (f.tag) {
                case fissure::FacetTag::gamma_bottom:
                case fissure::FacetTag::gamma_top: out->gamma_facets++; break;
                case fissure::FacetTag::drained: out->drained_facets++; break;
                case fissure::FacetTag::lateral_wall: out->lateral_wall_facets++; break;
                default: break;
            }
        }
        out->min_angle_deg = m.min_angle_degrees();
        out->target_h = m.target_h;
    });
}

fsd_status fsd_mesh_write(const fsd_mesh* mesh, const char* path) {
    if (!mesh) return null_arg("mesh");
    if (!path) return null_arg("path");
    return guard([&] { fissure::write_mesh(*mesh->mesh, path); });
}

void fsd_mesh_free(fsd_mesh* mesh) { delete mesh; }

fsd_status fsd_config_load(const char* path, fsd_config** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guard([&] {
        auto c = std::make_unique<fsd_config>();
        c->cfg = fissure::load_sweep_config(path);
        *out = c.release();
    });
}

fsd_status fsd_config_parse(const char* text, const char* base_dir, fsd_config** out) {
    if (!text) return null_arg("text");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guard([&] {
        auto c = std::make_unique<fsd_config>();
        c->cfg = fissure::parse_sweep_config(text, base_dir ? base_dir : ".");
        *out = c.release();
    });
}

fsd_status fsd_config_eps(const fsd_config* config, size_t* count, const double** values) {
    if (!config) return null_arg("config");
    if (!count || !values) return null_arg("out");
    *count = config->cfg.eps.size();
    *values = config->cfg.eps.data();
    return FSD_OK;
}

fsd_status fsd_config_set_output(fsd_config* config, const char* dir) {
    if (!config) return null_arg("config");
    if (dir) config->cfg.output_dir = dir;
    return FSD_OK;
}

fsd_status fsd_config_set_target_h(fsd_config* config, double target_h) {
    if (!config) return null_arg("config");
    if (target_h > 0.0) config->cfg.target_h = target_h;
    return FSD_OK;
}

void fsd_config_free(fsd_config* config) { delete config; }

fsd_status fsd_solve_eps(const fsd_config* config, double eps, const char* dump_path, fsd_solve_summary* out) {
    if (!config) return null_arg("config");
    if (!out) return null_arg("out");
    return guard([&] {
        auto mesh = config_mesh(config->cfg);
        fissure::DiscreteSystem sys = fissure::assemble_eps(mesh, config->cfg.data, eps);
        if (dump_path) fissure::write_system_triplets(sys, dump_path);
        fissure::SolutionField s = fissure::solve_saddle(sys, config->cfg.tol);
        summarize(s, sys, out);
    });
}

fsd_status fsd_solve_limit(const fsd_config* config, const char* dump_path, fsd_solve_summary* out) {
    if (!config) return null_arg("config");
    if (!out) return null_arg("out");
    return guard([&] {
        auto mesh = config_mesh(config->cfg);
        fissure::DiscreteSystem sys = fissure::assemble_limit(mesh, fissure::build_manifolds(*mesh), config->cfg.data);
        if (dump_path) fissure::write_system_triplets(sys, dump_path);
        fissure::SolutionField s = fissure::solve_saddle(sys, config->cfg.tol);
        summarize(s, sys, out);
    });
}

fsd_status fsd_run_sweep(const fsd_config* config, fsd_report** out) {
    if (!config) return null_arg("config");
    if (!out) return null_arg("out");
    *out = nullptr;
    auto r = std::make_unique<fsd_report>();
    r->rep.complete = false;
    fsd_status st = guard([&] { r->rep = fissure::run_sweep(config->cfg, &r->rep); });
    if (st == FSD_OK || !r->rep.rows.empty()) *out = r.release();
    return st;
}

fsd_status fsd_report_read(const char* dir, fsd_report** out) {
    if (!dir) return null_arg("dir");
    if (!out) return null_arg("out");
    *out = nullptr;
    return guard([&] {
        auto r = std::make_unique<fsd_report>();
        r->rep = fissure::read_report(dir);
        *out = r.release();
    });
}

fsd_status fsd_report_write(const fsd_report* report, const char* dir) {
    if (!report) return null_arg("report");
    if (!dir) return null_arg("dir");
    return guard([&] { fissure::emit_report(report->rep, dir); });
}

size_t fsd_report_rows(const fsd_report* report) { return report ? report->rep.rows.size() : 0; }

fsd_status fsd_report_row(const fsd_report* report, size_t index, fsd_row* out) {
    if (!report) return null_arg("report");
    if (!out) return null_arg("out");
    if (index >= report->rep.rows.size()) {
        last_error = "InvalidArgument: row index out of range";
        return FSD_ERR_INVALID_ARGUMENT;
    }
    const auto& r = report->rep.rows[index];
    out->eps = r.eps;
    out->err_u1_L2 = r.err_u1_L2;
    out->err_eu2_L2 = r.err_eu2_L2;
    out->err_p1_H1 = r.err_p1_H1;
    out->err_p2_H1 = r.err_p2_H1;
    out->ratio_tau_n = r.ratio_tau_n;
    out->eta_L2 = r.eta_L2;
    out->beta_h = r.beta_h;
    out->ok = r.status == "ok";
    out->status = r.status.c_str();
    return FSD_OK;
}

void fsd_report_free(fsd_report* report) { delete report; }

}  // extern "C"
