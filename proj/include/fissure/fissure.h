/* C interface to the fissured Darcy library. All handles are opaque; every call
   returns an fsd_status and stores a message retrievable with fsd_last_error(). */
#ifndef FISSURE_FISSURE_H
#define FISSURE_FISSURE_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(FSD_BUILDING)
#    define FSD_API __declspec(dllexport)
#  else
#    define FSD_API __declspec(dllimport)
#  endif
#else
#  define FSD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fsd_status {
    FSD_OK = 0,
    FSD_ERR_INVALID_ARGUMENT,
    FSD_ERR_PARSE,
    FSD_ERR_IO,
    FSD_ERR_OVERLAP,
    FSD_ERR_VERTICAL_TANGENT,
    FSD_ERR_DISCONNECTED_BLOCK,
    FSD_ERR_OUTSIDE_DOMAIN,
    FSD_ERR_TARGET_TOO_COARSE,
    FSD_ERR_MESH_QUALITY,
    FSD_ERR_COEFFICIENT,
    FSD_ERR_LIMIT_DATA,
    FSD_ERR_SINGULAR,
    FSD_ERR_TOLERANCE,
    FSD_ERR_TOO_LARGE,
    FSD_ERR_EVALUATION,
    FSD_ERR_UNKNOWN_CASE,
    FSD_ERR_INTERNAL
} fsd_status;

typedef struct fsd_medium fsd_medium;
typedef struct fsd_mesh fsd_mesh;
typedef struct fsd_config fsd_config;
typedef struct fsd_report fsd_report;

/* Message of the last failing call on this thread ("" if none). */
FSD_API const char* fsd_last_error(void);
FSD_API const char* fsd_status_name(fsd_status status);

/* ---- geometry ---- */
typedef struct fsd_medium_info {
    double x_lo, x_hi, bottom, top, slope_cap;
    int fissures;
    double total_height;
} fsd_medium_info;

FSD_API fsd_status fsd_medium_load(const char* path, fsd_medium** out);
FSD_API fsd_status fsd_medium_parse(const char* text, fsd_medium** out);
FSD_API fsd_status fsd_medium_info_get(const fsd_medium* medium, fsd_medium_info* out);
FSD_API void fsd_medium_free(fsd_medium* medium);

/* ---- mesh ---- */
typedef struct fsd_mesh_info {
    int vertices, cells, facets;
    int block_cells, strip_cells;
    int gamma_facets, drained_facets, lateral_wall_facets;
    double min_angle_deg;
    double target_h;
} fsd_mesh_info;

FSD_API fsd_status fsd_mesh_build(const fsd_medium* medium, double target_h, fsd_mesh** out);
FSD_API fsd_status fsd_mesh_refine(const fsd_mesh* mesh, fsd_mesh** out);
FSD_API fsd_status fsd_mesh_info_get(const fsd_mesh* mesh, fsd_mesh_info* out);
FSD_API fsd_status fsd_mesh_write(const fsd_mesh* mesh, const char* path);
FSD_API void fsd_mesh_free(fsd_mesh* mesh);

/* ---- sweep configuration ---- */
FSD_API fsd_status fsd_config_load(const char* path, fsd_config** out);
FSD_API fsd_status fsd_config_parse(const char* text, const char* base_dir, fsd_config** out);
FSD_API fsd_status fsd_config_eps(const fsd_config* config, size_t* count, const double** values);
/* Overrides; pass NULL/negative to leave unchanged. */
FSD_API fsd_status fsd_config_set_output(fsd_config* config, const char* dir);
FSD_API fsd_status fsd_config_set_target_h(fsd_config* config, double target_h);
FSD_API void fsd_config_free(fsd_config* config);

/* ---- single solves on the config's mesh ---- */
typedef struct fsd_solve_summary {
    double eps; /* 0 for the limit problem */
    int velocity_unknowns, pressure_unknowns;
    double residual;
    double rock_velocity_l2, rock_pressure_l2, rock_divergence_l2, gamma_flux_l2;
    double strip_velocity_l2, strip_tangential_l2, strip_normal_l2;
    double strip_pressure_l2, strip_pressure_h1;
    double eta_l2;
    double max_conservation_residual;
    double max_stress_residual, max_flux_residual;
    double energy_defect;
} fsd_solve_summary;

/* dump_path may be NULL; otherwise the assembled blocks are written as triplets. */
FSD_API fsd_status fsd_solve_eps(const fsd_config* config, double eps, const char* dump_path, fsd_solve_summary* out);
FSD_API fsd_status fsd_solve_limit(const fsd_config* config, const char* dump_path, fsd_solve_summary* out);

/* ---- sweep and reports ---- */
typedef struct fsd_row {
    double eps;
    double err_u1_L2, err_eu2_L2, err_p1_H1, err_p2_H1;
    double ratio_tau_n, eta_L2, beta_h;
    int ok;
    const char* status; /* valid while the report lives */
} fsd_row;

/* On failure *out still receives the partial report when one exists. */
FSD_API fsd_status fsd_run_sweep(const fsd_config* config, fsd_report** out);
FSD_API fsd_status fsd_report_read(const char* dir, fsd_report** out);
FSD_API fsd_status fsd_report_write(const fsd_report* report, const char* dir);
FSD_API size_t fsd_report_rows(const fsd_report* report);
FSD_API fsd_status fsd_report_row(const fsd_report* report, size_t index, fsd_row* out);
FSD_API void fsd_report_free(fsd_report* report);

#ifdef __cplusplus
}
#endif

#endif
