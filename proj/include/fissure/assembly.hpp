#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "fissure/mesh.hpp"
#include "fissure/problem.hpp"

namespace fissure {

using SpMat = Eigen::SparseMatrix<double>;

enum class SystemKind { eps, limit };

// Velocity unknowns: rock facet fluxes first, then strip (or manifold) unknowns.
// Pressure unknowns: rock cells first, then strip nodes (or manifold nodes).
struct DofLayout {
    SystemKind kind = SystemKind::eps;
    int n_rock_vel = 0;
    int n_strip_vel = 0;
    int n_rock_p = 0;
    int n_strip_p = 0;
    std::vector<int> facet_dof;    // rock velocity dof per facet or -1
    std::vector<int> cell_vdof;    // eps: first of two strip velocity dofs per strip cell, else -1
    std::vector<int> cell_pdof;    // rock pressure dof per rock cell, else -1
    std::vector<int> vertex_pdof;  // eps: strip pressure dof per strip vertex, else -1
    std::vector<std::vector<int>> manifold_vdof;  // limit: [fissure-1][column]
    std::vector<std::vector<int>> manifold_pdof;  // limit: [fissure-1][fiber]

    int n_vel() const { return n_rock_vel + n_strip_vel; }
    int n_pres() const { return n_rock_p + n_strip_p; }
};

DofLayout make_eps_layout(const MixedMesh& mesh);
DofLayout make_limit_layout(const MixedMesh& mesh);

// Collapsed fissure curve carried by the fibers of the bulk mesh.
struct ManifoldMesh {
    int fissure = 1;
    double height = 0.0;
    std::vector<double> xs;
    std::vector<double> lambda;  // nodal zeta_i - sum_{l<i} h_l
    std::vector<double> slope;   // per element, polyline slope of zeta_i
    std::vector<double> weight;  // per element, 1/sqrt(1 + slope^2)
};

std::vector<ManifoldMesh> build_manifolds(const MixedMesh& mesh);

struct DiscreteSystem {
    std::shared_ptr<const MixedMesh> mesh;
    std::shared_ptr<const DofLayout> layout;
    std::vector<ManifoldMesh> manifolds;  // limit systems only
    double eps = 1.0;
    SpMat A;  // n_vel x n_vel
    SpMat B;  // n_pres x n_vel
    Eigen::VectorXd rhs_g;
    Eigen::VectorXd rhs_f;
    SpMat gram_v;  // velocity norm Gram matrix
    SpMat gram_q;  // pressure norm Gram matrix

    int dimension() const { return layout->n_vel() + layout->n_pres(); }
};

DiscreteSystem assemble_eps(std::shared_ptr<const MixedMesh> mesh, const ProblemData& data, double eps);
DiscreteSystem assemble_limit(std::shared_ptr<const MixedMesh> mesh, const std::vector<ManifoldMesh>& manifolds,
                              const ProblemData& data);

// Throws LimitDataError when a2 or g.e1 vary along a fissure fiber.
void check_limit_data(const MixedMesh& mesh, const ProblemData& data);

struct BcReport {
    bool natural_bcs_verified = false;
    int drained_facets = 0;
    int lateral_wall_facets = 0;
    int lateral_wall_unknowns = 0;       // unknowns attached to fissure lateral walls, must be 0
    double drained_boundary_residual = 0.0;  // boundary term of a zero drained pressure
    std::string note;
};

// Boundary conditions are natural in the mixed form. Verifies that and returns the system unchanged.
DiscreteSystem apply_bc(const DiscreteSystem& system, const MixedMesh& mesh, BcReport* report = nullptr);

// Text dump: one "block row col value" line per nonzero, blocks A, B, then rhs_g, rhs_f as "g i value".
void write_system_triplets(const DiscreteSystem& system, const std::string& path);

}  // namespace fissure
