#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fissure/assembly.hpp"

namespace fissure {

// Coefficient vectors on a DofLayout with the norm evaluators used by the harness.
struct SolutionField {
    std::shared_ptr<const MixedMesh> mesh;
    std::shared_ptr<const DofLayout> layout;
    std::vector<ManifoldMesh> manifolds;  // limit layout only
    double eps = 1.0;                      // 0 marks a limit solution or its reconstruction
    Eigen::VectorXd u;
    Eigen::VectorXd p;
    double residual = 0.0;  // relative algebraic residual of the solve

    double rock_velocity_l2() const;
    double rock_divergence_l2() const;
    double gamma_flux_l2() const;
    double strip_velocity_l2() const;
    double strip_tangential_l2() const;
    double strip_normal_l2() const;
    double rock_pressure_l2() const;
    double rock_pressure_h1() const;  // two-point discrete H1 norm of the P0 rock pressure
    double strip_pressure_l2() const;
    double strip_pressure_h1() const;
    double dz_pressure_l2() const;     // ||d_z p|| on strips
    double eta_l2() const;             // ||(1/eps) d_z p|| on strips

    SolutionField operator-(const SolutionField& other) const;
    SolutionField scaled_strip_velocity(double factor) const;
};

SolutionField solve_saddle(const DiscreteSystem& system, double tol = 1e-10);

// Expands a limit solution to z-independent strip fields on the eps layout of the same mesh.
SolutionField reconstruct_strip_fields(const SolutionField& limit);

double estimate_infsup(const DiscreteSystem& system);
double estimate_infsup(const Eigen::MatrixXd& B, const Eigen::MatrixXd& gram_v, const Eigen::MatrixXd& gram_q);

// |int_T div u - int_T F| per rock cell.
std::vector<double> conservation_residual(const SolutionField& sol, const DiscreteSystem& system);

struct InterfaceResiduals {
    std::vector<double> stress;         // per wall facet, normal-stress balance
    std::vector<double> flux;           // per wall pressure node, flux balance
    std::vector<double> flux_balance;   // weak value of the flux jump (+ manifold divergence) per node
    std::vector<double> flux_source;    // weak value of the interface source per node
    double max_stress = 0.0;
    double max_flux = 0.0;
};

InterfaceResiduals interface_residuals(const SolutionField& sol, const DiscreteSystem& system);

// |u.A u - (u.rhs_g + p.rhs_f)| / max(1, u.A u)
double energy_defect(const SolutionField& sol, const DiscreteSystem& system);

}  // namespace fissure
