#pragma once

#include <string>

#include "fissure/expr.hpp"
#include "fissure/mesh.hpp"

namespace fissure {

// Coefficients and loads as expressions over (x, z) on the reference domain.
struct ProblemData {
    Expr a1 = Expr::constant(1.0);
    Expr a2 = Expr::constant(1.0);
    Expr alpha;
    Expr F;
    Expr g_x;
    Expr g_z;
    Expr f_gamma;
    Expr p_drained;  // pressure on the drained boundary, 0 for the physical problem

    bool zero_loads() const;
};

// Checks a1, a2 > 0 and alpha >= 0 at every quadrature point; evaluation failures are rethrown
// as coefficient errors.
void validate_data(const MixedMesh& mesh, const ProblemData& data);

}  // namespace fissure
