#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "fissure/assembly.hpp"

namespace fissure::detail {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct Accum {
    Triplets A, B, GV, GQ;
    Eigen::VectorXd g, f;
};

// Pressure dofs of the left and right endpoint of a wall facet.
using WallDofs = std::function<std::array<int, 2>(const Facet&)>;

// Rock Darcy terms, rock divergence, entry resistance, p2 coupling on both walls, drained data,
// interface sources and the rock parts of both Gram matrices.
void assemble_rock(const MixedMesh& mesh, const ProblemData& data, const DofLayout& L, const WallDofs& wall, Accum& acc);

void finish(DiscreteSystem& sys, Accum& acc);

}  // namespace fissure::detail
