#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fissure/geometry.hpp"

namespace fissure {

enum class FacetTag { interior, gamma_bottom, gamma_top, drained, lateral_wall };

const char* facet_tag_name(FacetTag t);

struct Facet {
    std::array<int, 2> v{-1, -1};
    std::array<int, 2> cell{-1, -1};
    FacetTag tag = FacetTag::interior;
    int fissure = 0;    // 1-based for gamma facets, 0 otherwise
    int column = -1;    // column index for non-vertical facets
    Eigen::Vector2d normal{0.0, 0.0};  // upward on gamma facets, outward on boundary facets
    double length = 0.0;
};

// Layered triangulation of the reference domain. Vertex (k, m) sits on fiber k at layer line m.
struct MixedMesh {
    std::shared_ptr<const FissuredMedium> medium;
    std::vector<double> xs;          // fiber abscissae
    std::vector<int> layers;         // layer count per region r = 0..2I
    std::vector<int> layer_start;    // first layer line of region r
    int layer_lines = 0;             // vertices per fiber
    double target_h = 0.0;

    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> cells;  // counter-clockwise
    std::vector<Region> cell_region;
    std::vector<int> cell_column;
    std::vector<std::array<int, 3>> cell_facets;  // facet opposite local vertex k
    std::vector<double> cell_area;
    std::vector<Facet> facets;

    // per fissure (index i-1), per column: wall facets and strip cells
    std::vector<std::vector<int>> bottom_wall;
    std::vector<std::vector<int>> top_wall;
    std::vector<std::vector<std::vector<int>>> strip_cells;

    int columns() const { return static_cast<int>(xs.size()) - 1; }
    int vertex_id(int k, int m) const { return k * layer_lines + m; }
    double min_angle_degrees() const;
    double region_area(Region r) const;
    double gamma_length(int fissure, FacetTag which) const;
};

MixedMesh build_mesh(std::shared_ptr<const FissuredMedium> medium, double target_h);
MixedMesh build_mesh(const FissuredMedium& medium, double target_h);
MixedMesh refine(const MixedMesh& mesh);

// Structural checks: conformity, tag consistency, orientation. Throws on the first violation.
void check_mesh(const MixedMesh& mesh);

void write_mesh(const MixedMesh& mesh, const std::string& path);
std::string format_mesh(const MixedMesh& mesh);

}  // namespace fissure
