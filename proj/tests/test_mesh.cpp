#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "fissure/mesh.hpp"

using namespace fissure;

namespace {

std::shared_ptr<const FissuredMedium> flat_medium() {
    RawMedium r;
    r.top = 1.2;
    r.fissures.push_back({{0.0, 1.0}, {{{0.5, 0.0, 0.0, 0.0}}}, 0.2});
    return std::make_shared<const FissuredMedium>(validate_medium(r));
}

std::shared_ptr<const FissuredMedium> two_fissures() {
    RawMedium r;
    r.x_hi = 2.0;
    r.top = 2.5;
    r.fissures.push_back({{0.0, 1.0, 2.0}, {{{0.5, 0.3, 0.0, 0.0}}, {{0.8, -0.3, 0.0, 0.0}}}, 0.2});
    r.fissures.push_back({{0.0, 2.0}, {{{1.5, 0.1, 0.0, 0.0}}}, 0.3});
    return std::make_shared<const FissuredMedium>(validate_medium(r));
}

int count(const MixedMesh& m, FacetTag t) {
    int n = 0;
    for (const auto& f : m.facets) n += f.tag == t;
    return n;
}

double region_sum(const MixedMesh& m, Region r) {
    double a = 0.0;
    for (std::size_t c = 0; c < m.cells.size(); ++c)
        if (m.cell_region[c] == r) a += m.cell_area[c];
    return a;
}

void check_conformity(const MixedMesh& m) {
    std::map<std::pair<int, int>, int> uses;
    for (const auto& c : m.cells)
        for (int k = 0; k < 3; ++k) {
            int a = c[static_cast<std::size_t>(k)], b = c[static_cast<std::size_t>((k + 1) % 3)];
            uses[{std::min(a, b), std::max(a, b)}]++;
        }
    CHECK(uses.size() == m.facets.size());
    for (const auto& f : m.facets) {
        int n = uses[{f.v[0], f.v[1]}];
        bool boundary = f.tag == FacetTag::drained || f.tag == FacetTag::lateral_wall;
        CHECK(n == (boundary ? 1 : 2));
    }
}

}  // namespace

TEST_CASE("flat fissure mesh") {
    MixedMesh m = build_mesh(flat_medium(), 0.05);
    CHECK(count(m, FacetTag::gamma_bottom) >= 20);
    CHECK(count(m, FacetTag::gamma_top) >= 20);
    CHECK(m.min_angle_degrees() >= 15.0);
    CHECK_NOTHROW(check_mesh(m));
    check_conformity(m);
    for (const Region r : {Region{RegionKind::block, 0}, Region{RegionKind::strip, 1}, Region{RegionKind::block, 1}})
        CHECK(std::fabs(region_sum(m, r) - m.medium->region_area(r)) <= 1e-8 * m.medium->region_area(r));
    // strips have at least two layers
    CHECK(m.layers[1] >= 2);
    for (const auto& f : m.facets) {
        if (f.tag == FacetTag::gamma_bottom || f.tag == FacetTag::gamma_top) {
            CHECK(f.normal.y() > 0.0);
            CHECK(f.fissure == 1);
        }
        if (f.tag == FacetTag::lateral_wall) {
            CHECK(m.cell_region[static_cast<std::size_t>(f.cell[0])].kind == RegionKind::strip);
        }
    }
}

TEST_CASE("target too coarse") {
    try {
        build_mesh(flat_medium(), 0.5);
        FAIL("expected TargetTooCoarse");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::target_too_coarse);
    }
    CHECK_THROWS_AS(build_mesh(flat_medium(), -1.0), Error);
}

TEST_CASE("interface measure of a sloped fissure") {
    RawMedium r;
    r.bottom = -0.5;
    r.top = 1.7;
    r.fissures.push_back({{0.0, 1.0}, {{{0.0, 1.0, 0.0, 0.0}}}, 0.1});
    MixedMesh m = build_mesh(std::make_shared<const FissuredMedium>(validate_medium(r)), 0.01);
    CHECK(std::fabs(m.gamma_length(1, FacetTag::gamma_bottom) - std::sqrt(2.0)) < 1e-3);
    CHECK(std::fabs(m.gamma_length(1, FacetTag::gamma_top) - std::sqrt(2.0)) < 1e-3);
}

TEST_CASE("uniform refinement") {
    MixedMesh m = build_mesh(two_fissures(), 0.1);
    MixedMesh r = refine(m);
    CHECK(r.cells.size() == 4 * m.cells.size());
    CHECK_NOTHROW(check_mesh(r));
    check_conformity(r);
    for (int k = 0; k <= 4; ++k) {
        Region g = FissuredMedium::region_of_layer(k);
        CHECK(std::fabs(region_sum(r, g) - region_sum(m, g)) < 1e-12);
    }
    std::map<Region, int> tags;
    for (std::size_t c = 0; c < m.cells.size(); ++c) tags[m.cell_region[c]] += 4;
    for (std::size_t c = 0; c < r.cells.size(); ++c) tags[r.cell_region[c]] -= 1;
    for (const auto& [k, v] : tags) CHECK(v == 0);
}

TEST_CASE("gamma measure converges monotonically to arc length") {
    RawMedium raw;
    raw.top = 1.5;
    raw.fissures.push_back({{0.0, 1.0}, {{{0.5, 0.0, 1.0, -1.0}}}, 0.2});
    auto med = std::make_shared<const FissuredMedium>(validate_medium(raw));
    double arc = med->fissure(1).curve.arc_length();
    MixedMesh m = build_mesh(med, 0.1);
    double prev_err = std::fabs(arc - m.gamma_length(1, FacetTag::gamma_bottom));
    for (int k = 0; k < 3; ++k) {
        m = refine(m);
        double len = m.gamma_length(1, FacetTag::gamma_bottom);
        double err = std::fabs(arc - len);
        CHECK(len <= arc + 1e-14);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-4);
}

TEST_CASE("orientation relative to rock cells") {
    MixedMesh m = build_mesh(two_fissures(), 0.05);
    for (const auto& f : m.facets) {
        if (f.tag != FacetTag::gamma_bottom && f.tag != FacetTag::gamma_top) continue;
        int rock = m.cell_region[static_cast<std::size_t>(f.cell[0])].kind == RegionKind::block ? f.cell[0] : f.cell[1];
        double cx = 0.0, cz = 0.0;
        for (int v : m.cells[static_cast<std::size_t>(rock)]) {
            cx += m.vertices[static_cast<std::size_t>(v)].x / 3.0;
            cz += m.vertices[static_cast<std::size_t>(v)].z / 3.0;
        }
        const Point& p = m.vertices[static_cast<std::size_t>(f.v[0])];
        double side = f.normal.x() * (cx - p.x) + f.normal.y() * (cz - p.z);
        if (f.tag == FacetTag::gamma_bottom) CHECK(side < 0.0);
        else CHECK(side > 0.0);
    }
}

TEST_CASE("steep fissures fail the angle check") {
    RawMedium r;
    r.bottom = -1.0;
    r.top = 7.0;
    r.fissures.push_back({{0.0, 1.0}, {{{0.0, 5.0, 0.0, 0.0}}}, 0.2});
    try {
        build_mesh(validate_medium(r), 0.05);
        FAIL("expected MeshQualityError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::mesh_quality);
    }
}

TEST_CASE("mesh export format") {
    MixedMesh m = build_mesh(flat_medium(), 0.1);
    std::istringstream in(format_mesh(m));
    std::string line, word;
    std::getline(in, line);
    CHECK(line == "# fissure mesh v1");
    std::size_t n = 0;
    in >> word >> n;
    CHECK(word == "vertices");
    CHECK(n == m.vertices.size());
    for (std::size_t k = 0; k < n; ++k) std::getline(in >> std::ws, line);
    in >> word >> n;
    CHECK(word == "cells");
    CHECK(n == m.cells.size());
    std::getline(in >> std::ws, line);
    std::istringstream c(line);
    int v0, v1, v2, idx;
    std::string kind;
    c >> v0 >> v1 >> v2 >> kind >> idx;
    CHECK((kind == "block" || kind == "strip"));
    for (std::size_t k = 1; k < n; ++k) std::getline(in >> std::ws, line);
    in >> word >> n;
    CHECK(word == "facets");
    CHECK(n == m.facets.size());
}
