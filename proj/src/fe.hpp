#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "fissure/assembly.hpp"

namespace fissure::fe {

// 6-point degree-4 triangle rule in barycentric form.
struct TriRule {
    std::array<std::array<double, 3>, 6> bary;
    std::array<double, 6> w;
};

inline const TriRule& tri_rule() {
    static const TriRule r = [] {
        TriRule t;
        const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
        t.bary = {{{a1, a1, b1}, {a1, b1, a1}, {b1, a1, a1}, {a2, a2, b2}, {a2, b2, a2}, {b2, a2, a2}}};
        t.w = {w1, w1, w1, w2, w2, w2};
        return t;
    }();
    return r;
}

// 3-point Gauss on [0, 1].
inline constexpr std::array<double, 3> gauss_t{0.5 - 0.5 * 0.7745966692414834, 0.5, 0.5 + 0.5 * 0.7745966692414834};
inline constexpr std::array<double, 3> gauss_w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

inline Point vtx(const MixedMesh& m, int id) { return m.vertices[static_cast<std::size_t>(id)]; }

struct CellGeom {
    std::array<Point, 3> P;
    double area = 0.0;
    Point at(const std::array<double, 3>& b) const {
        return {b[0] * P[0].x + b[1] * P[1].x + b[2] * P[2].x, b[0] * P[0].z + b[1] * P[1].z + b[2] * P[2].z};
    }
    // gradient of barycentric coordinate k
    Eigen::Vector2d grad(int k) const {
        const Point& p1 = P[static_cast<std::size_t>((k + 1) % 3)];
        const Point& p2 = P[static_cast<std::size_t>((k + 2) % 3)];
        return Eigen::Vector2d(p1.z - p2.z, p2.x - p1.x) / (2.0 * area);
    }
};

inline CellGeom cell_geom(const MixedMesh& m, int c) {
    CellGeom g;
    for (int k = 0; k < 3; ++k) g.P[static_cast<std::size_t>(k)] = vtx(m, m.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)]);
    g.area = m.cell_area[static_cast<std::size_t>(c)];
    return g;
}

// Lowest-order Raviart-Thomas shape functions of a rock cell: phi_k = coef_k (x - P_k),
// oriented by the global facet normal.
struct RT0Cell {
    CellGeom g;
    std::array<double, 3> coef{};
    std::array<double, 3> flux{};  // integral of div phi_k over the cell
    std::array<int, 3> facet{};
    std::array<int, 3> dof{};

    Eigen::Vector2d phi(int k, const Point& x) const {
        const Point& p = g.P[static_cast<std::size_t>(k)];
        return coef[static_cast<std::size_t>(k)] * Eigen::Vector2d(x.x - p.x, x.z - p.z);
    }
    Eigen::Vector2d eval(const Eigen::VectorXd& u, const Point& x) const {
        Eigen::Vector2d v = Eigen::Vector2d::Zero();
        for (int k = 0; k < 3; ++k) v += u[dof[static_cast<std::size_t>(k)]] * phi(k, x);
        return v;
    }
};

inline RT0Cell rt0_cell(const MixedMesh& m, const DofLayout& L, int c) {
    RT0Cell r;
    r.g = cell_geom(m, c);
    for (int k = 0; k < 3; ++k) {
        const Point& a = r.g.P[static_cast<std::size_t>((k + 1) % 3)];
        const Point& b = r.g.P[static_cast<std::size_t>((k + 2) % 3)];
        int f = m.cell_facets[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
        const Facet& fc = m.facets[static_cast<std::size_t>(f)];
        Eigen::Vector2d outward(b.z - a.z, a.x - b.x);
        double sigma = outward.dot(fc.normal) > 0.0 ? 1.0 : -1.0;
        r.coef[static_cast<std::size_t>(k)] = sigma * fc.length / (2.0 * r.g.area);
        r.flux[static_cast<std::size_t>(k)] = sigma * fc.length;
        r.facet[static_cast<std::size_t>(k)] = f;
        r.dof[static_cast<std::size_t>(k)] = L.facet_dof[static_cast<std::size_t>(f)];
    }
    return r;
}

inline double eval_checked(const Expr& e, const Point& p, const char* name) {
    try {
        return e(p.x, p.z);
    } catch (const Error& err) {
        throw Error(ErrorCode::coefficient, std::string("cannot evaluate ") + name + ": " + err.what());
    }
}

// Polyline slope of zeta_i over column k, read off the mesh nodes.
inline double column_slope(const MixedMesh& m, int fissure, int k) {
    int line = m.layer_start[static_cast<std::size_t>(2 * fissure - 1)];
    const Point a = vtx(m, m.vertex_id(k, line));
    const Point b = vtx(m, m.vertex_id(k + 1, line));
    return (b.z - a.z) / (b.x - a.x);
}

}  // namespace fissure::fe
