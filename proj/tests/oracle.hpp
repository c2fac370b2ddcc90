#pragma once
// Independent assembler of the unscaled mixed problem on a given mesh. Rock velocities use rotated
// Whitney forms normalized by their measured normal trace, cells use the 7-point degree-5 rule,
// facets use Simpson's rule. Only the dof numbering is shared with the library.

#include <cmath>

#include <Eigen/Dense>

#include "fissure/assembly.hpp"

namespace oracle {

using fissure::Point;

struct Dense {
    Eigen::MatrixXd A, B;
    Eigen::VectorXd g, f;
};

struct Bary {
    Eigen::Matrix3d inv;  // lambda = inv * (1, x, z)
    double area = 0.0;
    Eigen::Vector3d lambda(double x, double z) const { return inv * Eigen::Vector3d(1.0, x, z); }
    Eigen::Vector2d grad(int k) const { return Eigen::Vector2d(inv(k, 1), inv(k, 2)); }
};

inline Bary bary(const Point P[3]) {
    Eigen::Matrix3d V;
    for (int k = 0; k < 3; ++k) V.col(k) << 1.0, P[k].x, P[k].z;
    Bary b;
    b.inv = V.inverse();
    b.area = 0.5 * std::fabs(V.determinant());
    return b;
}

struct Quad7 {
    double l[7][3];
    double w[7];
};

inline const Quad7& radon7() {
    static const Quad7 q = [] {
        Quad7 r{};
        const double s = std::sqrt(15.0);
        const double a = (6.0 - s) / 21.0, b = (9.0 + 2.0 * s) / 21.0;
        const double c = (6.0 + s) / 21.0, d = (9.0 - 2.0 * s) / 21.0;
        const double wa = (155.0 - s) / 1200.0, wc = (155.0 + s) / 1200.0;
        double pts[7][3] = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a, a, b}, {a, b, a}, {b, a, a}, {c, c, d}, {c, d, c}, {d, c, c}};
        double ws[7] = {0.225, wa, wa, wa, wc, wc, wc};
        for (int k = 0; k < 7; ++k) {
            for (int j = 0; j < 3; ++j) r.l[k][j] = pts[k][j];
            r.w[k] = ws[k];
        }
        return r;
    }();
    return q;
}

// upward for interior and interface facets, outward on the boundary
inline Eigen::Vector2d facet_normal(const fissure::MixedMesh& m, const fissure::Facet& f) {
    Point a = m.vertices[static_cast<std::size_t>(f.v[0])], b = m.vertices[static_cast<std::size_t>(f.v[1])];
    Eigen::Vector2d n(-(b.z - a.z), b.x - a.x);
    n.normalize();
    if (f.cell[1] < 0) {
        const auto& c = m.cells[static_cast<std::size_t>(f.cell[0])];
        double cx = 0.0, cz = 0.0;
        for (int v : c) {
            cx += m.vertices[static_cast<std::size_t>(v)].x / 3.0;
            cz += m.vertices[static_cast<std::size_t>(v)].z / 3.0;
        }
        if (n.dot(Eigen::Vector2d(a.x - cx, a.z - cz)) < 0.0) n = -n;
    } else if (n.y() < 0.0 || (n.y() == 0.0 && n.x() < 0.0)) {
        n = -n;
    }
    return n;
}

// Rock basis function attached to local edge k (opposite vertex k) with unit normal trace along n.
struct EdgeBasis {
    Bary B;
    int a = 0, b = 0;
    double scale = 1.0;
    static Eigen::Vector2d rot(const Eigen::Vector2d& v) { return Eigen::Vector2d(v.y(), -v.x()); }
    Eigen::Vector2d operator()(double x, double z) const {
        Eigen::Vector3d l = B.lambda(x, z);
        return scale * (l[a] * rot(B.grad(b)) - l[b] * rot(B.grad(a)));
    }
    double div() const { return scale * 2.0 * B.grad(a).dot(rot(B.grad(b))); }
};

inline EdgeBasis edge_basis(const Bary& B, const Point P[3], int k, const Eigen::Vector2d& n) {
    EdgeBasis e;
    e.B = B;
    e.a = (k + 1) % 3;
    e.b = (k + 2) % 3;
    double mx = 0.5 * (P[e.a].x + P[e.b].x), mz = 0.5 * (P[e.a].z + P[e.b].z);
    e.scale = 1.0 / e(mx, mz).dot(n);
    return e;
}

inline Dense assemble(const fissure::MixedMesh& m, const fissure::DofLayout& L, const fissure::ProblemData& d) {
    using fissure::FacetTag;
    using fissure::RegionKind;
    const int nv = L.n_vel(), np = L.n_pres();
    Dense S{Eigen::MatrixXd::Zero(nv, nv), Eigen::MatrixXd::Zero(np, nv), Eigen::VectorXd::Zero(nv), Eigen::VectorXd::Zero(np)};
    const Quad7& Q = radon7();

    for (std::size_t c = 0; c < m.cells.size(); ++c) {
        Point P[3];
        for (int k = 0; k < 3; ++k) P[k] = m.vertices[static_cast<std::size_t>(m.cells[c][static_cast<std::size_t>(k)])];
        Bary B = bary(P);
        auto qpt = [&](int s) {
            return Point{Q.l[s][0] * P[0].x + Q.l[s][1] * P[1].x + Q.l[s][2] * P[2].x,
                         Q.l[s][0] * P[0].z + Q.l[s][1] * P[1].z + Q.l[s][2] * P[2].z};
        };
        if (m.cell_region[c].kind == RegionKind::block) {
            EdgeBasis E[3];
            int dof[3];
            for (int k = 0; k < 3; ++k) {
                const auto& f = m.facets[static_cast<std::size_t>(m.cell_facets[c][static_cast<std::size_t>(k)])];
                E[k] = edge_basis(B, P, k, facet_normal(m, f));
                dof[k] = L.facet_dof[static_cast<std::size_t>(m.cell_facets[c][static_cast<std::size_t>(k)])];
            }
            int q = L.cell_pdof[c];
            for (int s = 0; s < 7; ++s) {
                Point x = qpt(s);
                double w = Q.w[s] * B.area;
                double a1 = d.a1(x.x, x.z);
                Eigen::Vector2d gv(d.g_x(x.x, x.z), d.g_z(x.x, x.z));
                S.f[q] += w * d.F(x.x, x.z);
                for (int k = 0; k < 3; ++k) {
                    Eigen::Vector2d pk = E[k](x.x, x.z);
                    S.g[dof[k]] -= w * gv.dot(pk);
                    for (int l = 0; l < 3; ++l) S.A(dof[k], dof[l]) += w * a1 * pk.dot(E[l](x.x, x.z));
                }
            }
            for (int k = 0; k < 3; ++k) S.B(q, dof[k]) -= B.area * E[k].div();
        } else {
            int u = L.cell_vdof[c];
            for (int s = 0; s < 7; ++s) {
                Point x = qpt(s);
                double w = Q.w[s] * B.area;
                double a2 = d.a2(x.x, x.z);
                S.A(u, u) += w * a2;
                S.A(u + 1, u + 1) += w * a2;
                S.g[u] -= w * d.g_x(x.x, x.z);
                S.g[u + 1] -= w * d.g_z(x.x, x.z);
                Eigen::Vector3d lam = B.lambda(x.x, x.z);
                for (int k = 0; k < 3; ++k) {
                    int qk = L.vertex_pdof[static_cast<std::size_t>(m.cells[c][static_cast<std::size_t>(k)])];
                    S.B(qk, u) += w * B.grad(k).x();
                    S.B(qk, u + 1) += w * B.grad(k).y();
                    S.f[qk] += w * d.F(x.x, x.z) * lam[k];
                }
            }
        }
    }

    const double simpson_t[3] = {0.0, 0.5, 1.0}, simpson_w[3] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
    for (std::size_t fi = 0; fi < m.facets.size(); ++fi) {
        const auto& f = m.facets[fi];
        bool bottom = f.tag == FacetTag::gamma_bottom, top = f.tag == FacetTag::gamma_top;
        if (!bottom && !top && f.tag != FacetTag::drained) continue;
        Point a = m.vertices[static_cast<std::size_t>(f.v[0])], b = m.vertices[static_cast<std::size_t>(f.v[1])];
        double len = std::hypot(b.x - a.x, b.z - a.z);
        int rock = f.cell[0];
        if (f.cell[1] >= 0 && m.cell_region[static_cast<std::size_t>(f.cell[1])].kind == RegionKind::block) rock = f.cell[1];
        Point P[3];
        int kloc = -1;
        for (int k = 0; k < 3; ++k) {
            P[k] = m.vertices[static_cast<std::size_t>(m.cells[static_cast<std::size_t>(rock)][static_cast<std::size_t>(k)])];
            if (m.cell_facets[static_cast<std::size_t>(rock)][static_cast<std::size_t>(k)] == static_cast<int>(fi)) kloc = k;
        }
        Eigen::Vector2d n = facet_normal(m, f);
        EdgeBasis E = edge_basis(bary(P), P, kloc, n);
        int dv = L.facet_dof[fi];
        for (int s = 0; s < 3; ++s) {
            double t = simpson_t[s], w = simpson_w[s] * len;
            Point x{a.x + t * (b.x - a.x), a.z + t * (b.z - a.z)};
            double vn = E(x.x, x.z).dot(n);
            if (f.tag == FacetTag::drained) {
                S.g[dv] -= w * d.p_drained(x.x, x.z) * vn;
                continue;
            }
            S.A(dv, dv) += w * d.alpha(x.x, x.z) * vn * vn;
            double sigma = bottom ? 1.0 : -1.0;
            double psi[2] = {1.0 - t, t};
            for (int e = 0; e < 2; ++e) {
                int qv = L.vertex_pdof[static_cast<std::size_t>(f.v[static_cast<std::size_t>(e)])];
                S.B(qv, dv) += sigma * w * psi[e] * vn;
                S.f[qv] += w * d.f_gamma(x.x, x.z) * psi[e];
            }
        }
    }
    return S;
}

}  // namespace oracle
