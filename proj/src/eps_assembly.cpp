#include <cstdio>

#include "fe.hpp"
#include "rock_terms.hpp"

namespace fissure {

DiscreteSystem assemble_eps(std::shared_ptr<const MixedMesh> mesh_ptr, const ProblemData& data, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "invalid epsilon %g: must lie in (0, 1]", eps);
        throw Error(ErrorCode::invalid_argument, buf);
    }
    const MixedMesh& mesh = *mesh_ptr;
    validate_data(mesh, data);
    auto layout = std::make_shared<DofLayout>(make_eps_layout(mesh));
    const DofLayout& L = *layout;

    detail::Accum acc;
    acc.g = Eigen::VectorXd::Zero(L.n_vel());
    acc.f = Eigen::VectorXd::Zero(L.n_pres());
    detail::assemble_rock(mesh, data, L, [&](const Facet& fc) {
        int a = fc.v[0], b = fc.v[1];
        if (fe::vtx(mesh, a).x > fe::vtx(mesh, b).x) std::swap(a, b);
        return std::array<int, 2>{L.vertex_pdof[static_cast<std::size_t>(a)], L.vertex_pdof[static_cast<std::size_t>(b)]};
    }, acc);

    const auto& rule = fe::tri_rule();
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        const Region reg = mesh.cell_region[static_cast<std::size_t>(c)];
        if (reg.kind != RegionKind::strip) continue;
        fe::CellGeom g = fe::cell_geom(mesh, c);
        double s = fe::column_slope(mesh, reg.index, mesh.cell_column[static_cast<std::size_t>(c)]);
        int u1 = L.cell_vdof[static_cast<std::size_t>(c)], u2 = u1 + 1;
        std::array<int, 3> q;
        for (int k = 0; k < 3; ++k)
            q[static_cast<std::size_t>(k)] = L.vertex_pdof[static_cast<std::size_t>(mesh.cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)])];

        double a2 = 0.0, g1 = 0.0, g2 = 0.0, Fq[3] = {0.0, 0.0, 0.0};
        for (std::size_t sidx = 0; sidx < rule.w.size(); ++sidx) {
            Point x = g.at(rule.bary[sidx]);
            double w = rule.w[sidx] * g.area;
            a2 += w * fe::eval_checked(data.a2, x, "a2");
            g1 += w * fe::eval_checked(data.g_x, x, "g_x");
            g2 += w * fe::eval_checked(data.g_z, x, "g_z");
            double F = fe::eval_checked(data.F, x, "F");
            for (int k = 0; k < 3; ++k) Fq[k] += w * F * rule.bary[sidx][static_cast<std::size_t>(k)];
        }
        acc.A.emplace_back(u1, u1, eps * eps * a2);
        acc.A.emplace_back(u2, u2, eps * eps * a2);
        acc.GV.emplace_back(u1, u1, g.area);
        acc.GV.emplace_back(u2, u2, g.area);
        acc.g[u1] -= eps * g1;
        acc.g[u2] -= eps * g2;
        Eigen::Vector2d grad[3] = {g.grad(0), g.grad(1), g.grad(2)};
        for (int k = 0; k < 3; ++k) {
            int qk = q[static_cast<std::size_t>(k)];
            acc.B.emplace_back(qk, u1, g.area * (eps * grad[k].x() + (eps - 1.0) * s * grad[k].y()));
            acc.B.emplace_back(qk, u2, g.area * grad[k].y());
            acc.f[qk] += eps * Fq[k];
            for (int l = 0; l < 3; ++l) {
                double mass = g.area / 12.0 * (k == l ? 2.0 : 1.0);
                acc.GQ.emplace_back(qk, q[static_cast<std::size_t>(l)], mass + g.area * grad[k].dot(grad[l]));
            }
        }
    }

    DiscreteSystem sys;
    sys.mesh = std::move(mesh_ptr);
    sys.layout = std::move(layout);
    sys.eps = eps;
    detail::finish(sys, acc);
    return sys;
}

}  // namespace fissure
