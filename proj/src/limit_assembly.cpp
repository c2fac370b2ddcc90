#include <cmath>
#include <cstdio>

#include "fe.hpp"
#include "rock_terms.hpp"

namespace fissure {

std::vector<ManifoldMesh> build_manifolds(const MixedMesh& mesh) {
    std::vector<ManifoldMesh> out;
    const FissuredMedium& med = *mesh.medium;
    for (int i = 1; i <= med.fissure_count(); ++i) {
        ManifoldMesh m;
        m.fissure = i;
        m.height = med.fissure(i).height;
        m.xs = mesh.xs;
        int line = mesh.layer_start[static_cast<std::size_t>(2 * i - 1)];
        double below = med.height_below(i);
        for (int k = 0; k < static_cast<int>(mesh.xs.size()); ++k)
            m.lambda.push_back(fe::vtx(mesh, mesh.vertex_id(k, line)).z - below);
        for (int k = 0; k < mesh.columns(); ++k) {
            double s = fe::column_slope(mesh, i, k);
            m.slope.push_back(s);
            m.weight.push_back(1.0 / std::sqrt(1.0 + s * s));
        }
        out.push_back(std::move(m));
    }
    return out;
}

void check_limit_data(const MixedMesh& mesh, const ProblemData& data) {
    const FissuredMedium& med = *mesh.medium;
    for (int i = 1; i <= med.fissure_count(); ++i) {
        const Fissure& f = med.fissure(i);
        for (int k = 0; k < mesh.columns(); ++k) {
            double x = 0.5 * (mesh.xs[static_cast<std::size_t>(k)] + mesh.xs[static_cast<std::size_t>(k + 1)]);
            double zeta = f.curve.value(x), s = f.curve.slope(x);
            double w = 1.0 / std::sqrt(1.0 + s * s);
            double a_ref = 0.0, g_ref = 0.0;
            for (int j = 0; j < 5; ++j) {
                Point p{x, zeta + f.height * j / 4.0};
                double a = fe::eval_checked(data.a2, p, "a2");
                double gt = w * (fe::eval_checked(data.g_x, p, "g_x") + s * fe::eval_checked(data.g_z, p, "g_z"));
                if (j == 0) {
                    a_ref = a;
                    g_ref = gt;
                    continue;
                }
                const char* bad = nullptr;
                if (std::fabs(a - a_ref) > 1e-10 * std::max(1.0, std::fabs(a_ref))) bad = "a2";
                else if (std::fabs(gt - g_ref) > 1e-10 * std::max(1.0, std::fabs(g_ref))) bad = "tangential g";
                if (bad) {
                    char buf[200];
                    std::snprintf(buf, sizeof buf, "%s varies along the fiber of fissure %d at (%.17g, %.17g)", bad, i, p.x, p.z);
                    throw Error(ErrorCode::limit_data, buf);
                }
            }
        }
    }
}

DiscreteSystem assemble_limit(std::shared_ptr<const MixedMesh> mesh_ptr, const std::vector<ManifoldMesh>& manifolds,
                              const ProblemData& data) {
    const MixedMesh& mesh = *mesh_ptr;
    validate_data(mesh, data);
    check_limit_data(mesh, data);
    auto layout = std::make_shared<DofLayout>(make_limit_layout(mesh));
    const DofLayout& L = *layout;
    const FissuredMedium& med = *mesh.medium;
    if (static_cast<int>(manifolds.size()) != med.fissure_count())
        throw Error(ErrorCode::invalid_argument, "one manifold mesh per fissure required");

    detail::Accum acc;
    acc.g = Eigen::VectorXd::Zero(L.n_vel());
    acc.f = Eigen::VectorXd::Zero(L.n_pres());
    detail::assemble_rock(mesh, data, L, [&](const Facet& fc) {
        const auto& nodes = L.manifold_pdof[static_cast<std::size_t>(fc.fissure - 1)];
        return std::array<int, 2>{nodes[static_cast<std::size_t>(fc.column)], nodes[static_cast<std::size_t>(fc.column + 1)]};
    }, acc);

    for (const ManifoldMesh& m : manifolds) {
        const Fissure& f = med.fissure(m.fissure);
        const auto& vd = L.manifold_vdof[static_cast<std::size_t>(m.fissure - 1)];
        const auto& pd = L.manifold_pdof[static_cast<std::size_t>(m.fissure - 1)];
        for (std::size_t k = 0; k + 1 < m.xs.size(); ++k) {
            double x0 = m.xs[k], dx = m.xs[k + 1] - x0;
            double s = m.slope[k], w = m.weight[k], h = m.height;
            double a2 = 0.0, gt = 0.0;
            for (int j = 0; j < 3; ++j) {
                double x = x0 + fe::gauss_t[static_cast<std::size_t>(j)] * dx;
                double wq = fe::gauss_w[static_cast<std::size_t>(j)] * dx;
                Point p{x, f.curve.value(x) + 0.5 * h};
                a2 += wq * fe::eval_checked(data.a2, p, "a2");
                gt += wq * w * (fe::eval_checked(data.g_x, p, "g_x") + s * fe::eval_checked(data.g_z, p, "g_z"));
            }
            int t = vd[k];
            acc.A.emplace_back(t, t, h * a2);
            acc.GV.emplace_back(t, t, h * dx);
            acc.g[t] -= h * gt;
            acc.B.emplace_back(pd[k], t, -h * w);
            acc.B.emplace_back(pd[k + 1], t, h * w);
            double mass[2][2] = {{dx / 3.0, dx / 6.0}, {dx / 6.0, dx / 3.0}};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    acc.GQ.emplace_back(pd[k + static_cast<std::size_t>(a)], pd[k + static_cast<std::size_t>(b)],
                                        h * (mass[a][b] + (a == b ? 1.0 : -1.0) / dx));
        }
    }

    DiscreteSystem sys;
    sys.mesh = std::move(mesh_ptr);
    sys.layout = std::move(layout);
    sys.manifolds = manifolds;
    sys.eps = 0.0;
    detail::finish(sys, acc);
    return sys;
}

}  // namespace fissure
