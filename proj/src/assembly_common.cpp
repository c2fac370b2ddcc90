#include <cmath>
#include <cstdio>
#include <fstream>

#include "fe.hpp"
#include "rock_terms.hpp"

namespace fissure {

bool ProblemData::zero_loads() const {
    return F.is_zero_constant() && g_x.is_zero_constant() && g_z.is_zero_constant() && f_gamma.is_zero_constant() &&
           p_drained.is_zero_constant();
}

void validate_data(const MixedMesh& mesh, const ProblemData& data) {
    const auto& rule = fe::tri_rule();
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        auto g = fe::cell_geom(mesh, c);
        bool rock = mesh.cell_region[static_cast<std::size_t>(c)].kind == RegionKind::block;
        const Expr& a = rock ? data.a1 : data.a2;
        for (const auto& b : rule.bary) {
            Point p = g.at(b);
            double v = fe::eval_checked(a, p, rock ? "a1" : "a2");
            if (!(v > 0.0)) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "%s = %g is not positive at (%g, %g)", rock ? "a1" : "a2", v, p.x, p.z);
                throw Error(ErrorCode::coefficient, buf);
            }
        }
    }
    for (const auto& f : mesh.facets) {
        if (f.tag != FacetTag::gamma_bottom && f.tag != FacetTag::gamma_top) continue;
        Point a = fe::vtx(mesh, f.v[0]), b = fe::vtx(mesh, f.v[1]);
        for (double t : fe::gauss_t) {
            Point p{a.x + t * (b.x - a.x), a.z + t * (b.z - a.z)};
            double v = fe::eval_checked(data.alpha, p, "alpha");
            if (!(v >= 0.0)) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "alpha = %g is negative at (%g, %g)", v, p.x, p.z);
                throw Error(ErrorCode::coefficient, buf);
            }
        }
    }
}

DofLayout make_eps_layout(const MixedMesh& mesh) {
    DofLayout L;
    L.kind = SystemKind::eps;
    L.facet_dof.assign(mesh.facets.size(), -1);
    for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
        const Facet& fc = mesh.facets[f];
        bool rock = mesh.cell_region[static_cast<std::size_t>(fc.cell[0])].kind == RegionKind::block ||
                    (fc.cell[1] >= 0 && mesh.cell_region[static_cast<std::size_t>(fc.cell[1])].kind == RegionKind::block);
        if (rock) L.facet_dof[f] = L.n_rock_vel++;
    }
    L.cell_vdof.assign(mesh.cells.size(), -1);
    L.cell_pdof.assign(mesh.cells.size(), -1);
    L.vertex_pdof.assign(mesh.vertices.size(), -1);
    int next = L.n_rock_vel;
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        if (mesh.cell_region[c].kind == RegionKind::strip) {
            L.cell_vdof[c] = next;
            next += 2;
        } else {
            L.cell_pdof[c] = L.n_rock_p++;
        }
    }
    L.n_strip_vel = next - L.n_rock_vel;
    std::vector<char> in_strip(mesh.vertices.size(), 0);
    for (std::size_t c = 0; c < mesh.cells.size(); ++c)
        if (mesh.cell_region[c].kind == RegionKind::strip)
            for (int v : mesh.cells[c]) in_strip[static_cast<std::size_t>(v)] = 1;
    int np = L.n_rock_p;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        if (in_strip[v]) L.vertex_pdof[v] = np++;
    L.n_strip_p = np - L.n_rock_p;
    return L;
}

DofLayout make_limit_layout(const MixedMesh& mesh) {
    DofLayout L = make_eps_layout(mesh);
    L.kind = SystemKind::limit;
    std::fill(L.cell_vdof.begin(), L.cell_vdof.end(), -1);
    std::fill(L.vertex_pdof.begin(), L.vertex_pdof.end(), -1);
    int nf = mesh.medium->fissure_count();
    int ncol = mesh.columns();
    int v = L.n_rock_vel, p = L.n_rock_p;
    L.manifold_vdof.assign(static_cast<std::size_t>(nf), {});
    L.manifold_pdof.assign(static_cast<std::size_t>(nf), {});
    for (int i = 0; i < nf; ++i) {
        for (int k = 0; k < ncol; ++k) L.manifold_vdof[static_cast<std::size_t>(i)].push_back(v++);
        for (int k = 0; k <= ncol; ++k) L.manifold_pdof[static_cast<std::size_t>(i)].push_back(p++);
    }
    L.n_strip_vel = v - L.n_rock_vel;
    L.n_strip_p = p - L.n_rock_p;
    return L;
}

namespace detail {

void assemble_rock(const MixedMesh& mesh, const ProblemData& data, const DofLayout& L, const WallDofs& wall, Accum& acc) {
    const auto& rule = fe::tri_rule();
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
        if (mesh.cell_region[static_cast<std::size_t>(c)].kind != RegionKind::block) continue;
        fe::RT0Cell r = fe::rt0_cell(mesh, L, c);
        int q = L.cell_pdof[static_cast<std::size_t>(c)];
        double M[3][3] = {}, U[3][3] = {}, G[3] = {}, Fint = 0.0;
        for (std::size_t s = 0; s < rule.w.size(); ++s) {
            Point x = r.g.at(rule.bary[s]);
            double w = rule.w[s] * r.g.area;
            double a1 = fe::eval_checked(data.a1, x, "a1");
            Eigen::Vector2d gv(fe::eval_checked(data.g_x, x, "g_x"), fe::eval_checked(data.g_z, x, "g_z"));
            Fint += w * fe::eval_checked(data.F, x, "F");
            Eigen::Vector2d phi[3] = {r.phi(0, x), r.phi(1, x), r.phi(2, x)};
            for (int k = 0; k < 3; ++k) {
                G[k] += w * gv.dot(phi[k]);
                for (int l = 0; l < 3; ++l) {
                    M[k][l] += w * a1 * phi[k].dot(phi[l]);
                    U[k][l] += w * phi[k].dot(phi[l]);
                }
            }
        }
        for (int k = 0; k < 3; ++k) {
            int dk = r.dof[static_cast<std::size_t>(k)];
            for (int l = 0; l < 3; ++l) {
                int dl = r.dof[static_cast<std::size_t>(l)];
                acc.A.emplace_back(dk, dl, M[k][l]);
                acc.GV.emplace_back(dk, dl, U[k][l] + r.flux[static_cast<std::size_t>(k)] * r.flux[static_cast<std::size_t>(l)] / r.g.area);
            }
            acc.B.emplace_back(q, dk, -r.flux[static_cast<std::size_t>(k)]);
            acc.g[dk] -= G[k];
        }
        acc.f[q] += Fint;
        acc.GQ.emplace_back(q, q, r.g.area);
    }

    for (const Facet& fc : mesh.facets) {
        bool bottom = fc.tag == FacetTag::gamma_bottom, top = fc.tag == FacetTag::gamma_top;
        if (!bottom && !top && fc.tag != FacetTag::drained) continue;
        int d = L.facet_dof[static_cast<std::size_t>(&fc - mesh.facets.data())];
        Point a = fe::vtx(mesh, fc.v[0]), b = fe::vtx(mesh, fc.v[1]);
        if (a.x > b.x) std::swap(a, b);
        if (fc.tag == FacetTag::drained) {
            double s = 0.0;
            for (int j = 0; j < 3; ++j) {
                double t = fe::gauss_t[static_cast<std::size_t>(j)];
                s += fe::gauss_w[static_cast<std::size_t>(j)] *
                     fe::eval_checked(data.p_drained, {a.x + t * (b.x - a.x), a.z + t * (b.z - a.z)}, "drained pressure");
            }
            acc.g[d] -= s * fc.length;
            continue;
        }
        std::array<int, 2> qd = wall(fc);
        double alpha = 0.0, src[2] = {0.0, 0.0};
        for (int j = 0; j < 3; ++j) {
            double t = fe::gauss_t[static_cast<std::size_t>(j)], w = fe::gauss_w[static_cast<std::size_t>(j)] * fc.length;
            Point x{a.x + t * (b.x - a.x), a.z + t * (b.z - a.z)};
            alpha += w * fe::eval_checked(data.alpha, x, "alpha");
            double fg = fe::eval_checked(data.f_gamma, x, "f_gamma");
            src[0] += w * fg * (1.0 - t);
            src[1] += w * fg * t;
        }
        acc.A.emplace_back(d, d, alpha);
        acc.GV.emplace_back(d, d, fc.length);
        double sign = bottom ? 1.0 : -1.0;
        for (int e = 0; e < 2; ++e) {
            acc.B.emplace_back(qd[static_cast<std::size_t>(e)], d, sign * 0.5 * fc.length);
            acc.f[qd[static_cast<std::size_t>(e)]] += src[e];
        }
    }
}

void finish(DiscreteSystem& sys, Accum& acc) {
    const DofLayout& L = *sys.layout;
    int nv = L.n_vel(), np = L.n_pres();
    sys.A.resize(nv, nv);
    sys.A.setFromTriplets(acc.A.begin(), acc.A.end());
    sys.B.resize(np, nv);
    sys.B.setFromTriplets(acc.B.begin(), acc.B.end());
    sys.gram_v.resize(nv, nv);
    sys.gram_v.setFromTriplets(acc.GV.begin(), acc.GV.end());
    sys.gram_q.resize(np, np);
    sys.gram_q.setFromTriplets(acc.GQ.begin(), acc.GQ.end());
    sys.rhs_g = std::move(acc.g);
    sys.rhs_f = std::move(acc.f);
}

}  // namespace detail

DiscreteSystem apply_bc(const DiscreteSystem& system, const MixedMesh& mesh, BcReport* report) {
    BcReport rep;
    const DofLayout& L = *system.layout;
    double resid = 0.0;
    for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
        const Facet& fc = mesh.facets[f];
        if (fc.tag == FacetTag::drained) {
            ++rep.drained_facets;
            if (L.facet_dof[f] < 0) rep.note += "drained facet without flux unknown; ";
            // The column of a drained flux must hold only the cell divergence -sigma |e|;
            // anything else would be a boundary pressure term.
            int d = L.facet_dof[f];
            double col = 0.0;
            int nnz = 0;
            for (SpMat::InnerIterator it(system.B, d); it; ++it) {
                col += std::fabs(it.value());
                ++nnz;
            }
            resid = std::max(resid, std::fabs(col - fc.length) + (nnz == 1 ? 0.0 : 1.0));
        } else if (fc.tag == FacetTag::lateral_wall) {
            ++rep.lateral_wall_facets;
            if (L.facet_dof[f] >= 0) ++rep.lateral_wall_unknowns;
        }
    }
    rep.drained_boundary_residual = resid;
    rep.natural_bcs_verified = rep.lateral_wall_unknowns == 0 && rep.note.empty() && resid <= 1e-14;
    if (rep.natural_bcs_verified) rep.note = "natural BCs verified";
    if (report) *report = rep;
    return system;
}

void write_system_triplets(const DiscreteSystem& system, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write system dump '" + path + "'");
    out.precision(17);
    out << "# fissure system v1 kind=" << (system.layout->kind == SystemKind::eps ? "eps" : "limit")
        << " eps=" << system.eps << " n_vel=" << system.layout->n_vel() << " n_pres=" << system.layout->n_pres() << '\n';
    auto dump = [&](const char* tag, const SpMat& M) {
        for (int k = 0; k < M.outerSize(); ++k)
            for (SpMat::InnerIterator it(M, k); it; ++it) out << tag << ' ' << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    };
    dump("A", system.A);
    dump("B", system.B);
    for (int i = 0; i < system.rhs_g.size(); ++i) out << "g " << i << ' ' << system.rhs_g[i] << '\n';
    for (int i = 0; i < system.rhs_f.size(); ++i) out << "f " << i << ' ' << system.rhs_f[i] << '\n';
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace fissure
