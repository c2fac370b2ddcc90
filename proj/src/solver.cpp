#include "fissure/solver.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "fe.hpp"

namespace fissure {

namespace {

bool is_limit(const SolutionField& s) { return s.layout->kind == SystemKind::limit; }

Eigen::Vector2d centroid(const MixedMesh& m, int c) {
    Eigen::Vector2d s = Eigen::Vector2d::Zero();
    for (int v : m.cells[static_cast<std::size_t>(c)]) s += Eigen::Vector2d(fe::vtx(m, v).x, fe::vtx(m, v).z);
    return s / 3.0;
}

template <class F>
void for_strip_cells(const SolutionField& s, F&& f) {
    const MixedMesh& m = *s.mesh;
    for (int c = 0; c < static_cast<int>(m.cells.size()); ++c)
        if (m.cell_region[static_cast<std::size_t>(c)].kind == RegionKind::strip) f(c);
}

}  // namespace

double SolutionField::rock_velocity_l2() const {
    const MixedMesh& m = *mesh;
    const auto& rule = fe::tri_rule();
    double s = 0.0;
    for (int c = 0; c < static_cast<int>(m.cells.size()); ++c) {
        if (m.cell_region[static_cast<std::size_t>(c)].kind != RegionKind::block) continue;
        fe::RT0Cell r = fe::rt0_cell(m, *layout, c);
        for (std::size_t q = 0; q < rule.w.size(); ++q) s += rule.w[q] * r.g.area * r.eval(u, r.g.at(rule.bary[q])).squaredNorm();
    }
    return std::sqrt(s);
}

double SolutionField::rock_divergence_l2() const {
    const MixedMesh& m = *mesh;
    double s = 0.0;
    for (int c = 0; c < static_cast<int>(m.cells.size()); ++c) {
        if (m.cell_region[static_cast<std::size_t>(c)].kind != RegionKind::block) continue;
        fe::RT0Cell r = fe::rt0_cell(m, *layout, c);
        double d = 0.0;
        for (int k = 0; k < 3; ++k) d += r.flux[static_cast<std::size_t>(k)] * u[r.dof[static_cast<std::size_t>(k)]];
        s += d * d / r.g.area;
    }
    return std::sqrt(s);
}

double SolutionField::gamma_flux_l2() const {
    double s = 0.0;
    for (std::size_t f = 0; f < mesh->facets.size(); ++f) {
        const Facet& fc = mesh->facets[f];
        if (fc.tag == FacetTag::gamma_bottom || fc.tag == FacetTag::gamma_top) {
            double v = u[layout->facet_dof[f]];
            s += fc.length * v * v;
        }
    }
    return std::sqrt(s);
}

double SolutionField::strip_velocity_l2() const {
    double s = 0.0;
    if (is_limit(*this)) {
        for (const auto& mm : manifolds)
            for (std::size_t k = 0; k + 1 < mm.xs.size(); ++k) {
                double v = u[layout->manifold_vdof[static_cast<std::size_t>(mm.fissure - 1)][k]];
                s += mm.height * (mm.xs[k + 1] - mm.xs[k]) * v * v;
            }
        return std::sqrt(s);
    }
    for_strip_cells(*this, [&](int c) {
        int d = layout->cell_vdof[static_cast<std::size_t>(c)];
        s += mesh->cell_area[static_cast<std::size_t>(c)] * (u[d] * u[d] + u[d + 1] * u[d + 1]);
    });
    return std::sqrt(s);
}

double SolutionField::strip_tangential_l2() const {
    if (is_limit(*this)) return strip_velocity_l2();
    double s = 0.0;
    for_strip_cells(*this, [&](int c) {
        int d = layout->cell_vdof[static_cast<std::size_t>(c)];
        double sl = fe::column_slope(*mesh, mesh->cell_region[static_cast<std::size_t>(c)].index,
                                     mesh->cell_column[static_cast<std::size_t>(c)]);
        double t = (u[d] + sl * u[d + 1]) / std::sqrt(1.0 + sl * sl);
        s += mesh->cell_area[static_cast<std::size_t>(c)] * t * t;
    });
    return std::sqrt(s);
}

double SolutionField::strip_normal_l2() const {
    if (is_limit(*this)) return 0.0;
    double s = 0.0;
    for_strip_cells(*this, [&](int c) {
        int d = layout->cell_vdof[static_cast<std::size_t>(c)];
        double sl = fe::column_slope(*mesh, mesh->cell_region[static_cast<std::size_t>(c)].index,
                                     mesh->cell_column[static_cast<std::size_t>(c)]);
        double n = (u[d + 1] - sl * u[d]) / std::sqrt(1.0 + sl * sl);
        s += mesh->cell_area[static_cast<std::size_t>(c)] * n * n;
    });
    return std::sqrt(s);
}

double SolutionField::rock_pressure_l2() const {
    double s = 0.0;
    for (std::size_t c = 0; c < mesh->cells.size(); ++c) {
        int q = layout->cell_pdof[c];
        if (q >= 0) s += mesh->cell_area[c] * p[q] * p[q];
    }
    return std::sqrt(s);
}

double SolutionField::rock_pressure_h1() const {
    const MixedMesh& m = *mesh;
    double s = rock_pressure_l2();
    s *= s;
    for (const Facet& fc : m.facets) {
        int q0 = layout->cell_pdof[static_cast<std::size_t>(fc.cell[0])];
        if (q0 < 0) continue;
        if (fc.tag == FacetTag::drained) {
            double d = 2.0 * m.cell_area[static_cast<std::size_t>(fc.cell[0])] / (3.0 * fc.length);
            s += fc.length / d * p[q0] * p[q0];
        } else if (fc.tag == FacetTag::interior) {
            int q1 = layout->cell_pdof[static_cast<std::size_t>(fc.cell[1])];
            double d = (centroid(m, fc.cell[0]) - centroid(m, fc.cell[1])).norm();
            s += fc.length / d * (p[q0] - p[q1]) * (p[q0] - p[q1]);
        }
    }
    return std::sqrt(s);
}

namespace {

// Strip pressure mass and stiffness energies, and the d_z part.
struct StripP {
    double mass = 0.0, stiff = 0.0, dz = 0.0;
};

StripP strip_pressure_parts(const SolutionField& s) {
    StripP out;
    if (is_limit(s)) {
        for (const auto& mm : s.manifolds) {
            const auto& pd = s.layout->manifold_pdof[static_cast<std::size_t>(mm.fissure - 1)];
            for (std::size_t k = 0; k + 1 < mm.xs.size(); ++k) {
                double dx = mm.xs[k + 1] - mm.xs[k];
                double a = s.p[pd[k]], b = s.p[pd[k + 1]];
                out.mass += mm.height * dx / 3.0 * (a * a + a * b + b * b);
                out.stiff += mm.height * (b - a) * (b - a) / dx;
            }
        }
        return out;
    }
    for_strip_cells(s, [&](int c) {
        fe::CellGeom g = fe::cell_geom(*s.mesh, c);
        double v[3];
        Eigen::Vector2d grad = Eigen::Vector2d::Zero();
        for (int k = 0; k < 3; ++k) {
            v[k] = s.p[s.layout->vertex_pdof[static_cast<std::size_t>(s.mesh->cells[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)])]];
            grad += v[k] * g.grad(k);
        }
        double sum = v[0] + v[1] + v[2], sq = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        out.mass += g.area / 12.0 * (sq + sum * sum);
        out.stiff += g.area * grad.squaredNorm();
        out.dz += g.area * grad.y() * grad.y();
    });
    return out;
}

}  // namespace

double SolutionField::strip_pressure_l2() const { return std::sqrt(strip_pressure_parts(*this).mass); }

double SolutionField::strip_pressure_h1() const {
    StripP s = strip_pressure_parts(*this);
    return std::sqrt(s.mass + s.stiff);
}

double SolutionField::dz_pressure_l2() const { return std::sqrt(strip_pressure_parts(*this).dz); }

double SolutionField::eta_l2() const {
    if (is_limit(*this) || eps == 0.0) return 0.0;
    return dz_pressure_l2() / eps;
}

SolutionField SolutionField::operator-(const SolutionField& o) const {
    if (u.size() != o.u.size() || p.size() != o.p.size() || layout->kind != o.layout->kind)
        throw Error(ErrorCode::invalid_argument, "solution fields live on different layouts");
    SolutionField d = *this;
    d.u -= o.u;
    d.p -= o.p;
    return d;
}

SolutionField SolutionField::scaled_strip_velocity(double factor) const {
    SolutionField d = *this;
    d.u.tail(layout->n_strip_vel) *= factor;
    return d;
}

SolutionField reconstruct_strip_fields(const SolutionField& lim) {
    if (!is_limit(lim)) throw Error(ErrorCode::invalid_argument, "reconstruction needs a limit solution");
    const MixedMesh& m = *lim.mesh;
    auto L = std::make_shared<DofLayout>(make_eps_layout(m));
    SolutionField r;
    r.mesh = lim.mesh;
    r.layout = L;
    r.eps = 0.0;
    r.residual = lim.residual;
    r.u = Eigen::VectorXd::Zero(L->n_vel());
    r.p = Eigen::VectorXd::Zero(L->n_pres());
    r.u.head(L->n_rock_vel) = lim.u.head(lim.layout->n_rock_vel);
    r.p.head(L->n_rock_p) = lim.p.head(lim.layout->n_rock_p);
    for (std::size_t c = 0; c < m.cells.size(); ++c) {
        const Region& reg = m.cell_region[c];
        if (reg.kind != RegionKind::strip) continue;
        int k = m.cell_column[c];
        const ManifoldMesh& mm = lim.manifolds[static_cast<std::size_t>(reg.index - 1)];
        double ut = lim.u[lim.layout->manifold_vdof[static_cast<std::size_t>(reg.index - 1)][static_cast<std::size_t>(k)]];
        double tx = mm.weight[static_cast<std::size_t>(k)] * ut;
        int d = L->cell_vdof[c];
        r.u[d] = tx;
        r.u[d + 1] = tx * mm.slope[static_cast<std::size_t>(k)];
        for (int v : m.cells[c]) {
            int fiber = v / m.layer_lines;
            r.p[L->vertex_pdof[static_cast<std::size_t>(v)]] =
                lim.p[lim.layout->manifold_pdof[static_cast<std::size_t>(reg.index - 1)][static_cast<std::size_t>(fiber)]];
        }
    }
    return r;
}

SolutionField solve_saddle(const DiscreteSystem& sys, double tol) {
    if (!(tol > 0.0 && tol <= 1e-6)) throw Error(ErrorCode::invalid_argument, "tol must lie in (0, 1e-6]");
    const int nv = sys.layout->n_vel(), np = sys.layout->n_pres(), n = nv + np;

    {
        Eigen::SimplicialLDLT<SpMat> ldlt(sys.A);
        bool ok = ldlt.info() == Eigen::Success;
        if (ok) {
            Eigen::VectorXd D = ldlt.vectorD();
            double dmax = D.cwiseAbs().maxCoeff();
            ok = dmax > 0.0 && D.minCoeff() > 1e-13 * dmax;
        }
        if (!ok)
            throw Error(ErrorCode::singular,
                        "velocity block is not positive definite (a* = 0 or broken assembly); the system is singular");
    }

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(sys.A.nonZeros() + 2 * sys.B.nonZeros()));
    for (int k = 0; k < sys.A.outerSize(); ++k)
        for (SpMat::InnerIterator it(sys.A, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < sys.B.outerSize(); ++k)
        for (SpMat::InnerIterator it(sys.B, k); it; ++it) {
            t.emplace_back(nv + it.row(), it.col(), it.value());
            t.emplace_back(it.col(), nv + it.row(), it.value());
        }
    SpMat K(n, n);
    K.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd b(n);
    b << sys.rhs_g, -sys.rhs_f;

    SolutionField s;
    s.mesh = sys.mesh;
    s.layout = sys.layout;
    s.manifolds = sys.manifolds;
    s.eps = sys.eps;
    double bn = b.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (bn > 0.0) {
        Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(K);
        lu.factorize(K);
        if (lu.info() != Eigen::Success)
            throw Error(ErrorCode::singular, "factorization failed: " + lu.lastErrorMessage());
        x = lu.solve(b);
        double rel = (b - K * x).norm() / bn;
        for (int it = 0; it < 5 && rel > 0.01 * tol; ++it) {
            x += lu.solve(b - K * x);
            rel = (b - K * x).norm() / bn;
        }
        if (!x.allFinite()) throw Error(ErrorCode::singular, "solution is not finite; the system is singular");
        s.residual = rel;
        if (rel > tol) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "relative residual %.3e above tolerance %.3e", rel, tol);
            throw Error(ErrorCode::tolerance, buf);
        }
    }
    s.u = x.head(nv);
    s.p = x.tail(np);
    return s;
}

double estimate_infsup(const Eigen::MatrixXd& B, const Eigen::MatrixXd& GV, const Eigen::MatrixXd& GQ) {
    if (B.rows() + B.cols() > 2000)
        throw Error(ErrorCode::too_large, "inf-sup estimate needs at most 2000 unknowns, got " +
                                              std::to_string(B.rows() + B.cols()));
    Eigen::LLT<Eigen::MatrixXd> llt(GV);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::singular, "velocity Gram matrix is not positive definite");
    Eigen::MatrixXd X = llt.solve(B.transpose());
    Eigen::MatrixXd S = B * X;
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, GQ, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::singular, "generalized eigenproblem failed");
    return std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
}

double estimate_infsup(const DiscreteSystem& sys) {
    if (sys.dimension() > 2000)
        throw Error(ErrorCode::too_large,
                    "inf-sup estimate needs at most 2000 unknowns, got " + std::to_string(sys.dimension()));
    return estimate_infsup(Eigen::MatrixXd(sys.B), Eigen::MatrixXd(sys.gram_v), Eigen::MatrixXd(sys.gram_q));
}

std::vector<double> conservation_residual(const SolutionField& sol, const DiscreteSystem& sys) {
    Eigen::VectorXd r = -(sys.B * sol.u) - sys.rhs_f;
    std::vector<double> out;
    for (std::size_t c = 0; c < sys.mesh->cells.size(); ++c) {
        int q = sys.layout->cell_pdof[c];
        if (q >= 0) out.push_back(std::fabs(r[q]));
    }
    return out;
}

InterfaceResiduals interface_residuals(const SolutionField& sol, const DiscreteSystem& sys) {
    const MixedMesh& m = *sys.mesh;
    const DofLayout& L = *sys.layout;
    InterfaceResiduals out;
    Eigen::VectorXd mom = sys.A * sol.u + sys.B.transpose() * sol.p - sys.rhs_g;
    Eigen::VectorXd bu = -(sys.B * sol.u);
    Eigen::VectorXd meas = Eigen::VectorXd::Zero(L.n_pres());
    std::vector<char> wall(static_cast<std::size_t>(L.n_pres()), 0);
    for (std::size_t f = 0; f < m.facets.size(); ++f) {
        const Facet& fc = m.facets[f];
        if (fc.tag != FacetTag::gamma_bottom && fc.tag != FacetTag::gamma_top) continue;
        out.stress.push_back(std::fabs(mom[L.facet_dof[f]]) / fc.length);
        std::array<int, 2> q;
        if (L.kind == SystemKind::limit) {
            const auto& nodes = L.manifold_pdof[static_cast<std::size_t>(fc.fissure - 1)];
            q = {nodes[static_cast<std::size_t>(fc.column)], nodes[static_cast<std::size_t>(fc.column + 1)]};
            // one wall carries the manifold measure
            if (fc.tag == FacetTag::gamma_bottom)
                for (int e : q) meas[e] += 0.5 * fc.length;
        } else {
            q = {L.vertex_pdof[static_cast<std::size_t>(fc.v[0])], L.vertex_pdof[static_cast<std::size_t>(fc.v[1])]};
            for (int e : q) meas[e] += 0.5 * fc.length;
        }
        for (int e : q) wall[static_cast<std::size_t>(e)] = 1;
    }
    for (int q = 0; q < L.n_pres(); ++q) {
        if (!wall[static_cast<std::size_t>(q)]) continue;
        out.flux_balance.push_back(bu[q] / meas[q]);
        out.flux_source.push_back(sys.rhs_f[q] / meas[q]);
        out.flux.push_back(std::fabs(bu[q] - sys.rhs_f[q]) / meas[q]);
    }
    for (double v : out.stress) out.max_stress = std::max(out.max_stress, v);
    for (double v : out.flux) out.max_flux = std::max(out.max_flux, v);
    return out;
}

double energy_defect(const SolutionField& sol, const DiscreteSystem& sys) {
    double e = sol.u.dot(sys.A * sol.u);
    double load = sol.u.dot(sys.rhs_g) + sol.p.dot(sys.rhs_f);
    return std::fabs(e - load) / std::max(1.0, std::fabs(e));
}

}  // namespace fissure
