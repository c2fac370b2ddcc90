#include "fissure/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace fissure {

namespace {

double min_angle(const Point& a, const Point& b, const Point& c) {
    auto ang = [](const Point& p, const Point& q, const Point& r) {
        double ux = q.x - p.x, uz = q.z - p.z, vx = r.x - p.x, vz = r.z - p.z;
        return std::atan2(std::fabs(ux * vz - uz * vx), ux * vx + uz * vz);
    };
    return std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
}

double tri_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x - a.x) * (c.z - a.z) - (c.x - a.x) * (b.z - a.z));
}

MixedMesh build_structured(std::shared_ptr<const FissuredMedium> medium, std::vector<double> xs, std::vector<int> layers,
                           double target_h) {
    const FissuredMedium& med = *medium;
    MixedMesh mesh;
    mesh.medium = medium;
    mesh.xs = std::move(xs);
    mesh.layers = std::move(layers);
    mesh.target_h = target_h;
    const int nreg = static_cast<int>(mesh.layers.size());
    mesh.layer_start.resize(static_cast<std::size_t>(nreg));
    int m_total = 0;
    for (int r = 0; r < nreg; ++r) {
        mesh.layer_start[static_cast<std::size_t>(r)] = m_total;
        m_total += mesh.layers[static_cast<std::size_t>(r)];
    }
    mesh.layer_lines = m_total + 1;
    const int nfib = static_cast<int>(mesh.xs.size());

    std::vector<int> region_of_line(static_cast<std::size_t>(m_total));
    for (int r = 0; r < nreg; ++r)
        for (int l = 0; l < mesh.layers[static_cast<std::size_t>(r)]; ++l)
            region_of_line[static_cast<std::size_t>(mesh.layer_start[static_cast<std::size_t>(r)] + l)] = r;

    mesh.vertices.resize(static_cast<std::size_t>(nfib * mesh.layer_lines));
    for (int k = 0; k < nfib; ++k) {
        double x = mesh.xs[static_cast<std::size_t>(k)];
        for (int m = 0; m <= m_total; ++m) {
            double z;
            if (m == m_total) {
                z = med.top();
            } else {
                int r = region_of_line[static_cast<std::size_t>(m)];
                int l = m - mesh.layer_start[static_cast<std::size_t>(r)];
                double lo = med.line(r, x);
                if (l == 0) {
                    z = lo;
                } else {
                    double hi = med.line(r + 1, x);
                    z = lo + (hi - lo) * l / mesh.layers[static_cast<std::size_t>(r)];
                }
            }
            mesh.vertices[static_cast<std::size_t>(mesh.vertex_id(k, m))] = {x, z};
        }
    }

    const int ncol = nfib - 1;
    const int nfis = med.fissure_count();
    mesh.strip_cells.assign(static_cast<std::size_t>(nfis), std::vector<std::vector<int>>(static_cast<std::size_t>(ncol)));
    for (int k = 0; k < ncol; ++k) {
        for (int m = 0; m < m_total; ++m) {
            int a = mesh.vertex_id(k, m), b = mesh.vertex_id(k + 1, m);
            int c = mesh.vertex_id(k + 1, m + 1), d = mesh.vertex_id(k, m + 1);
            const auto& V = mesh.vertices;
            auto P = [&](int id) { return V[static_cast<std::size_t>(id)]; };
            double qac = std::min(min_angle(P(a), P(b), P(c)), min_angle(P(a), P(c), P(d)));
            double qbd = std::min(min_angle(P(a), P(b), P(d)), min_angle(P(b), P(c), P(d)));
            std::array<std::array<int, 3>, 2> tris;
            if (qac >= qbd) tris = {{{a, b, c}, {a, c, d}}};
            else tris = {{{a, b, d}, {b, c, d}}};
            Region reg = FissuredMedium::region_of_layer(region_of_line[static_cast<std::size_t>(m)]);
            for (const auto& t : tris) {
                int id = static_cast<int>(mesh.cells.size());
                mesh.cells.push_back(t);
                mesh.cell_region.push_back(reg);
                mesh.cell_column.push_back(k);
                mesh.cell_area.push_back(tri_area(P(t[0]), P(t[1]), P(t[2])));
                if (reg.kind == RegionKind::strip)
                    mesh.strip_cells[static_cast<std::size_t>(reg.index - 1)][static_cast<std::size_t>(k)].push_back(id);
            }
        }
    }

    std::unordered_map<long long, int> edge_id;
    const long long nv = static_cast<long long>(mesh.vertices.size());
    mesh.cell_facets.resize(mesh.cells.size());
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        for (int lv = 0; lv < 3; ++lv) {
            int p = mesh.cells[c][static_cast<std::size_t>((lv + 1) % 3)];
            int q = mesh.cells[c][static_cast<std::size_t>((lv + 2) % 3)];
            long long key = std::min(p, q) * nv + std::max(p, q);
            auto [it, fresh] = edge_id.try_emplace(key, static_cast<int>(mesh.facets.size()));
            if (fresh) {
                Facet f;
                f.v = {std::min(p, q), std::max(p, q)};
                f.cell[0] = static_cast<int>(c);
                mesh.facets.push_back(f);
            } else {
                mesh.facets[static_cast<std::size_t>(it->second)].cell[1] = static_cast<int>(c);
            }
            mesh.cell_facets[c][static_cast<std::size_t>(lv)] = it->second;
        }
    }

    mesh.bottom_wall.assign(static_cast<std::size_t>(nfis), std::vector<int>(static_cast<std::size_t>(ncol), -1));
    mesh.top_wall.assign(static_cast<std::size_t>(nfis), std::vector<int>(static_cast<std::size_t>(ncol), -1));
    for (std::size_t fi = 0; fi < mesh.facets.size(); ++fi) {
        Facet& f = mesh.facets[fi];
        const Point& p0 = mesh.vertices[static_cast<std::size_t>(f.v[0])];
        const Point& p1 = mesh.vertices[static_cast<std::size_t>(f.v[1])];
        int k0 = f.v[0] / mesh.layer_lines, k1 = f.v[1] / mesh.layer_lines;
        if (k0 != k1) f.column = std::min(k0, k1);
        double dx = p1.x - p0.x, dz = p1.z - p0.z;
        f.length = std::hypot(dx, dz);
        Eigen::Vector2d n(-dz / f.length, dx / f.length);
        if (f.cell[1] < 0) {
            const auto& t = mesh.cells[static_cast<std::size_t>(f.cell[0])];
            double cx = 0.0, cz = 0.0;
            for (int v : t) {
                cx += mesh.vertices[static_cast<std::size_t>(v)].x / 3.0;
                cz += mesh.vertices[static_cast<std::size_t>(v)].z / 3.0;
            }
            if (n.x() * (0.5 * (p0.x + p1.x) - cx) + n.y() * (0.5 * (p0.z + p1.z) - cz) < 0.0) n = -n;
            f.tag = mesh.cell_region[static_cast<std::size_t>(f.cell[0])].kind == RegionKind::block ? FacetTag::drained
                                                                                                     : FacetTag::lateral_wall;
        } else {
            if (n.y() < 0.0 || (n.y() == 0.0 && n.x() < 0.0)) n = -n;
            Region r0 = mesh.cell_region[static_cast<std::size_t>(f.cell[0])];
            Region r1 = mesh.cell_region[static_cast<std::size_t>(f.cell[1])];
            if (r0.kind != r1.kind) {
                Region blk = r0.kind == RegionKind::block ? r0 : r1;
                Region str = r0.kind == RegionKind::strip ? r0 : r1;
                f.fissure = str.index;
                auto& walls = blk.index == str.index - 1 ? mesh.bottom_wall : mesh.top_wall;
                f.tag = blk.index == str.index - 1 ? FacetTag::gamma_bottom : FacetTag::gamma_top;
                walls[static_cast<std::size_t>(str.index - 1)][static_cast<std::size_t>(f.column)] = static_cast<int>(fi);
            }
        }
        f.normal = n;
    }
    return mesh;
}

}  // namespace

const char* facet_tag_name(FacetTag t) {
    switch (t) {
        case FacetTag::interior: return "interior";
        case FacetTag::gamma_bottom: return "gamma_bottom";
        case FacetTag::gamma_top: return "gamma_top";
        case FacetTag::drained: return "drained";
        case FacetTag::lateral_wall: return "lateral_wall";
    }
    return "?";
}

double MixedMesh::min_angle_degrees() const {
    double m = std::numbers::pi;
    for (const auto& t : cells)
        m = std::min(m, min_angle(vertices[static_cast<std::size_t>(t[0])], vertices[static_cast<std::size_t>(t[1])],
                                  vertices[static_cast<std::size_t>(t[2])]));
    return m * 180.0 / std::numbers::pi;
}

double MixedMesh::region_area(Region r) const {
    double s = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (cell_region[c] == r) s += cell_area[c];
    return s;
}

double MixedMesh::gamma_length(int fissure, FacetTag which) const {
    double s = 0.0;
    for (const auto& f : facets)
        if (f.fissure == fissure && f.tag == which) s += f.length;
    return s;
}

MixedMesh build_mesh(std::shared_ptr<const FissuredMedium> medium, double target_h) {
    const FissuredMedium& med = *medium;
    if (!(std::isfinite(target_h) && target_h > 0.0))
        throw Error(ErrorCode::invalid_argument, "target_h must be positive");
    double hmin = std::numeric_limits<double>::infinity();
    for (const auto& f : med.fissures()) hmin = std::min(hmin, f.height);
    if (med.fissure_count() > 0 && target_h > 0.5 * hmin * (1.0 + 1e-12)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "target_h = %g exceeds min(h_i)/2 = %g", target_h, 0.5 * hmin);
        throw Error(ErrorCode::target_too_coarse, buf);
    }

    std::vector<double> brk{med.x_lo(), med.x_hi()};
    for (const auto& f : med.fissures())
        brk.insert(brk.end(), f.curve.breakpoints().begin(), f.curve.breakpoints().end());
    std::sort(brk.begin(), brk.end());
    double width = med.x_hi() - med.x_lo();
    std::vector<double> uniq;
    for (double b : brk)
        if (uniq.empty() || b - uniq.back() > 1e-12 * width) uniq.push_back(b);
    uniq.back() = med.x_hi();
    std::vector<double> xs{uniq.front()};
    for (std::size_t s = 0; s + 1 < uniq.size(); ++s) {
        double a = uniq[s], b = uniq[s + 1];
        int n = std::max(1, static_cast<int>(std::ceil((b - a) / target_h - 1e-9)));
        for (int j = 1; j < n; ++j) xs.push_back(a + (b - a) * j / n);
        xs.push_back(b);
    }

    std::vector<int> layers;
    for (int r = 0; r + 1 < med.line_count(); ++r) {
        double mean = 0.0;
        for (double x : xs) mean += (med.line(r + 1, x) - med.line(r, x)) / static_cast<double>(xs.size());
        layers.push_back(std::max(2, static_cast<int>(std::ceil(mean / target_h - 1e-9))));
    }

    MixedMesh mesh = build_structured(std::move(medium), std::move(xs), std::move(layers), target_h);
    double q = mesh.min_angle_degrees();
    if (q < 15.0) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "minimum angle %.3g degrees is below 15 degrees", q);
        throw Error(ErrorCode::mesh_quality, buf);
    }
    return mesh;
}

MixedMesh build_mesh(const FissuredMedium& medium, double target_h) {
    return build_mesh(std::make_shared<const FissuredMedium>(medium), target_h);
}

MixedMesh refine(const MixedMesh& mesh) {
    std::vector<double> xs;
    for (std::size_t k = 0; k < mesh.xs.size(); ++k) {
        if (k > 0) xs.push_back(0.5 * (mesh.xs[k - 1] + mesh.xs[k]));
        xs.push_back(mesh.xs[k]);
    }
    std::vector<int> layers = mesh.layers;
    for (int& n : layers) n *= 2;
    return build_structured(mesh.medium, std::move(xs), std::move(layers), 0.5 * mesh.target_h);
}

void check_mesh(const MixedMesh& mesh) {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::mesh_quality, "mesh check failed: " + m); };
    for (std::size_t c = 0; c < mesh.cells.size(); ++c)
        if (!(mesh.cell_area[c] > 0.0)) fail("cell " + std::to_string(c) + " has non-positive area");
    for (std::size_t fi = 0; fi < mesh.facets.size(); ++fi) {
        const Facet& f = mesh.facets[fi];
        bool boundary = f.cell[1] < 0;
        bool tagged_boundary = f.tag == FacetTag::drained || f.tag == FacetTag::lateral_wall;
        if (boundary != tagged_boundary) fail("facet " + std::to_string(fi) + " tag disagrees with its cell count");
        if (f.tag == FacetTag::gamma_bottom || f.tag == FacetTag::gamma_top) {
            if (!(f.normal.y() > 0.0)) fail("gamma facet normal is not upward");
            int rock = mesh.cell_region[static_cast<std::size_t>(f.cell[0])].kind == RegionKind::block ? f.cell[0] : f.cell[1];
            int strip = rock == f.cell[0] ? f.cell[1] : f.cell[0];
            if (mesh.cell_region[static_cast<std::size_t>(strip)].kind != RegionKind::strip)
                fail("gamma facet not shared by one rock and one strip cell");
            const auto& t = mesh.cells[static_cast<std::size_t>(rock)];
            double cz = 0.0, cx = 0.0;
            for (int v : t) {
                cx += mesh.vertices[static_cast<std::size_t>(v)].x / 3.0;
                cz += mesh.vertices[static_cast<std::size_t>(v)].z / 3.0;
            }
            const Point& p0 = mesh.vertices[static_cast<std::size_t>(f.v[0])];
            double side = f.normal.x() * (cx - p0.x) + f.normal.y() * (cz - p0.z);
            if (f.tag == FacetTag::gamma_bottom && side >= 0.0) fail("bottom-wall rock cell not on the -n side");
            if (f.tag == FacetTag::gamma_top && side <= 0.0) fail("top-wall rock cell not on the +n side");
        }
    }
}

std::string format_mesh(const MixedMesh& mesh) {
    std::ostringstream os;
    os.precision(17);
    os << "# fissure mesh v1\n";
    os << "vertices " << mesh.vertices.size() << '\n';
    for (const auto& v : mesh.vertices) os << v.x << ' ' << v.z << '\n';
    os << "cells " << mesh.cells.size() << '\n';
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
        const auto& t = mesh.cells[c];
        const Region& r = mesh.cell_region[c];
        os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << (r.kind == RegionKind::block ? "block " : "strip ") << r.index
           << '\n';
    }
    os << "facets " << mesh.facets.size() << '\n';
    for (const auto& f : mesh.facets)
        os << f.v[0] << ' ' << f.v[1] << ' ' << facet_tag_name(f.tag) << ' ' << f.fissure << ' ' << f.cell[0] << ' '
           << f.cell[1] << ' ' << f.normal.x() << ' ' << f.normal.y() << ' ' << f.length << '\n';
    return os.str();
}

void write_mesh(const MixedMesh& mesh, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::io, "cannot write mesh file '" + path + "'");
    f << format_mesh(mesh);
    if (!f) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace fissure
