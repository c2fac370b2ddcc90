#include "fissure/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

#include "fe.hpp"

namespace fissure {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// beta_h on the finest mesh of the same geometry that fits the dense estimator
double companion_infsup(const FissuredMedium& medium, const ProblemData& data, double target_h, double eps) {
    double hmin = std::numeric_limits<double>::infinity();
    for (const auto& f : medium.fissures()) hmin = std::min(hmin, f.height);
    auto shared = std::make_shared<const FissuredMedium>(medium);
    for (double h = target_h;; h *= 2.0) {
        auto mesh = std::make_shared<const MixedMesh>(build_mesh(shared, h));
        DiscreteSystem sys = eps > 0.0 ? assemble_eps(mesh, data, eps) : assemble_limit(mesh, build_manifolds(*mesh), data);
        if (sys.dimension() <= 2000) return estimate_infsup(sys);
        if (2.0 * h > 0.5 * hmin) return nan_v;
    }
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

double ratio(double t, double n) {
    if (t == 0.0) return 0.0;
    return t / std::max(n, std::numeric_limits<double>::min());
}

}  // namespace

ConvergenceReport run_sweep(const SweepConfig& cfg, ConvergenceReport* partial) {
    if (cfg.eps.empty()) throw Error(ErrorCode::invalid_argument, "eps list is empty");
    auto medium = std::make_shared<const FissuredMedium>(cfg.medium);
    MixedMesh m = build_mesh(medium, cfg.target_h);
    for (int r = 0; r < cfg.refinements; ++r) m = refine(m);
    auto mesh = std::make_shared<const MixedMesh>(std::move(m));

    ConvergenceReport rep;
    DiscreteSystem lim_sys = assemble_limit(mesh, build_manifolds(*mesh), cfg.data);
    SolutionField lim = solve_saddle(lim_sys, cfg.tol);
    SolutionField recon = reconstruct_strip_fields(lim);
    rep.limit_tangential_L2 = lim.strip_tangential_l2();
    try {
        rep.limit_beta_h = companion_infsup(cfg.medium, cfg.data, cfg.target_h, 0.0);
    } catch (const Error&) {
        rep.limit_beta_h = nan_v;
    }

    auto one = [&](double eps) {
        ReportRow row;
        row.eps = eps;
        DiscreteSystem sys = assemble_eps(mesh, cfg.data, eps);
        SolutionField s = solve_saddle(sys, cfg.tol);
        SolutionField d = s.scaled_strip_velocity(eps) - recon;
        row.err_u1_L2 = d.rock_velocity_l2();
        row.err_eu2_L2 = d.strip_velocity_l2();
        row.err_p1_H1 = d.rock_pressure_h1();
        row.err_p2_H1 = d.strip_pressure_h1();
        row.ratio_tau_n = ratio(s.strip_tangential_l2(), s.strip_normal_l2());
        row.eta_L2 = s.eta_l2();
        row.u1_L2 = s.rock_velocity_l2();
        row.eu2_L2 = eps * s.strip_velocity_l2();
        row.p1_H1 = s.rock_pressure_h1();
        row.p2_H1 = s.strip_pressure_h1();
        row.dz_p2_L2 = s.dz_pressure_l2();
        row.div_u1_L2 = s.rock_divergence_l2();
        try {
            row.beta_h = companion_infsup(cfg.medium, cfg.data, cfg.target_h, eps);
        } catch (const Error&) {
            row.beta_h = nan_v;
        }
        return row;
    };

    std::vector<std::future<ReportRow>> tasks;
    std::vector<ReportRow> rows(cfg.eps.size());
    std::size_t batch = cfg.threads == 0 ? cfg.eps.size() : cfg.threads;
    std::unique_ptr<Error> first_error;
    for (std::size_t start = 0; start < cfg.eps.size(); start += batch) {
        tasks.clear();
        std::size_t end = std::min(cfg.eps.size(), start + batch);
        for (std::size_t k = start; k < end; ++k) tasks.push_back(std::async(std::launch::async, one, cfg.eps[k]));
        for (std::size_t k = start; k < end; ++k) {
            try {
                rows[k] = tasks[k - start].get();
            } catch (const Error& e) {
                ReportRow r;
                r.eps = cfg.eps[k];
                r.err_u1_L2 = r.err_eu2_L2 = r.err_p1_H1 = r.err_p2_H1 = r.ratio_tau_n = r.eta_L2 = r.beta_h = nan_v;
                r.status = std::string("failed: ") + error_code_name(e.code()) + ": " + sanitize(e.what());
                rows[k] = r;
                if (!first_error) first_error = std::make_unique<Error>(e);
            }
        }
    }
    rep.rows = std::move(rows);
    rep.velocity_unknowns = lim_sys.layout->n_vel();
    rep.pressure_unknowns = lim_sys.layout->n_pres();
    rep.complete = !first_error;
    if (!cfg.output_dir.empty()) emit_report(rep, cfg.output_dir);
    if (partial) *partial = rep;
    if (first_error) throw *first_error;
    return rep;
}

void emit_report(const ConvergenceReport& rep, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create directory '" + dir + "': " + ec.message());
    auto open = [&](const std::string& name) {
        std::string path = (std::filesystem::path(dir) / name).string();
        std::ofstream f(path);
        if (!f) throw Error(ErrorCode::io, "cannot write '" + path + "'");
        return f;
    };
    {
        auto f = open("sweep.csv");
        f << "eps,err_u1_L2,err_eu2_L2,err_p1_H1,err_p2_H1,ratio_tau_n,eta_L2,beta_h,status\n";
        for (const auto& r : rep.rows)
            f << num(r.eps) << ',' << num(r.err_u1_L2) << ',' << num(r.err_eu2_L2) << ',' << num(r.err_p1_H1) << ','
              << num(r.err_p2_H1) << ',' << num(r.ratio_tau_n) << ',' << num(r.eta_L2) << ',' << num(r.beta_h) << ','
              << sanitize(r.status) << '\n';
        if (!f) throw Error(ErrorCode::io, "write failed for sweep.csv");
    }
    {
        auto f = open("errors.dat");
        f << "# eps err_u1_L2 err_eu2_L2 err_p1_H1 err_p2_H1\n";
        for (const auto& r : rep.rows)
            f << num(r.eps) << ' ' << num(r.err_u1_L2) << ' ' << num(r.err_eu2_L2) << ' ' << num(r.err_p1_H1) << ' '
              << num(r.err_p2_H1) << '\n';
    }
    {
        auto f = open("ratio.dat");
        f << "# eps ratio_tau_n eta_L2 beta_h\n";
        for (const auto& r : rep.rows) f << num(r.eps) << ' ' << num(r.ratio_tau_n) << ' ' << num(r.eta_L2) << ' ' << num(r.beta_h) << '\n';
    }
    {
        auto f = open("bounds.dat");
        f << "# eps u1_L2 eu2_L2 p1_H1 p2_H1 dz_p2_L2 div_u1_L2\n";
        for (const auto& r : rep.rows)
            f << num(r.eps) << ' ' << num(r.u1_L2) << ' ' << num(r.eu2_L2) << ' ' << num(r.p1_H1) << ' ' << num(r.p2_H1)
              << ' ' << num(r.dz_p2_L2) << ' ' << num(r.div_u1_L2) << '\n';
        if (!f) throw Error(ErrorCode::io, "write failed for bounds.dat");
    }
}

ConvergenceReport read_report(const std::string& dir) {
    std::string path = (std::filesystem::path(dir) / "sweep.csv").string();
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::io, "cannot open '" + path + "'");
    ConvergenceReport rep;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(f, line)) {
        ++ln;
        if (ln == 1) {
            if (line != "eps,err_u1_L2,err_eu2_L2,err_p1_H1,err_p2_H1,ratio_tau_n,eta_L2,beta_h,status")
                throw ParseError("line 1 of sweep.csv: unexpected header", 0, 1, "header");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (cells.size() != 9) throw ParseError("line " + std::to_string(ln) + " of sweep.csv: expected 9 columns", 0, ln, "row");
        double v[8];
        for (int k = 0; k < 8; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(cells[static_cast<std::size_t>(k)].c_str(), &end);
            if (*end != '\0') throw ParseError("line " + std::to_string(ln) + " of sweep.csv: bad number", 0, ln, cells[static_cast<std::size_t>(k)]);
        }
        ReportRow r;
        r.eps = v[0];
        r.err_u1_L2 = v[1];
        r.err_eu2_L2 = v[2];
        r.err_p1_H1 = v[3];
        r.err_p2_H1 = v[4];
        r.ratio_tau_n = v[5];
        r.eta_L2 = v[6];
        r.beta_h = v[7];
        r.status = cells[8];
        if (r.status != "ok") rep.complete = false;
        rep.rows.push_back(r);
    }
    return rep;
}

ColumnTrend analyze_column(const std::vector<double>& eps, const std::vector<double>& err) {
    ColumnTrend t;
    if (err.empty()) return t;
    t.final_over_initial = err.front() > 0.0 ? err.back() / err.front() : 0.0;
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
        if (err[k + 1] > err[k]) t.non_increasing = false;
        if (err[k] > 0.0 && err[k + 1] / err[k] > 0.9) t.plateau = true;
        if (err[k] > 0.0 && err[k + 1] > 0.0) t.rates.push_back(std::log(err[k] / err[k + 1]) / std::log(eps[k] / eps[k + 1]));
        else t.rates.push_back(nan_v);
    }
    return t;
}

std::vector<std::string> manufactured_case_names() {
    return {"zero-field", "rock-only-linear", "flat-fissure-limit", "quiescent-fissure"};
}

namespace {

RawMedium flat_geometry() {
    RawMedium g;
    g.x_lo = 0.0;
    g.x_hi = 1.0;
    g.bottom = 0.0;
    g.top = 1.2;
    g.fissures.push_back({{0.0, 1.0}, {{{0.5, 0.0, 0.0, 0.0}}}, 0.2});
    return g;
}

}  // namespace

ManufacturedCase manufactured_case(const std::string& name) {
    ManufacturedCase mc;
    mc.name = name;
    const std::string pi = "3.141592653589793";
    if (name == "zero-field") {
        mc.geometry = flat_geometry();
        mc.data.alpha = Expr::constant(0.1);
        mc.limit = false;
    } else if (name == "rock-only-linear") {
        mc.geometry.x_lo = 0.0;
        mc.geometry.x_hi = 1.0;
        mc.geometry.bottom = 0.0;
        mc.geometry.top = 1.0;
        mc.data.p_drained = parse_expr("1 - z");
        mc.p_rock = parse_expr("1 - z");
        mc.u_rock_x = Expr::constant(0.0);
        mc.u_rock_z = Expr::constant(1.0);
    } else if (name == "flat-fissure-limit") {
        mc.geometry = flat_geometry();
        mc.limit = true;
        mc.data.F = parse_expr(pi + "^2*cos(" + pi + "*x)");
        mc.data.f_gamma = parse_expr("0.1*" + pi + "^2*cos(" + pi + "*x)");
        mc.data.p_drained = parse_expr("cos(" + pi + "*x)");
        mc.p_rock = parse_expr("cos(" + pi + "*x)");
        mc.u_rock_x = parse_expr(pi + "*sin(" + pi + "*x)");
        mc.u_rock_z = Expr::constant(0.0);
        mc.p_fissure = parse_expr("cos(" + pi + "*x)");
        mc.u_tau = parse_expr(pi + "*sin(" + pi + "*x)");
    } else if (name == "quiescent-fissure") {
        mc.geometry = flat_geometry();
        mc.limit = false;
        const std::string a = "(abs(z - 0.6) - 0.1)";
        const std::string s = "sin(" + pi + "*x)";
        mc.data.F = parse_expr(pi + "^2*" + s + "*(" + a + " + abs" + a + ")/2");
        mc.data.f_gamma = parse_expr("-" + s);
        mc.data.p_drained = parse_expr(s + "*" + a);
        mc.p_rock = parse_expr(s + "*" + a);
        mc.u_rock_x = parse_expr("-" + pi + "*cos(" + pi + "*x)*" + a);
        mc.u_rock_z = parse_expr(s + "*(0.6 - z)/abs(z - 0.6)");
        mc.p_fissure = Expr::constant(0.0);
        mc.u_tau = Expr::constant(0.0);
    } else {
        throw Error(ErrorCode::unknown_case, "unknown manufactured case '" + name + "'");
    }
    return mc;
}

ManufacturedErrors manufactured_errors(const SolutionField& sol, const ManufacturedCase& mc) {
    ManufacturedErrors e;
    const MixedMesh& m = *sol.mesh;
    const DofLayout& L = *sol.layout;
    const auto& rule = fe::tri_rule();
    double su = 0.0, sp = 0.0;
    for (int c = 0; c < static_cast<int>(m.cells.size()); ++c) {
        if (m.cell_region[static_cast<std::size_t>(c)].kind != RegionKind::block) continue;
        fe::RT0Cell r = fe::rt0_cell(m, L, c);
        double ph = sol.p[L.cell_pdof[static_cast<std::size_t>(c)]];
        for (std::size_t q = 0; q < rule.w.size(); ++q) {
            Point x = r.g.at(rule.bary[q]);
            double w = rule.w[q] * r.g.area;
            Eigen::Vector2d ue(mc.u_rock_x(x.x, x.z), mc.u_rock_z(x.x, x.z));
            su += w * (r.eval(sol.u, x) - ue).squaredNorm();
            double dp = ph - mc.p_rock(x.x, x.z);
            sp += w * dp * dp;
        }
    }
    e.u_rock_L2 = std::sqrt(su);
    e.p_rock_L2 = std::sqrt(sp);
    if (L.kind != SystemKind::limit) return e;
    double spf = 0.0, sut = 0.0;
    for (const ManifoldMesh& mm : sol.manifolds) {
        const auto& vd = L.manifold_vdof[static_cast<std::size_t>(mm.fissure - 1)];
        const auto& pd = L.manifold_pdof[static_cast<std::size_t>(mm.fissure - 1)];
        for (std::size_t k = 0; k + 1 < mm.xs.size(); ++k) {
            double dx = mm.xs[k + 1] - mm.xs[k];
            for (int j = 0; j < 3; ++j) {
                double t = fe::gauss_t[static_cast<std::size_t>(j)], w = fe::gauss_w[static_cast<std::size_t>(j)] * dx * mm.height;
                double x = mm.xs[k] + t * dx;
                double z = mm.lambda[k] + t * (mm.lambda[k + 1] - mm.lambda[k]);
                double ph = (1.0 - t) * sol.p[pd[k]] + t * sol.p[pd[k + 1]];
                double dp = ph - mc.p_fissure(x, z);
                double du = sol.u[vd[k]] - mc.u_tau(x, z);
                spf += w * dp * dp;
                sut += w * du * du;
            }
        }
    }
    e.p_fissure_L2 = std::sqrt(spf);
    e.u_tau_L2 = std::sqrt(sut);
    return e;
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::parse: return "ParseError";
        case ErrorCode::io: return "IOError";
        case ErrorCode::overlap: return "OverlapError";
        case ErrorCode::vertical_tangent: return "VerticalTangentError";
        case ErrorCode::disconnected_block: return "DisconnectedBlockError";
        case ErrorCode::outside_domain: return "PointOutsideDomain";
        case ErrorCode::target_too_coarse: return "TargetTooCoarse";
        case ErrorCode::mesh_quality: return "MeshQualityError";
        case ErrorCode::coefficient: return "CoefficientEvaluationError";
        case ErrorCode::limit_data: return "LimitDataError";
        case ErrorCode::singular: return "SingularSystemError";
        case ErrorCode::tolerance: return "ToleranceNotReached";
        case ErrorCode::too_large: return "TooLargeForDense";
        case ErrorCode::evaluation: return "EvaluationError";
        case ErrorCode::unknown_case: return "UnknownCase";
    }
    return "Error";
}

}  // namespace fissure
