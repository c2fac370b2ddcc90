#include "fissure/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fissure {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double poly(const std::array<double, 4>& c, double t) { return c[0] + t * (c[1] + t * (c[2] + t * c[3])); }
double dpoly(const std::array<double, 4>& c, double t) { return c[1] + t * (2.0 * c[2] + t * 3.0 * c[3]); }

// Points in [0, len] where the polynomial may attain extrema.
std::vector<double> candidates(const std::array<double, 4>& c, double len) {
    std::vector<double> ts{0.0, len};
    double a = 3.0 * c[3], b = 2.0 * c[2], cc = c[1];
    auto push = [&](double t) {
        if (t > 0.0 && t < len) ts.push_back(t);
    };
    if (a == 0.0) {
        if (b != 0.0) push(-cc / b);
    } else {
        double disc = b * b - 4.0 * a * cc;
        if (disc >= 0.0) {
            double sq = std::sqrt(disc);
            push((-b + sq) / (2.0 * a));
            push((-b - sq) / (2.0 * a));
        }
    }
    return ts;
}

[[noreturn]] void outside(Point p) {
    throw Error(ErrorCode::outside_domain, "point (" + num(p.x) + ", " + num(p.z) + ") lies outside the domain");
}

}  // namespace

CurveSpec::CurveSpec(std::vector<double> breakpoints, std::vector<std::array<double, 4>> coeffs)
    : breaks_(std::move(breakpoints)), coeffs_(std::move(coeffs)) {
    if (breaks_.size() < 2) throw Error(ErrorCode::invalid_argument, "curve needs at least two breakpoints");
    if (coeffs_.size() != breaks_.size() - 1)
        throw Error(ErrorCode::invalid_argument, "curve has " + std::to_string(coeffs_.size()) + " segments for " +
                                                     std::to_string(breaks_.size()) + " breakpoints");
    for (std::size_t k = 0; k < breaks_.size(); ++k) {
        if (!std::isfinite(breaks_[k])) throw Error(ErrorCode::invalid_argument, "non-finite breakpoint");
        if (k > 0 && !(breaks_[k] > breaks_[k - 1]))
            throw Error(ErrorCode::invalid_argument, "breakpoints must be strictly increasing");
    }
    for (const auto& c : coeffs_)
        for (double v : c)
            if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "non-finite curve coefficient");
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
        double left = poly(coeffs_[k - 1], breaks_[k] - breaks_[k - 1]);
        double right = coeffs_[k][0];
        if (std::fabs(left - right) > 1e-12 * std::max(1.0, std::fabs(right)))
            throw Error(ErrorCode::invalid_argument,
                        "curve is discontinuous at breakpoint " + num(breaks_[k]) + " (" + num(left) + " vs " + num(right) + ")");
    }
}

std::size_t CurveSpec::segment_of(double x) const {
    if (!(x >= breaks_.front() && x <= breaks_.back()))
        throw Error(ErrorCode::outside_domain, "x = " + num(x) + " lies outside the base interval");
    auto it = std::lower_bound(breaks_.begin() + 1, breaks_.end(), x);
    return static_cast<std::size_t>(it - breaks_.begin()) - 1;
}

double CurveSpec::value(double x) const {
    std::size_t k = segment_of(x);
    return poly(coeffs_[k], x - breaks_[k]);
}

double CurveSpec::slope(double x) const {
    std::size_t k = segment_of(x);
    return dpoly(coeffs_[k], x - breaks_[k]);
}

double CurveSpec::sup() const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < coeffs_.size(); ++k)
        for (double t : candidates(coeffs_[k], breaks_[k + 1] - breaks_[k])) m = std::max(m, poly(coeffs_[k], t));
    return m;
}

double CurveSpec::inf() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < coeffs_.size(); ++k)
        for (double t : candidates(coeffs_[k], breaks_[k + 1] - breaks_[k])) m = std::min(m, poly(coeffs_[k], t));
    return m;
}

double CurveSpec::max_abs_slope() const {
    double m = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        const auto& c = coeffs_[k];
        double len = breaks_[k + 1] - breaks_[k];
        m = std::max({m, std::fabs(dpoly(c, 0.0)), std::fabs(dpoly(c, len))});
        if (c[3] != 0.0) {
            double t = -c[2] / (3.0 * c[3]);
            if (t > 0.0 && t < len) m = std::max(m, std::fabs(dpoly(c, t)));
        }
    }
    return m;
}

double CurveSpec::integral(double a, double b) const {
    double total = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        double lo = std::max(a, breaks_[k]), hi = std::min(b, breaks_[k + 1]);
        if (hi <= lo) continue;
        const auto& c = coeffs_[k];
        auto prim = [&](double t) { return t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * c[3] / 4.0))); };
        total += prim(hi - breaks_[k]) - prim(lo - breaks_[k]);
    }
    return total;
}

double CurveSpec::arc_length() const {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
    double total = 0.0;
    const int sub = 256;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        double len = breaks_[k + 1] - breaks_[k];
        double d = len / sub;
        for (int s = 0; s < sub; ++s) {
            double mid = (s + 0.5) * d;
            for (int q = 0; q < 5; ++q) {
                double sl = dpoly(coeffs_[k], mid + 0.5 * d * gx[q]);
                total += 0.5 * d * gw[q] * std::sqrt(1.0 + sl * sl);
            }
        }
    }
    return total;
}

CurveSpec CurveSpec::shifted(double dz) const {
    auto c = coeffs_;
    for (auto& seg : c) seg[0] += dz;
    return CurveSpec(breaks_, std::move(c));
}

double FissuredMedium::height_below(int i) const {
    double s = 0.0;
    for (int l = 1; l < i && l <= fissure_count(); ++l) s += fissures_[static_cast<std::size_t>(l - 1)].height;
    return s;
}

double FissuredMedium::line(int r, double x) const {
    if (r == 0) return bottom_;
    if (r == line_count() - 1) return top_;
    const Fissure& f = fissure((r + 1) / 2);
    return (r % 2 == 1) ? f.curve.value(x) : f.curve.value(x) + f.height;
}

double FissuredMedium::line_slope(int r, double x) const {
    if (r == 0 || r == line_count() - 1) return 0.0;
    return fissure((r + 1) / 2).curve.slope(x);
}

Region FissuredMedium::region_of_layer(int r) {
    if (r % 2 == 0) return {RegionKind::block, r / 2};
    return {RegionKind::strip, (r + 1) / 2};
}

bool FissuredMedium::contains(Point p) const {
    return p.x >= x_lo_ && p.x <= x_hi_ && p.z >= bottom_ && p.z <= top_;
}

Region FissuredMedium::region_of(Point p) const {
    if (!contains(p)) outside(p);
    for (int i = fissure_count(); i >= 1; --i) {
        const Fissure& f = fissure(i);
        double zeta = f.curve.value(p.x);
        if (p.z >= zeta + f.height) return {RegionKind::block, i};
        if (p.z >= zeta) return {RegionKind::strip, i};
    }
    return {RegionKind::block, 0};
}

double FissuredMedium::region_area(Region r) const {
    if (r.kind == RegionKind::strip) return fissure(r.index).height * (x_hi_ - x_lo_);
    int lo = 2 * r.index, hi = 2 * r.index + 1;
    auto integral_of = [&](int line_id) {
        if (line_id == 0) return bottom_ * (x_hi_ - x_lo_);
        if (line_id == line_count() - 1) return top_ * (x_hi_ - x_lo_);
        const Fissure& f = fissure((line_id + 1) / 2);
        double v = f.curve.integral(x_lo_, x_hi_);
        return line_id % 2 == 1 ? v : v + f.height * (x_hi_ - x_lo_);
    };
    return integral_of(hi) - integral_of(lo);
}

RawMedium FissuredMedium::raw() const {
    RawMedium r;
    r.x_lo = x_lo_;
    r.x_hi = x_hi_;
    r.bottom = bottom_;
    r.top = top_;
    r.slope_cap = slope_cap_;
    for (const auto& f : fissures_) r.fissures.push_back({f.curve.breakpoints(), f.curve.coeffs(), f.height});
    return r;
}

FissuredMedium validate_medium(const RawMedium& raw) {
    if (!(std::isfinite(raw.x_lo) && std::isfinite(raw.x_hi) && raw.x_lo < raw.x_hi))
        throw Error(ErrorCode::invalid_argument, "base interval must satisfy x_lo < x_hi");
    if (!(std::isfinite(raw.slope_cap) && raw.slope_cap > 0.0))
        throw Error(ErrorCode::invalid_argument, "slope cap must be positive");
    if (!(std::isfinite(raw.bottom) && std::isfinite(raw.top)))
        throw Error(ErrorCode::invalid_argument, "block extents must be finite");
    FissuredMedium m;
    m.x_lo_ = raw.x_lo;
    m.x_hi_ = raw.x_hi;
    m.bottom_ = raw.bottom;
    m.top_ = raw.top;
    m.slope_cap_ = raw.slope_cap;
    for (std::size_t k = 0; k < raw.fissures.size(); ++k) {
        const auto& rf = raw.fissures[k];
        std::string tag = "fissure " + std::to_string(k + 1);
        if (!(std::isfinite(rf.height) && rf.height > 0.0))
            throw Error(ErrorCode::invalid_argument, tag + ": height must be positive");
        if (rf.breakpoints.empty() || rf.breakpoints.front() != raw.x_lo || rf.breakpoints.back() != raw.x_hi)
            throw Error(ErrorCode::invalid_argument, tag + ": breakpoints must span the base interval exactly");
        CurveSpec c;
        try {
            c = CurveSpec(rf.breakpoints, rf.coeffs);
        } catch (const Error& e) {
            throw Error(e.code(), tag + ": " + e.what());
        }
        double ms = c.max_abs_slope();
        if (!(ms <= raw.slope_cap))
            throw Error(ErrorCode::vertical_tangent,
                        tag + ": max |zeta'| = " + num(ms) + " exceeds slope cap " + num(raw.slope_cap) +
                            " (n.k too close to 0)");
        m.fissures_.push_back({std::move(c), rf.height});
    }
    for (int i = 1; i < m.fissure_count(); ++i) {
        double upper = m.fissure(i).curve.sup() + m.fissure(i).height;
        double lower = m.fissure(i + 1).curve.inf();
        if (upper >= lower)
            throw Error(ErrorCode::overlap, "fissures " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                                " overlap: sup(zeta_i + h_i) = " + num(upper) +
                                                " >= inf zeta_{i+1} = " + num(lower));
    }
    if (m.fissure_count() == 0) {
        if (!(raw.bottom < raw.top))
            throw Error(ErrorCode::disconnected_block, "block 0 is empty: bottom >= top");
    } else {
        double lo = m.fissure(1).curve.inf();
        if (!(raw.bottom < lo))
            throw Error(ErrorCode::disconnected_block,
                        "block 0 pinched: bottom " + num(raw.bottom) + " >= inf zeta_1 = " + num(lo));
        const Fissure& last = m.fissure(m.fissure_count());
        double hi = last.curve.sup() + last.height;
        if (!(raw.top > hi))
            throw Error(ErrorCode::disconnected_block, "block " + std::to_string(m.fissure_count()) + " pinched: top " +
                                                           num(raw.top) + " <= sup(zeta_I + h_I) = " + num(hi));
    }
    return m;
}

Eigen::Vector2d normal_vector(const CurveSpec& curve, double x) {
    double s = curve.slope(x);
    double w = 1.0 / std::sqrt(1.0 + s * s);
    return {-s * w, w};
}

LocalFrame local_frame(const CurveSpec& curve, double x) {
    double s = curve.slope(x);
    double w = 1.0 / std::sqrt(1.0 + s * s);
    LocalFrame f;
    f.M << w, -s * w, s * w, w;
    return f;
}

EpsScaling epsilon_scale(const FissuredMedium& medium, double eps) {
    if (!(eps > 0.0 && eps <= 1.0))
        throw Error(ErrorCode::invalid_argument, "invalid epsilon " + num(eps) + ": must lie in (0, 1]");
    EpsScaling s;
    s.eps = eps;
    RawMedium raw = medium.raw();
    int n = medium.fissure_count();
    for (int i = 1; i <= n; ++i) {
        double shift = (1.0 - eps) * medium.height_below(i);
        s.curve_shift.push_back(shift);
        auto& rf = raw.fissures[static_cast<std::size_t>(i - 1)];
        for (auto& c : rf.coeffs) c[0] -= shift;
        rf.height *= eps;
    }
    for (int j = 0; j <= n; ++j) s.block_shift.push_back((1.0 - eps) * medium.height_below(j + 1));
    raw.top -= s.block_shift.back();
    s.medium = validate_medium(raw);
    return s;
}

Point map_phi(const FissuredMedium& medium, double eps, Point y) {
    EpsScaling s = epsilon_scale(medium, eps);
    Region r = s.medium.region_of(y);
    if (r.kind == RegionKind::block) return {y.x, y.z + s.block_shift[static_cast<std::size_t>(r.index)]};
    double ze = s.medium.fissure(r.index).curve.value(y.x);
    return {y.x, (y.z - ze) / eps + ze + s.curve_shift[static_cast<std::size_t>(r.index - 1)]};
}

Point inverse_phi(const FissuredMedium& medium, double eps, Point x) {
    EpsScaling s = epsilon_scale(medium, eps);
    Region r = medium.region_of(x);
    if (r.kind == RegionKind::block) return {x.x, x.z - s.block_shift[static_cast<std::size_t>(r.index)]};
    double ze = s.medium.fissure(r.index).curve.value(x.x);
    double shift = s.curve_shift[static_cast<std::size_t>(r.index - 1)];
    return {x.x, eps * (x.z - ze - shift) + ze};
}

Eigen::Matrix2d gradient_jacobian(const FissuredMedium& medium, double eps, Point x) {
    if (!(eps > 0.0 && eps <= 1.0))
        throw Error(ErrorCode::invalid_argument, "invalid epsilon " + num(eps) + ": must lie in (0, 1]");
    Region r = medium.region_of(x);
    Eigen::Matrix2d J = Eigen::Matrix2d::Identity();
    if (r.kind == RegionKind::strip) {
        double s = medium.fissure(r.index).curve.slope(x.x);
        J(0, 1) = (1.0 - 1.0 / eps) * s;
        J(1, 1) = 1.0 / eps;
    }
    return J;
}

Collapsed collapse_T(const FissuredMedium& medium, Point x) {
    Region r = medium.region_of(x);
    if (r.kind == RegionKind::block) return {r, {x.x, x.z - medium.height_below(r.index + 1)}};
    return {r, {x.x, medium.fissure(r.index).curve.value(x.x) - medium.height_below(r.index)}};
}

ManifoldMedium collapse_medium(const FissuredMedium& medium) {
    ManifoldMedium m;
    m.x_lo = medium.x_lo();
    m.x_hi = medium.x_hi();
    m.bottom = medium.bottom();
    m.top = medium.top() - medium.total_height();
    m.slope_cap = medium.slope_cap();
    for (int i = 1; i <= medium.fissure_count(); ++i)
        m.lambda.push_back(medium.fissure(i).curve.shifted(-medium.height_below(i)));
    return m;
}

void validate_manifold_medium(const ManifoldMedium& m) {
    for (std::size_t i = 0; i < m.lambda.size(); ++i) {
        const auto& c = m.lambda[i];
        if (c.x_lo() != m.x_lo || c.x_hi() != m.x_hi)
            throw Error(ErrorCode::invalid_argument, "manifold " + std::to_string(i + 1) + " does not span G");
        if (c.max_abs_slope() > m.slope_cap)
            throw Error(ErrorCode::vertical_tangent, "manifold " + std::to_string(i + 1) + " exceeds slope cap");
        if (i + 1 < m.lambda.size() && !(c.sup() < m.lambda[i + 1].inf()))
            throw Error(ErrorCode::overlap, "manifolds " + std::to_string(i + 1) + " and " + std::to_string(i + 2) +
                                                " are not strictly ordered");
    }
    if (m.lambda.empty()) {
        if (!(m.bottom < m.top)) throw Error(ErrorCode::disconnected_block, "collapsed block 0 is empty");
        return;
    }
    if (!(m.bottom < m.lambda.front().inf()))
        throw Error(ErrorCode::disconnected_block, "collapsed block 0 is pinched");
    if (!(m.top > m.lambda.back().sup()))
        throw Error(ErrorCode::disconnected_block, "collapsed top block is pinched");
}

namespace {

struct LineReader {
    std::size_t line = 0;
    std::string key;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("line " + std::to_string(line) + ", field '" + key + "': " + msg, 0, line, key);
    }

    double number(const std::string& tok) const {
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || *end != '\0' || !std::isfinite(v)) fail("expected a number, got '" + tok + "'");
        return v;
    }
};

}  // namespace

RawMedium parse_geometry(const std::string& text) {
    RawMedium raw;
    raw.fissures.clear();
    bool have_interval = false, have_bottom = false, have_top = false;
    bool in_fissure = false;
    bool have_height = false, have_breaks = false;
    RawFissure cur;
    LineReader rd;
    std::istringstream in(text);
    std::string lineText;
    while (std::getline(in, lineText)) {
        ++rd.line;
        auto hash = lineText.find('#');
        if (hash != std::string::npos) lineText.erase(hash);
        std::istringstream ls(lineText);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        rd.key = tok[0];
        std::size_t nargs = tok.size() - 1;
        auto expect = [&](std::size_t n) {
            if (nargs != n) rd.fail("expected " + std::to_string(n) + " value(s), got " + std::to_string(nargs));
        };
        if (!in_fissure) {
            if (rd.key == "interval") {
                expect(2);
                raw.x_lo = rd.number(tok[1]);
                raw.x_hi = rd.number(tok[2]);
                have_interval = true;
            } else if (rd.key == "bottom") {
                expect(1);
                raw.bottom = rd.number(tok[1]);
                have_bottom = true;
            } else if (rd.key == "top") {
                expect(1);
                raw.top = rd.number(tok[1]);
                have_top = true;
            } else if (rd.key == "slope_cap") {
                expect(1);
                raw.slope_cap = rd.number(tok[1]);
            } else if (rd.key == "fissure") {
                expect(0);
                in_fissure = true;
                cur = RawFissure{};
                have_height = have_breaks = false;
            } else {
                rd.fail("unknown key");
            }
        } else {
            if (rd.key == "height") {
                expect(1);
                cur.height = rd.number(tok[1]);
                have_height = true;
            } else if (rd.key == "breakpoints") {
                if (nargs < 2) rd.fail("expected at least 2 breakpoints");
                for (std::size_t k = 1; k < tok.size(); ++k) cur.breakpoints.push_back(rd.number(tok[k]));
                have_breaks = true;
            } else if (rd.key == "segment") {
                if (nargs < 1 || nargs > 4) rd.fail("expected 1 to 4 coefficients");
                std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};
                for (std::size_t k = 1; k < tok.size(); ++k) c[k - 1] = rd.number(tok[k]);
                cur.coeffs.push_back(c);
            } else if (rd.key == "end") {
                expect(0);
                if (!have_height) rd.fail("fissure block is missing 'height'");
                if (!have_breaks) rd.fail("fissure block is missing 'breakpoints'");
                if (cur.coeffs.size() + 1 != cur.breakpoints.size())
                    rd.fail("fissure has " + std::to_string(cur.coeffs.size()) + " segments for " +
                            std::to_string(cur.breakpoints.size()) + " breakpoints");
                raw.fissures.push_back(cur);
                in_fissure = false;
            } else {
                rd.fail("unknown key inside fissure block");
            }
        }
    }
    rd.key = "end";
    if (in_fissure) rd.fail("unterminated fissure block");
    rd.line = 0;
    if (!have_interval) {
        rd.key = "interval";
        rd.fail("missing");
    }
    if (!have_bottom) {
        rd.key = "bottom";
        rd.fail("missing");
    }
    if (!have_top) {
        rd.key = "top";
        rd.fail("missing");
    }
    return raw;
}

FissuredMedium load_geometry(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::io, "cannot open geometry file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return validate_medium(parse_geometry(ss.str()));
}

std::string format_geometry(const RawMedium& raw) {
    std::ostringstream os;
    os << "interval " << num(raw.x_lo) << ' ' << num(raw.x_hi) << '\n';
    os << "bottom " << num(raw.bottom) << '\n';
    os << "top " << num(raw.top) << '\n';
    os << "slope_cap " << num(raw.slope_cap) << '\n';
    for (const auto& f : raw.fissures) {
        os << "\nfissure\n  height " << num(f.height) << "\n  breakpoints";
        for (double b : f.breakpoints) os << ' ' << num(b);
        os << '\n';
        for (const auto& c : f.coeffs) os << "  segment " << num(c[0]) << ' ' << num(c[1]) << ' ' << num(c[2]) << ' ' << num(c[3]) << '\n';
        os << "end\n";
    }
    return os.str();
}

}  // namespace fissure
