#pragma once

#include <array>
#include <compare>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fissure/error.hpp"

namespace fissure {

struct Point {
    double x = 0.0;
    double z = 0.0;
};

// Continuous piecewise cubic over strictly increasing breakpoints.
// Segment k is written in powers of (x - b_k).
class CurveSpec {
public:
    CurveSpec() = default;
    CurveSpec(std::vector<double> breakpoints, std::vector<std::array<double, 4>> coeffs);

    double value(double x) const;
    // Left one-sided derivative at interior breakpoints; right one at x_lo.
    double slope(double x) const;

    double x_lo() const { return breaks_.front(); }
    double x_hi() const { return breaks_.back(); }
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<std::array<double, 4>>& coeffs() const { return coeffs_; }

    double sup() const;
    double inf() const;
    double max_abs_slope() const;
    // Exact integral over [a, b] within the base interval.
    double integral(double a, double b) const;
    double arc_length() const;

    CurveSpec shifted(double dz) const;

private:
    std::size_t segment_of(double x) const;
    std::vector<double> breaks_;
    std::vector<std::array<double, 4>> coeffs_;
};

struct Fissure {
    CurveSpec curve;
    double height = 0.0;
};

struct RawFissure {
    std::vector<double> breakpoints;
    std::vector<std::array<double, 4>> coeffs;
    double height = 0.0;
};

struct RawMedium {
    double x_lo = 0.0;
    double x_hi = 1.0;
    double bottom = 0.0;
    double top = 1.0;
    double slope_cap = 50.0;
    std::vector<RawFissure> fissures;
};

enum class RegionKind { block, strip };

struct Region {
    RegionKind kind = RegionKind::block;
    int index = 0;  // block j in 0..I, strip i in 1..I
    auto operator<=>(const Region&) const = default;
};

// Vertically stacked fissured medium over G = (x_lo, x_hi).
// Fissure i (1-based) occupies zeta_i <= z < zeta_i + h_i.
class FissuredMedium {
public:
    FissuredMedium() = default;

    int fissure_count() const { return static_cast<int>(fissures_.size()); }
    const Fissure& fissure(int i) const { return fissures_.at(static_cast<std::size_t>(i - 1)); }
    const std::vector<Fissure>& fissures() const { return fissures_; }
    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    double bottom() const { return bottom_; }
    double top() const { return top_; }
    double slope_cap() const { return slope_cap_; }

    // sum_{l < i} h_l with h_0 = 0
    double height_below(int i) const;
    double total_height() const { return height_below(fissure_count() + 1); }

    // Boundary lines L_0 = bottom, L_1 = zeta_1, L_2 = zeta_1 + h_1, ..., L_{2I+1} = top.
    int line_count() const { return 2 * fissure_count() + 2; }
    double line(int r, double x) const;
    double line_slope(int r, double x) const;
    // Region between L_r and L_{r+1}.
    static Region region_of_layer(int r);

    Region region_of(Point p) const;
    bool contains(Point p) const;
    double region_area(Region r) const;

    RawMedium raw() const;

private:
    friend FissuredMedium validate_medium(const RawMedium& raw);
    double x_lo_ = 0.0, x_hi_ = 1.0, bottom_ = 0.0, top_ = 1.0, slope_cap_ = 50.0;
    std::vector<Fissure> fissures_;
};

FissuredMedium validate_medium(const RawMedium& raw);

Eigen::Vector2d normal_vector(const CurveSpec& curve, double x);

struct LocalFrame {
    Eigen::Matrix2d M;  // columns: tangent, upward normal
    double t_tau() const { return M(0, 0); }
    double t_n() const { return M(0, 1); }
    double k_tau() const { return M(1, 0); }
    double k_n() const { return M(1, 1); }
};

LocalFrame local_frame(const CurveSpec& curve, double x);

struct EpsScaling {
    double eps = 1.0;
    FissuredMedium medium;  // zeta_i^eps, eps*h_i, shifted blocks
    std::vector<double> curve_shift;  // (1-eps) sum_{l<i} h_l, index i-1
    std::vector<double> block_shift;  // (1-eps) sum_{l<=j} h_l, index j
};

EpsScaling epsilon_scale(const FissuredMedium& medium, double eps);

Point map_phi(const FissuredMedium& medium, double eps, Point y);
Point inverse_phi(const FissuredMedium& medium, double eps, Point x);
Eigen::Matrix2d gradient_jacobian(const FissuredMedium& medium, double eps, Point x);

struct Collapsed {
    Region region;
    Point point;
};

Collapsed collapse_T(const FissuredMedium& medium, Point x);

// Image of the reference medium under collapse_T: curves lambda_i, blocks Theta_j.
struct ManifoldMedium {
    double x_lo = 0.0, x_hi = 1.0, bottom = 0.0, top = 1.0, slope_cap = 50.0;
    std::vector<CurveSpec> lambda;
};

ManifoldMedium collapse_medium(const FissuredMedium& medium);
void validate_manifold_medium(const ManifoldMedium& m);

// Geometry config text format; errors cite line and field.
RawMedium parse_geometry(const std::string& text);
FissuredMedium load_geometry(const std::string& path);
std::string format_geometry(const RawMedium& raw);

}  // namespace fissure
