#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "group.hpp"
#include "quadrature.hpp"
#include "stats.hpp"

namespace ym2 {

enum class AreaSpec { Uniform, MorseSingular };

inline const char* to_string(AreaSpec a) { return a == AreaSpec::Uniform ? "uniform" : "morse-singular"; }

inline AreaSpec parse_area_spec(const std::string& s)
{
    if (s == "uniform") return AreaSpec::Uniform;
    if (s == "morse-singular" || s == "singular") return AreaSpec::MorseSingular;
    fail(ErrorKind::InvalidArgument, "unknown area spec '" + s + "'");
}

struct LatticeOptions {
    AreaSpec spec = AreaSpec::Uniform;
    double total_area = 1.0;
    /// Matching radius of the singular density around each saddle.
    double rho0 = 0.25;
    /// Smooth part of the area density; empty means constant.
    std::function<double(double, double)> smooth_density;
    /// Memory guard on the face count.
    std::size_t max_faces = std::size_t(1) << 25;
};

struct Saddle {
    double r = 0.0;
    double theta = 0.0;
};

/// One generator of a loop word.
struct Letter {
    enum class Kind { Face, Stable, Edge };
    Kind kind = Kind::Face;
    std::size_t index = 0; ///< face index, stable index b, or edge (level * cols + arc)
    bool inverse = false;
};

using Word = std::vector<Letter>;

/**
 * Dyadic lattice on the cylinder [0, 2g+2] x (R / 2g Z) of a genus-g surface.
 *
 * Level i sits at r = i h, arc j spans [j h, (j+1) h], h = 2^-N. Face (i, j)
 * lies between levels i and i+1 above arc j. Saddles sit at r = c, theta =
 * c - 1/2 for c = 1..2g. Insertion slot s = 1..4g is at theta = s/2 and carries
 * U_s (s <= 2g) or U_{s-2g}^{-1}.
 */
class MorseLattice {
public:
    MorseLattice(int genus, int N, LatticeOptions opt = {}) : g_(genus), N_(N), opt_(std::move(opt))
    {
        if (genus < 1) fail(ErrorKind::InvalidArgument, "genus must be >= 1");
        if (N < 1 || N > 14) fail(ErrorKind::InvalidArgument, "N must lie in 1..14");
        if (!(opt_.total_area > 0.0)) fail(ErrorKind::InvalidArgument, "total area must be positive");
        per_ = std::size_t(1) << N;
        h_ = 1.0 / double(per_);
        rows_ = std::size_t(2 * g_ + 2) * per_;
        cols_ = std::size_t(2 * g_) * per_;
        if (rows_ * cols_ > opt_.max_faces)
            fail(ErrorKind::ResolutionTooHigh, std::to_string(rows_ * cols_) + " faces exceed the memory guard");
        for (int c = 1; c <= 2 * g_; ++c) saddles_.push_back({double(c), double(c) - 0.5});
        compute_areas();
    }

    int genus() const { return g_; }
    int resolution() const { return N_; }
    double mesh() const { return h_; }
    AreaSpec area_spec() const { return opt_.spec; }
    double total_area() const { return opt_.total_area; }
    double period() const { return 2.0 * g_; }

    std::size_t levels() const { return rows_ + 1; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t faces() const { return rows_ * cols_; }
    std::size_t horizontal_edges() const { return levels() * cols_; }
    std::size_t face_index(std::size_t row, std::size_t col) const { return row * cols_ + col; }
    std::size_t face_row(std::size_t f) const { return f / cols_; }
    std::size_t face_col(std::size_t f) const { return f % cols_; }

    double level_r(std::size_t i) const { return double(i) * h_; }
    double grid_theta(std::size_t j) const { return double(j) * h_; }

    const std::vector<Saddle>& saddles() const { return saddles_; }

    /// Level index of r = 2g, the last saddle.
    std::size_t last_saddle_level() const { return std::size_t(2 * g_) * per_; }

    std::vector<double> stable_angles() const
    {
        std::vector<double> a;
        for (int s = 1; s <= 2 * g_; ++s) a.push_back(0.5 * s);
        return a;
    }
    std::vector<double> unstable_angles() const
    {
        std::vector<double> a;
        for (int s = 2 * g_ + 1; s <= 4 * g_; ++s) a.push_back(0.5 * s);
        return a;
    }

    /// Arc index after which slot s (1..4g) is inserted.
    std::size_t slot_arc(int s) const { return std::size_t(s) * (per_ / 2) - 1; }

    double face_area(std::size_t f) const
    {
        if (f >= faces()) fail(ErrorKind::IndexOutOfRange, "face " + std::to_string(f));
        return area_[f];
    }
    double face_area(std::size_t row, std::size_t col) const { return face_area(face_index(row, col)); }
    const std::vector<double>& areas() const { return area_; }

    /// Total area of a theta-column.
    double strip_area(std::size_t col) const
    {
        if (col >= cols_) fail(ErrorKind::IndexOutOfRange, "column " + std::to_string(col));
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += area_[face_index(i, col)];
        return s;
    }

    /// Area strictly below level i (all columns).
    double area_below(std::size_t level) const
    {
        double s = 0.0;
        for (std::size_t f = 0; f < std::min(faces(), level * cols_); ++f) s += area_[f];
        return s;
    }

    /// Anisotropic distance rho = sqrt(dr^2 + 4 dtheta^2) to the nearest saddle.
    double saddle_distance(double r, double theta) const
    {
        double best = 1e300;
        for (auto& a : saddles_) {
            double dt = wrap(theta - a.theta);
            best = std::min(best, std::sqrt((r - a.r) * (r - a.r) + 4.0 * dt * dt));
        }
        return best;
    }

    /// Corona index j = floor(-log2 rho(center)) clamped to 0..N.
    int corona_index(std::size_t f) const
    {
        double r = (double(face_row(f)) + 0.5) * h_, th = (double(face_col(f)) + 0.5) * h_;
        double d = saddle_distance(r, th);
        int j = int(std::floor(-std::log2(d)));
        return std::clamp(j, 0, N_);
    }

    /// Level circle at level index i: edges counterclockwise with the boundary insertion pattern.
    Word level_circle(std::size_t level, bool insertions = true) const
    {
        if (level >= levels()) fail(ErrorKind::IndexOutOfRange, "level " + std::to_string(level));
        if (insertions && level <= last_saddle_level())
            fail(ErrorKind::LevelBelowSaddles, "insertions need a level above r = 2g");
        Word w;
        int next_slot = 1;
        for (std::size_t j = 0; j < cols_; ++j) {
            w.push_back({Letter::Kind::Edge, level * cols_ + j, false});
            if (insertions && next_slot <= 4 * g_ && j == slot_arc(next_slot)) {
                bool inv = next_slot > 2 * g_;
                std::size_t b = std::size_t(inv ? next_slot - 2 * g_ - 1 : next_slot - 1);
                w.push_back({Letter::Kind::Stable, b, inv});
                ++next_slot;
            }
        }
        return w;
    }

    /// Face loops (one per face) and the 2g stable loops.
    std::pair<std::vector<Word>, std::vector<Word>> loop_basis() const
    {
        std::vector<Word> faces_w(faces()), stable;
        for (std::size_t f = 0; f < faces(); ++f) faces_w[f] = {{Letter::Kind::Face, f, false}};
        for (int b = 0; b < 2 * g_; ++b) stable.push_back({{Letter::Kind::Stable, std::size_t(b), false}});
        return {faces_w, stable};
    }

    /// Lengths of the arcs of a level circle (they sum to the period).
    std::vector<double> arc_lengths() const { return std::vector<double>(cols_, h_); }

    double wrap(double dt) const
    {
        const double P = period();
        dt = std::remainder(dt, P);
        return dt;
    }

    /// Unnormalized density sigma~ * w at (r, theta).
    double raw_density(double r, double theta) const
    {
        double s = opt_.smooth_density ? opt_.smooth_density(r, theta) : 1.0;
        if (opt_.spec == AreaSpec::Uniform) return s;
        double w = 1.0;
        for (auto& a : saddles_) {
            double dt = wrap(theta - a.theta);
            double rho = std::sqrt((r - a.r) * (r - a.r) + 4.0 * dt * dt);
            double b = blend(rho);
            if (b > 0.0) w += b * (1.0 / rho - 1.0);
        }
        return s * w;
    }

    /// Cubic blend: 1 for rho <= rho0/2, 0 for rho >= rho0.
    double blend(double rho) const
    {
        const double r0 = opt_.rho0;
        if (rho <= 0.5 * r0) return 1.0;
        if (rho >= r0) return 0.0;
        double x = (rho - 0.5 * r0) / (0.5 * r0);
        return 1.0 - x * x * (3.0 - 2.0 * x);
    }

    /// Integral of 1/sqrt(x^2 + 4 y^2) over [x1, x2] x [y1, y2].
    static double singular_rect(double x1, double x2, double y1, double y2)
    {
        // signed primitive from the origin; the integrand is even in both variables
        auto F = [](double x, double u) {
            if (x == 0.0 || u == 0.0) return 0.0;
            double a = std::abs(x), b = std::abs(u);
            double v = a * std::asinh(b / a) + b * std::asinh(a / b);
            return (x > 0) == (u > 0) ? v : -v;
        };
        double u1 = 2.0 * y1, u2 = 2.0 * y2;
        return 0.5 * (F(x2, u2) - F(x1, u2) - F(x2, u1) + F(x1, u1));
    }

    const LatticeOptions& options() const { return opt_; }

    /// Factor taking raw_density to the area density sigma.
    double density_scale() const { return scale_; }

private:
    double smooth(double r, double th) const { return opt_.smooth_density ? opt_.smooth_density(r, th) : 1.0; }

    /// Integral of f over [r1,r2] x [t1,t2] by Gauss-Legendre with quad-tree refinement.
    template <class F>
    double adaptive_rect(F&& f, double r1, double r2, double t1, double t2, double tol, int depth) const
    {
        auto gl = [&](double a1, double a2, double b1, double b2) {
            const auto& R = quad::Rule<6>::get();
            double s = 0.0;
            for (int i = 0; i < 6; ++i)
                for (int k = 0; k < 6; ++k)
                    s += R.w[i] * R.w[k] * f(a1 + (a2 - a1) * R.x[i], b1 + (b2 - b1) * R.x[k]);
            return s * (a2 - a1) * (b2 - b1);
        };
        double whole = gl(r1, r2, t1, t2);
        double rm = 0.5 * (r1 + r2), tm = 0.5 * (t1 + t2);
        double parts = gl(r1, rm, t1, tm) + gl(rm, r2, t1, tm) + gl(r1, rm, tm, t2) + gl(rm, r2, tm, t2);
        if (std::abs(parts - whole) <= tol) return parts;
        if (depth >= 14) {
            if (std::abs(parts - whole) > 1e-6 * std::abs(parts) + tol)
                fail(ErrorKind::QuadratureFailure, "subdivision exhausted near a saddle");
            return parts;
        }
        // children share the budget loosely; cells cut by the blend circles converge slowly
        return adaptive_rect(f, r1, rm, t1, tm, 0.5 * tol, depth + 1) + adaptive_rect(f, rm, r2, t1, tm, 0.5 * tol, depth + 1) +
               adaptive_rect(f, r1, rm, tm, t2, 0.5 * tol, depth + 1) + adaptive_rect(f, rm, r2, tm, t2, 0.5 * tol, depth + 1);
    }

    double raw_face_area(std::size_t row, std::size_t col) const
    {
        const double r1 = row * h_, r2 = r1 + h_, t1 = col * h_, t2 = t1 + h_;
        const double rc = r1 + 0.5 * h_, tc = t1 + 0.5 * h_;
        const bool flat = !opt_.smooth_density;
        const double reach = opt_.rho0 + 1.5 * h_ * std::sqrt(5.0);
        if (opt_.spec == AreaSpec::MorseSingular) {
            for (auto& a : saddles_) {
                double dt = wrap(tc - a.theta);
                double rho = std::sqrt((rc - a.r) * (rc - a.r) + 4.0 * dt * dt);
                if (rho > reach) continue;
                const double x1 = r1 - a.r, y1 = dt - 0.5 * h_;
                const double x2 = x1 + h_, y2 = y1 + h_;
                // rho is convex: its max over the face is at a corner, its min at the clamped origin
                double cx = std::clamp(0.0, x1, x2), cy = std::clamp(0.0, y1, y2);
                double rmin = std::sqrt(cx * cx + 4.0 * cy * cy);
                double rmax = 0.0;
                for (double x : {x1, x2})
                    for (double y : {y1, y2}) rmax = std::max(rmax, std::sqrt(x * x + 4.0 * y * y));
                if (rmin >= opt_.rho0) break;
                // sigma~(a)/rho integrated exactly, the bounded remainder by quadrature
                const double sa = smooth(a.r, a.theta);
                double sing = sa * singular_rect(x1, x2, y1, y2);
                if (flat && rmax <= 0.5 * opt_.rho0) return sing;
                auto rest = [&](double r, double th) {
                    double ddt = wrap(th - a.theta);
                    double rr = std::sqrt((r - a.r) * (r - a.r) + 4.0 * ddt * ddt);
                    double v = raw_density(r, th);
                    return rr > 0.0 ? v - sa / rr : 0.0;
                };
                double rem = 0.0;
                if (rmin > 0.5 * opt_.rho0 && rmax < opt_.rho0) {
                    const auto& R = quad::Rule<6>::get();
                    for (int i = 0; i < 6; ++i)
                        for (int k = 0; k < 6; ++k) rem += R.w[i] * R.w[k] * rest(r1 + h_ * R.x[i], t1 + h_ * R.x[k]);
                    rem *= h_ * h_;
                } else {
                    rem = adaptive_rect(rest, r1, r2, t1, t2, 1e-9 * h_ * h_, 0);
                }
                return sing + rem;
            }
        }
        if (flat) return h_ * h_;
        const auto& R = quad::Rule<8>::get();
        double s = 0.0;
        for (int i = 0; i < 8; ++i)
            for (int k = 0; k < 8; ++k) s += R.w[i] * R.w[k] * raw_density(r1 + h_ * R.x[i], t1 + h_ * R.x[k]);
        return s * h_ * h_;
    }

    void compute_areas()
    {
        area_.assign(faces(), 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) area_[face_index(i, j)] = raw_face_area(i, j);
        double tot = pairwise_sum(area_);
        scale_ = opt_.total_area / tot;
        for (auto& a : area_) a *= scale_;
    }

    int g_, N_;
    LatticeOptions opt_;
    std::size_t per_ = 0, rows_ = 0, cols_ = 0;
    double h_ = 0.0, scale_ = 1.0;
    std::vector<Saddle> saddles_;
    std::vector<double> area_;
};

struct AreaScaling {
    std::vector<int> N;
    std::vector<double> corona_slope;  ///< per N: slope of mean log2(area) vs corona index
    std::vector<double> max_strip;     ///< per N: max strip area
    double strip_exponent = 0.0;       ///< -slope of log2(max strip) vs N
    double strip_exponent_se = 0.0;
};

/// Mean log2 area per corona index j >= jmin and the fitted slope.
inline double corona_slope(const MorseLattice& lat, int jmin = 3)
{
    const int N = lat.resolution();
    std::vector<double> sum(N + 1, 0.0);
    std::vector<std::size_t> cnt(N + 1, 0);
    for (std::size_t f = 0; f < lat.faces(); ++f) {
        int j = lat.corona_index(f);
        sum[j] += std::log2(lat.face_area(f));
        ++cnt[j];
    }
    std::vector<double> x, y;
    for (int j = jmin; j <= N; ++j)
        if (cnt[j] > 0) {
            x.push_back(j);
            y.push_back(sum[j] / double(cnt[j]));
        }
    return fit_line(x, y).slope;
}

inline AreaScaling area_scaling(int genus, const std::vector<int>& ladder, double total_area = 1.0)
{
    AreaScaling out;
    std::vector<double> xs, ys;
    for (int N : ladder) {
        LatticeOptions o;
        o.spec = AreaSpec::MorseSingular;
        o.total_area = total_area;
        MorseLattice lat(genus, N, o);
        out.N.push_back(N);
        out.corona_slope.push_back(corona_slope(lat));
        double m = 0.0;
        for (std::size_t c = 0; c < lat.cols(); ++c) m = std::max(m, lat.strip_area(c));
        out.max_strip.push_back(m);
        xs.push_back(N);
        ys.push_back(std::log2(m));
    }
    auto fit = fit_line(xs, ys);
    out.strip_exponent = -fit.slope;
    out.strip_exponent_se = fit.slope_se;
    return out;
}

} // namespace ym2
