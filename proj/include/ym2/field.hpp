#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "sampler.hpp"

namespace ym2 {

/**
 * The random 1-form A_N = A^M + A^U. The dtheta-coefficient on (level, arc) is
 * log M / arc-length, interpolated affinely in r and constant in theta. A^U is a
 * current: crossing the angle of insertion slot s on a level above the last
 * saddle picks up sign * log U_b.
 */
template <GroupPolicy G>
struct LatticeOneForm {
    using Algebra = typename G::Algebra;

    struct Crossing {
        std::size_t edge = 0; ///< crossing sits at theta = edge * h
        std::size_t b = 0;
        int sign = 1;
    };

    std::size_t levels = 0, cols = 0;
    double h = 0.0;
    double insert_above = 0.0; ///< crossings only count for r > insert_above
    SampleRegion region;   ///< nodes outside read as zero
    std::vector<Algebra> a; ///< log M / h over the region, laid out as GaugeConfig::M
    std::vector<Algebra> logU;
    std::vector<Crossing> crossings;

    double period() const { return double(cols) * h; }
    Algebra node(std::size_t level, std::size_t arc) const
    {
        if (level > region.level_hi || arc < region.col_lo || arc >= region.col_hi) return Algebra{};
        return a[level * (region.col_hi - region.col_lo) + arc - region.col_lo];
    }
};

template <GroupPolicy G>
LatticeOneForm<G> assemble(const GaugeConfig<G>& cfg, const MorseLattice& lat)
{
    if (cfg.levels != lat.levels() || cfg.cols != lat.cols())
        fail(ErrorKind::InvalidArgument, "configuration does not match the lattice");
    LatticeOneForm<G> f;
    f.levels = lat.levels();
    f.cols = lat.cols();
    f.h = lat.mesh();
    f.insert_above = lat.level_r(lat.last_saddle_level());
    f.region = cfg.region;
    f.a.resize(cfg.M.size());
    const double inv = 1.0 / f.h;
    for (std::size_t e = 0; e < cfg.M.size(); ++e) {
        auto x = G::log(cfg.M[e]);
        for (auto& c : x) c *= inv;
        f.a[e] = x;
    }
    for (auto& u : cfg.U) f.logU.push_back(G::log(u));
    const int g = lat.genus();
    for (int s = 1; s <= 4 * g; ++s) {
        bool back = s > 2 * g;
        f.crossings.push_back({lat.slot_arc(s) + 1, std::size_t(back ? s - 2 * g - 1 : s - 1), back ? -1 : 1});
    }
    return f;
}

namespace detail {

template <GroupPolicy G>
typename G::Algebra interp(const LatticeOneForm<G>& f, double r, std::size_t arc)
{
    const double top = double(f.levels - 1);
    double x = std::clamp(r / f.h, 0.0, top);
    std::size_t i = std::min(std::size_t(x), f.levels - 2);
    double w = x - double(i);
    typename G::Algebra v{};
    const auto lo = f.node(i, arc), hi = f.node(i + 1, arc);
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = (1.0 - w) * lo[c] + w * hi[c];
    return v;
}

inline std::size_t mod(long long k, std::size_t n)
{
    long long m = k % (long long)n;
    return std::size_t(m < 0 ? m + (long long)n : m);
}

} // namespace detail

/// A at (r, theta): affine in r, constant on each arc.
template <GroupPolicy G>
typename G::Algebra eval(const LatticeOneForm<G>& f, double r, double theta)
{
    long long k = (long long)std::floor(theta / f.h);
    return detail::interp(f, r, detail::mod(k, f.cols));
}

/**
 * Walk theta1 -> theta2 at level r: calls seg(arc, length) for each arc piece and
 * cross(crossing) for each insertion angle in (theta1, theta2].
 */
template <GroupPolicy G, class Seg, class Cross>
void walk(const LatticeOneForm<G>& f, double r, double t1, double t2, Seg&& seg, Cross&& cross)
{
    if (!(t2 > t1)) fail(ErrorKind::DegenerateInterval, "theta interval is empty");
    if (t2 - t1 > f.period() * (1.0 + 1e-12)) fail(ErrorKind::DegenerateInterval, "theta interval longer than the period");
    std::map<std::size_t, const typename LatticeOneForm<G>::Crossing*> at;
    const bool insert = r > f.insert_above + 1e-12 * f.h;
    if (insert)
        for (auto& c : f.crossings) at[c.edge % f.cols] = &c;
    const long long k0 = (long long)std::floor(t1 / f.h);
    const long long k1 = (long long)std::ceil(t2 / f.h) - 1;
    for (long long k = k0; k <= k1; ++k) {
        double lo = std::max(double(k) * f.h, t1), hi = std::min(double(k + 1) * f.h, t2);
        if (hi > lo) seg(detail::mod(k, f.cols), hi - lo);
        if (!insert || double(k + 1) * f.h > t2 * (1.0 + 1e-15) + 1e-15) continue;
        auto it = at.find(detail::mod(k + 1, f.cols));
        if (it != at.end()) cross(*it->second);
    }
}

template <GroupPolicy G>
typename G::Algebra line_integral(const LatticeOneForm<G>& f, double r, double t1, double t2)
{
    typename G::Algebra s{};
    walk(
        f, r, t1, t2,
        [&](std::size_t arc, double len) {
            auto v = detail::interp(f, r, arc);
            for (std::size_t c = 0; c < s.size(); ++c) s[c] += v[c] * len;
        },
        [&](const auto& x) {
            for (std::size_t c = 0; c < s.size(); ++c) s[c] += x.sign * f.logU[x.b][c];
        });
    return s;
}

/// Ordered product of exp(A * segment) with U_b^{+-1} at the crossings.
template <GroupPolicy G>
typename G::Element holonomy_ode(const LatticeOneForm<G>& f, double r, double t1, double t2)
{
    auto h = G::identity();
    walk(
        f, r, t1, t2,
        [&](std::size_t arc, double len) {
            auto v = detail::interp(f, r, arc);
            for (auto& c : v) c *= len;
            h = G::multiply(h, G::exp(v));
        },
        [&](const auto& x) {
            auto u = G::exp(f.logU[x.b]);
            h = G::multiply(h, x.sign > 0 ? u : G::inverse(u));
        });
    return h;
}

/// Per face 2^{2N} (log M^{(r+)} - log M^{(r)}), face-indexed.
template <GroupPolicy G>
std::vector<typename G::Algebra> xi_N(const GaugeConfig<G>& cfg, const MorseLattice& lat)
{
    const double s = std::ldexp(1.0, 2 * lat.resolution());
    std::vector<typename G::Algebra> out(lat.faces());
    for (std::size_t i = 0; i < lat.rows(); ++i)
        for (std::size_t j = 0; j < lat.cols(); ++j) {
            auto hi = G::log(cfg.edge(i + 1, j)), lo = G::log(cfg.edge(i, j));
            auto& x = out[lat.face_index(i, j)];
            for (std::size_t c = 0; c < x.size(); ++c) x[c] = s * (hi[c] - lo[c]);
        }
    return out;
}

/// psi(r, theta) v with psi supported in a box; v is normalized on use.
struct TestForm {
    std::function<double(double, double)> psi;
    std::vector<double> direction{1.0};
    double r_lo = 0.0, r_hi = 0.0, th_lo = 0.0, th_hi = 0.0;

    /// A sin^2 bump filling the box.
    static TestForm bump(double amplitude, double r_lo, double r_hi, double th_lo, double th_hi, std::vector<double> dir = {1.0})
    {
        TestForm t;
        t.r_lo = r_lo;
        t.r_hi = r_hi;
        t.th_lo = th_lo;
        t.th_hi = th_hi;
        t.direction = std::move(dir);
        t.psi = [=](double r, double th) {
            if (r < r_lo || r > r_hi || th < th_lo || th > th_hi) return 0.0;
            double x = std::sin(kPi * (r - r_lo) / (r_hi - r_lo)), y = std::sin(kPi * (th - th_lo) / (th_hi - th_lo));
            return amplitude * x * x * y * y;
        };
        return t;
    }

    /// Bilinear interpolation of values[i * th.size() + k] on the node grid r x th.
    static TestForm from_grid(std::vector<double> r, std::vector<double> th, std::vector<double> values, std::vector<double> dir)
    {
        if (r.size() < 2 || th.size() < 2 || values.size() != r.size() * th.size())
            fail(ErrorKind::InvalidArgument, "test form grid needs at least 2 x 2 nodes and matching values");
        for (double v : values)
            if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "test form values must be finite");
        TestForm t;
        t.r_lo = r.front();
        t.r_hi = r.back();
        t.th_lo = th.front();
        t.th_hi = th.back();
        t.direction = std::move(dir);
        t.psi = [r = std::move(r), th = std::move(th), v = std::move(values)](double x, double y) {
            if (x < r.front() || x > r.back() || y < th.front() || y > th.back()) return 0.0;
            auto locate = [](const std::vector<double>& g, double z) {
                std::size_t i = std::size_t(std::upper_bound(g.begin(), g.end(), z) - g.begin());
                i = std::clamp<std::size_t>(i, 1, g.size() - 1) - 1;
                return std::pair{i, (z - g[i]) / (g[i + 1] - g[i])};
            };
            auto [i, a] = locate(r, x);
            auto [k, b] = locate(th, y);
            const std::size_t n = th.size();
            return (1 - a) * ((1 - b) * v[i * n + k] + b * v[i * n + k + 1]) + a * ((1 - b) * v[(i + 1) * n + k] + b * v[(i + 1) * n + k + 1]);
        };
        return t;
    }
};

struct FaceWeight {
    std::size_t face = 0;
    double K = 0.0;     ///< sigma-weighted mean of psi over the face
    double sigma = 0.0; ///< face area
};

/// Nonzero face means K_F psi.
inline std::vector<FaceWeight> face_means(const MorseLattice& lat, const TestForm& t)
{
    if (t.r_lo < 0.0 || t.r_hi > lat.level_r(lat.rows()) || t.th_lo < 0.0 || t.th_hi > lat.period() || !(t.r_hi > t.r_lo) ||
        !(t.th_hi > t.th_lo))
        fail(ErrorKind::InvalidArgument, "test form support must be a box inside the cylinder");
    const double h = lat.mesh();
    const auto& R = quad::Rule<6>::get();
    std::vector<FaceWeight> out;
    const std::size_t i0 = std::size_t(t.r_lo / h), i1 = std::min(lat.rows(), std::size_t(std::ceil(t.r_hi / h)));
    const std::size_t j0 = std::size_t(t.th_lo / h), j1 = std::min(lat.cols(), std::size_t(std::ceil(t.th_hi / h)));
    for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) {
            double num = 0.0, den = 0.0;
            for (int a = 0; a < 6; ++a)
                for (int b = 0; b < 6; ++b) {
                    double r = (i + R.x[a]) * h, th = (j + R.x[b]) * h, w = R.w[a] * R.w[b] * lat.raw_density(r, th);
                    num += w * t.psi(r, th);
                    den += w;
                }
            double K = num / den;
            if (K != 0.0) out.push_back({lat.face_index(i, j), K, lat.face_area(i, j)});
        }
    return out;
}

/// ||psi||^2 in L^2(sigma), on a fixed panel grid independent of the lattice resolution.
inline double sigma_norm2(const MorseLattice& lat, const TestForm& t, int panels = 64)
{
    const auto& R = quad::Rule<8>::get();
    const double dr = (t.r_hi - t.r_lo) / panels, dt = (t.th_hi - t.th_lo) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p)
        for (int q = 0; q < panels; ++q)
            for (int a = 0; a < 8; ++a)
                for (int b = 0; b < 8; ++b) {
                    double r = t.r_lo + (p + R.x[a]) * dr, th = t.th_lo + (q + R.x[b]) * dt, v = t.psi(r, th);
                    s += R.w[a] * R.w[b] * v * v * lat.raw_density(r, th);
                }
    return s * dr * dt * lat.density_scale();
}

template <GroupPolicy G>
typename G::Algebra unit_direction(const TestForm& t)
{
    typename G::Algebra v{};
    double n = 0.0;
    for (std::size_t c = 0; c < std::min(v.size(), t.direction.size()); ++c) n += t.direction[c] * t.direction[c];
    if (!(n > 0.0)) fail(ErrorKind::InvalidArgument, "test form direction must be nonzero");
    for (std::size_t c = 0; c < std::min(v.size(), t.direction.size()); ++c) v[c] = t.direction[c] / std::sqrt(n);
    return v;
}

/// <xi_N, psi> = sum_F h^2 <xi_F, K_F v>.
template <GroupPolicy G>
double pair(const std::vector<typename G::Algebra>& xi, const MorseLattice& lat, const std::vector<FaceWeight>& K,
            const typename G::Algebra& v)
{
    const double area = lat.mesh() * lat.mesh();
    double s = 0.0;
    for (auto& k : K) s += area * k.K * G::inner(xi[k.face], v);
    return s;
}

/// E exp(i K <log g, v>) for g ~ mu_t, |v| = 1.
template <GroupPolicy G>
double face_charfun(const ActionFamily<G>& a, double t, double K)
{
    auto f = [&](double phi) {
        double x = K * phi;
        double c = G::tag == GroupTag::U1 ? std::cos(x) : (x == 0.0 ? 1.0 : std::sin(x) / x);
        return c * a.class_density(t, phi);
    };
    // the class angle has a Gaussian-like tail; past 20 sqrt(t) its mass is below e^-100
    return quad::adaptive(f, 0.0, std::min(kPi, 20.0 * std::sqrt(t)), 1e-12);
}

struct CharfunResult {
    std::complex<double> plain;   ///< MC mean of exp(i <xi_N, psi>)
    double plain_se = 0.0;        ///< SE of its real part
    double cv = 0.0;              ///< real part with the linear control variate
    double cv_se = 0.0;
    double control_mean = 0.0;    ///< exact E cos(sum_F K_F <log Delta_F, v>)
    double limit = 0.0;           ///< exp(-||psi||^2 / 2)
    double leading = 0.0;         ///< prod_F (1 - K_F^2 sigma_F / 2)
    double variance_sum = 0.0;    ///< sum_F sigma_F K_F^2
    double pair_variance = 0.0;   ///< sample variance of <xi_N, psi>
    std::size_t samples = 0;
    std::size_t rejected = 0;
};

/**
 * MC characteristic functional of xi_N at psi. Only the columns under the support
 * are drawn. The control is cos of the same pairing built from the face logs,
 * whose mean factorizes over faces.
 */
template <GroupPolicy G>
CharfunResult charfun_mc(const MorseLattice& lat, const ActionFamily<G>& a, const TestForm& t, std::size_t samples,
                         std::uint64_t seed, unsigned threads = 1)
{
    CharfunResult res;
    res.samples = samples;
    const auto K = face_means(lat, t);
    const auto v = unit_direction<G>(t);
    res.limit = std::exp(-0.5 * sigma_norm2(lat, t));
    res.leading = 1.0;
    res.control_mean = 1.0;
    std::map<std::pair<double, double>, double> cache;
    SampleRegion region;
    region.level_hi = 0;
    region.col_lo = lat.cols();
    region.col_hi = 0;
    for (auto& k : K) {
        res.leading *= 1.0 - 0.5 * k.K * k.K * k.sigma;
        res.variance_sum += k.sigma * k.K * k.K;
        auto key = std::pair{k.sigma, k.K};
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, face_charfun(a, k.sigma, k.K)).first;
        res.control_mean *= it->second;
        region.level_hi = std::max(region.level_hi, lat.face_row(k.face) + 1);
        region.col_lo = std::min(region.col_lo, lat.face_col(k.face));
        region.col_hi = std::max(region.col_hi, lat.face_col(k.face) + 1);
    }
    if (K.empty()) {
        res.plain = 1.0;
        res.cv = 1.0;
        return res;
    }
    std::vector<double> x(samples), y(samples), ok(samples, 1.0);
    const std::size_t width = region.col_hi - region.col_lo, depth = region.level_hi + 1;
    parallel_for(samples, threads, [&](std::size_t i) {
        auto cfg = sample_config(lat, a, seed, i, region);
        double s = 0.0, sl = 0.0;
        try {
            // each edge log is taken once and shared by the faces above and below it
            std::vector<double> proj(depth * width);
            for (std::size_t r = 0; r < depth; ++r)
                for (std::size_t c = 0; c < width; ++c) proj[r * width + c] = G::inner(G::log(cfg.M[r * width + c]), v);
            for (auto& k : K) {
                std::size_t r = lat.face_row(k.face), c = lat.face_col(k.face) - region.col_lo;
                s += k.K * (proj[(r + 1) * width + c] - proj[r * width + c]);
                sl += k.K * G::inner(G::log(cfg.increment(r, c + region.col_lo)), v);
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::CutLocus) throw;
            ok[i] = 0.0;
        }
        x[i] = s;
        y[i] = sl;
    });
    std::vector<double> c, sn, cl, pv;
    for (std::size_t i = 0; i < samples; ++i) {
        if (ok[i] == 0.0) continue;
        c.push_back(std::cos(x[i]));
        sn.push_back(std::sin(x[i]));
        cl.push_back(std::cos(y[i]));
        pv.push_back(x[i]);
    }
    res.rejected = samples - c.size();
    if (double(res.rejected) > 1e-3 * double(samples))
        fail(ErrorKind::CutLocusFractionExceeded, std::to_string(res.rejected) + " samples at the cut locus");
    auto ec = estimate(c), es = estimate(sn);
    res.plain = {ec.mean, es.mean};
    res.plain_se = ec.se;
    auto ep = estimate(pv);
    std::vector<double> sq(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) sq[i] = (pv[i] - ep.mean) * (pv[i] - ep.mean);
    res.pair_variance = pairwise_sum(sq) / double(std::max<std::size_t>(1, sq.size() - 1));

    auto cov = covariance(c, cl), var = covariance(cl, cl);
    const double beta = var.mean > 0.0 ? cov.mean / var.mean : 0.0;
    std::vector<double> adj(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) adj[i] = c[i] - beta * (cl[i] - res.control_mean);
    auto ea = estimate(adj);
    res.cv = ea.mean;
    res.cv_se = ea.se;
    return res;
}

struct LevelCircleRow {
    double r = 0.0;
    double area_below = 0.0;
    MomentRow row;
};

/**
 * Character moments of the full-turn ODE holonomy on levels r below the last saddle,
 * against d prod_F mu-hat_F/d over the faces under r (d e^{-area c2} for Villain).
 */
template <GroupPolicy G>
std::vector<LevelCircleRow> level_circle_check(const MorseLattice& lat, const ActionFamily<G>& a, const std::vector<double>& radii,
                                               const std::vector<int>& indices, std::size_t samples, std::uint64_t seed,
                                               unsigned threads = 1)
{
    std::vector<LevelCircleRow> out;
    const double h = lat.mesh(), top = lat.level_r(lat.last_saddle_level());
    for (double r : radii) {
        const double x = r / h;
        if (!(r > 0.0) || r > top || std::abs(x - std::round(x)) > 1e-9 * std::max(1.0, x))
            fail(ErrorKind::InvalidArgument, "level radius must be a grid level in (0, " + std::to_string(top) + "]");
        const std::size_t level = std::size_t(std::llround(x));
        SampleRegion reg;
        reg.level_hi = level;
        auto phi = per_sample(samples, threads, [&](std::size_t i) {
            auto f = assemble(sample_config(lat, a, seed, i, reg), lat);
            return G::class_angle(holonomy_ode(f, r, 0.0, lat.period()));
        });
        std::vector<double> below(lat.areas().begin(), lat.areas().begin() + std::ptrdiff_t(level * lat.cols()));
        for (int idx : indices) {
            LevelCircleRow row;
            row.r = r;
            row.area_below = lat.area_below(level);
            row.row.index = idx;
            row.row.dim = G::dim(idx);
            row.row.casimir = G::casimir(idx);
            std::vector<double> v(samples);
            for (std::size_t i = 0; i < samples; ++i) v[i] = G::class_character(idx, phi[i]);
            row.row.mc = estimate(v);
            auto [lg, sg] = detail::log_face_product(a, detail::tally(below), idx);
            row.row.prediction = G::dim(idx) * sg * std::exp(lg);
            out.push_back(row);
        }
    }
    return out;
}

/**
 * Size of the correction terms O_{N,theta} summed over columns, with unit constants:
 * per column, S^{3/2} + (sum s^{1/2}) S^p + sum s^p + sum s^{3/2} + S^2 where s are
 * the face areas and S their column sum.
 */
inline double correction_terms(const MorseLattice& lat, double p = 2.0)
{
    double total = 0.0;
    for (std::size_t j = 0; j < lat.cols(); ++j) {
        double S = 0.0, half = 0.0, sp = 0.0, s32 = 0.0;
        for (std::size_t i = 0; i < lat.rows(); ++i) {
            double s = lat.face_area(i, j);
            S += s;
            half += std::sqrt(s);
            sp += std::pow(s, p);
            s32 += s * std::sqrt(s);
        }
        total += S * std::sqrt(S) + half * std::pow(S, p) + sp + s32 + S * S;
    }
    return total;
}

} // namespace ym2
