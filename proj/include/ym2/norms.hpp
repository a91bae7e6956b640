#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "sampler.hpp"

namespace ym2 {

struct NormParams {
    double alpha = 0.4;
    int p = 8;
    double s = 0.4;

    void check() const
    {
        if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::ParameterOutOfRange, "alpha must lie in (0, 1)");
        if (p < 2) fail(ErrorKind::ParameterOutOfRange, "p must be an integer >= 2");
    }
};

namespace detail {

/// |x|^p from |x|^2.
inline double pow_half(double x2, int p)
{
    if (p % 2 == 0) {
        double r = 1.0;
        for (int k = 0; k < p / 2; ++k) r *= x2;
        return r;
    }
    return std::pow(x2, 0.5 * p);
}

template <std::size_t D>
double norm2(const std::array<double, D>& x)
{
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

/// Nodes and weights for int int_{cell i x cell j} F(x, y) |x - y|^{-1-q} dx dy on unit cells.
struct PairRule {
    std::vector<double> x, y, w;

    void add(double a, double b, double wt)
    {
        x.push_back(a);
        y.push_back(b);
        w.push_back(wt);
    }
};

/// Gauss-Legendre on a box, with the kernel folded into the weights.
template <unsigned M>
void box_rule(PairRule& out, double x0, double x1, double y0, double y1, double q)
{
    const auto& R = quad::Rule<M>::get();
    for (unsigned a = 0; a < M; ++a)
        for (unsigned b = 0; b < M; ++b) {
            double x = x0 + (x1 - x0) * R.x[a], y = y0 + (y1 - y0) * R.x[b];
            out.add(x, y, R.w[a] * R.w[b] * (x1 - x0) * (y1 - y0) * std::pow(std::abs(x - y), -1.0 - q));
        }
}

/**
 * Rule for cells i <= j (unit width). Same cell: the diagonal is resolved by
 * geometric grading in d = y - x, and only y > x is kept with weight 2 (the
 * integrands used are symmetric). Adjacent cells: grading toward the shared corner.
 */
template <unsigned M = 8>
PairRule pair_rule(std::size_t i, std::size_t j, double q, int grades = 24)
{
    PairRule r;
    const auto& R = quad::Rule<M>::get();
    const double ci = double(i), cj = double(j);
    if (i == j) {
        for (int g = 0; g < grades; ++g) {
            double d0 = std::ldexp(1.0, -g - 1), d1 = std::ldexp(1.0, -g);
            for (unsigned a = 0; a < M; ++a) {
                double d = d0 + (d1 - d0) * R.x[a], wd = R.w[a] * (d1 - d0);
                for (unsigned b = 0; b < M; ++b) {
                    double x = (1.0 - d) * R.x[b];
                    r.add(ci + x, ci + x + d, 2.0 * wd * R.w[b] * (1.0 - d) * std::pow(d, -1.0 - q));
                }
            }
        }
        return r;
    }
    if (j == i + 1) {
        // corner at (i+1, i+1); L-shaped shells [0, 2^-g]^2 minus [0, 2^-g-1]^2 in (u, v) = (c - x, y - c)
        const double c = cj;
        for (int g = 0; g < grades; ++g) {
            double s1 = std::ldexp(1.0, -g), s0 = 0.5 * s1;
            box_rule<M>(r, c - s1, c - s0, c, c + s0, q);
            box_rule<M>(r, c - s0, c, c + s0, c + s1, q);
            box_rule<M>(r, c - s1, c - s0, c + s0, c + s1, q);
        }
        return r;
    }
    box_rule<M>(r, ci, ci + 1.0, cj, cj + 1.0, q);
    return r;
}

} // namespace detail

struct GagliardoResult {
    double discrete = 0.0;   ///< 12^p / M^{1-p alpha} sum_{k<l} |f_k - f_l|^p / (l-k)^{1+p alpha}
    double quadrature = 0.0; ///< int int_{[0,1]^2} |f(x) - f(y)|^p / |x-y|^{1+p alpha}
};

/// Both sides of the Gagliardo bound for the piecewise-affine interpolant of values on k/M.
template <std::size_t D>
GagliardoResult gagliardo_1d(const std::vector<std::array<double, D>>& f, double alpha, int p)
{
    NormParams{alpha, p, 0.0}.check();
    if (f.size() < 2) fail(ErrorKind::ParameterOutOfRange, "need at least two grid values");
    const std::size_t M = f.size() - 1;
    const double q = p * alpha, h = 1.0 / double(M);
    GagliardoResult out;
    double sum = 0.0;
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t l = k + 1; l <= M; ++l) {
            std::array<double, D> d;
            for (std::size_t c = 0; c < D; ++c) d[c] = f[l][c] - f[k][c];
            sum += detail::pow_half(detail::norm2(d), p) / std::pow(double(l - k), 1.0 + q);
        }
    out.discrete = std::pow(12.0, p) / std::pow(double(M), 1.0 - q) * sum;

    auto slope = [&](std::size_t k) {
        std::array<double, D> s;
        for (std::size_t c = 0; c < D; ++c) s[c] = (f[k + 1][c] - f[k][c]) / h;
        return s;
    };
    auto value = [&](double x) {
        std::size_t k = std::min(M - 1, std::size_t(x / h));
        double t = x / h - double(k);
        std::array<double, D> v;
        for (std::size_t c = 0; c < D; ++c) v[c] = (1.0 - t) * f[k][c] + t * f[k + 1][c];
        return v;
    };
    // same cell: |slope|^p int int |x-y|^{p-1-q} = |slope|^p 2 h^{g+2} / ((g+1)(g+2)), g = p-1-q
    const double g = p - 1.0 - q;
    double total = 0.0;
    for (std::size_t k = 0; k < M; ++k)
        total += detail::pow_half(detail::norm2(slope(k)), p) * 2.0 * std::pow(h, g + 2.0) / ((g + 1.0) * (g + 2.0));
    // distinct cells, both orders
    for (std::size_t k = 0; k < M; ++k)
        for (std::size_t l = k + 1; l < M; ++l) {
            auto rule = detail::pair_rule(0, l - k, q);
            double s = 0.0;
            for (std::size_t n = 0; n < rule.w.size(); ++n) {
                auto a = value((double(k) + rule.x[n]) * h), b = value((double(k) + rule.y[n]) * h);
                std::array<double, D> d;
                for (std::size_t c = 0; c < D; ++c) d[c] = a[c] - b[c];
                s += rule.w[n] * detail::pow_half(detail::norm2(d), p);
            }
            total += 2.0 * s * std::pow(h, 1.0 - q);
        }
    out.quadrature = total;
    return out;
}

inline GagliardoResult gagliardo_1d(const std::vector<double>& f, double alpha, int p)
{
    std::vector<std::array<double, 1>> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) v[i] = {f[i]};
    return gagliardo_1d(v, alpha, p);
}

/**
 * Prefix sums of log M along levels: P(i, k) = sum_{j<k} log M^{(level0+i)}_{arc0+j},
 * so the line value A(k ->^m l) is P(m, l) - P(m, k).
 */
template <std::size_t D>
struct LineGrid {
    using Vec = std::array<double, D>;
    std::size_t level0 = 0, arc0 = 0, levels = 0, nodes = 0;
    double h = 1.0;
    std::vector<Vec> P;

    const Vec& at(std::size_t level, std::size_t node) const { return P[(level - level0) * nodes + node - arc0]; }
    Vec& at(std::size_t level, std::size_t node) { return P[(level - level0) * nodes + node - arc0]; }
};

/// Line grid over levels [l0, l1] and arc nodes [a0, a1] of a configuration.
template <GroupPolicy G>
LineGrid<G::algebra_dim> line_grid(const GaugeConfig<G>& cfg, double h, std::size_t l0, std::size_t l1, std::size_t a0, std::size_t a1)
{
    LineGrid<G::algebra_dim> g;
    g.level0 = l0;
    g.arc0 = a0;
    g.levels = l1 - l0 + 1;
    g.nodes = a1 - a0 + 1;
    g.h = h;
    g.P.assign(g.levels * g.nodes, {});
    for (std::size_t i = l0; i <= l1; ++i)
        for (std::size_t k = a0; k < a1; ++k) {
            auto lg = G::log(cfg.edge(i, k));
            auto& nxt = g.at(i, k + 1);
            nxt = g.at(i, k);
            for (std::size_t c = 0; c < lg.size(); ++c) nxt[c] += lg[c];
        }
    return g;
}

/// Levels [level_lo, level_hi] x arc nodes [node_lo, node_hi], inclusive.
struct Window {
    std::size_t level_lo = 0, level_hi = 0, node_lo = 0, node_hi = 0;
};

/**
 * h^{2(1 - p alpha)} sum_{n<m} sum_{k<l} |A(k ->^m l) - A(k ->^n l)|^p / ((l-k)^{1+p alpha} (m-n)^{1+p alpha})
 * over the window. The constant 12^{2p} of the bound is left to the caller.
 */
template <std::size_t D>
double discrete_aniso_seminorm(const LineGrid<D>& g, const Window& w, double alpha, int p)
{
    if (w.level_hi <= w.level_lo || w.node_hi <= w.node_lo) fail(ErrorKind::EmptyWindow, "window has no interior pairs");
    if (w.level_lo < g.level0 || w.level_hi >= g.level0 + g.levels || w.node_lo < g.arc0 || w.node_hi >= g.arc0 + g.nodes)
        fail(ErrorKind::IndexOutOfRange, "window outside the grid");
    const double q = p * alpha;
    const std::size_t K = w.node_hi - w.node_lo + 1, L = w.level_hi - w.level_lo + 1;
    std::vector<double> kern(std::max(K, L));
    for (std::size_t d = 1; d < kern.size(); ++d) kern[d] = std::pow(double(d), -1.0 - q);
    std::vector<std::array<double, D>> Q(K);
    double total = 0.0;
    for (std::size_t n = w.level_lo; n < w.level_hi; ++n)
        for (std::size_t m = n + 1; m <= w.level_hi; ++m) {
            for (std::size_t k = 0; k < K; ++k) {
                const auto &a = g.at(m, w.node_lo + k), &b = g.at(n, w.node_lo + k);
                for (std::size_t c = 0; c < D; ++c) Q[k][c] = a[c] - b[c];
            }
            double inner = 0.0;
            if (p == 8) {
                for (std::size_t k = 0; k + 1 < K; ++k) {
                    const auto qk = Q[k];
                    double acc = 0.0;
                    for (std::size_t l = k + 1; l < K; ++l) {
                        double x2 = 0.0;
                        for (std::size_t c = 0; c < D; ++c) {
                            double d = Q[l][c] - qk[c];
                            x2 += d * d;
                        }
                        double x4 = x2 * x2;
                        acc += kern[l - k] * (x4 * x4);
                    }
                    inner += acc;
                }
                total += kern[m - n] * inner;
                continue;
            }
            for (std::size_t k = 0; k + 1 < K; ++k)
                for (std::size_t l = k + 1; l < K; ++l) {
                    double x2 = 0.0;
                    for (std::size_t c = 0; c < D; ++c) {
                        double d = Q[l][c] - Q[k][c];
                        x2 += d * d;
                    }
                    inner += kern[l - k] * detail::pow_half(x2, p);
                }
            total += kern[m - n] * inner;
        }
    return std::pow(g.h, 2.0 * (1.0 - q)) * total;
}

/**
 * The continuum seminorm of the bilinear interpolant W(r, theta) of the grid over the
 * window: int |W(r',t') - W(r',t) - W(r,t') + W(r,t)|^p / (|r-r'|^{1+pa} |t-t'|^{1+pa}).
 */
template <std::size_t D>
double aniso_quadrature(const LineGrid<D>& g, const Window& w, double alpha, int p)
{
    if (w.level_hi <= w.level_lo || w.node_hi <= w.node_lo) fail(ErrorKind::EmptyWindow, "window has no interior pairs");
    const double q = p * alpha;
    const std::size_t nr = w.level_hi - w.level_lo, nt = w.node_hi - w.node_lo;
    // W at unit-cell coordinates (x, y) relative to the window corner
    auto W = [&](double x, double y, std::array<double, D>& out) {
        std::size_t i = std::min(nr - 1, std::size_t(x)), k = std::min(nt - 1, std::size_t(y));
        double a = x - double(i), b = y - double(k);
        const auto &p00 = g.at(w.level_lo + i, w.node_lo + k), &p01 = g.at(w.level_lo + i, w.node_lo + k + 1);
        const auto &p10 = g.at(w.level_lo + i + 1, w.node_lo + k), &p11 = g.at(w.level_lo + i + 1, w.node_lo + k + 1);
        for (std::size_t c = 0; c < D; ++c)
            out[c] = (1 - a) * ((1 - b) * p00[c] + b * p01[c]) + a * ((1 - b) * p10[c] + b * p11[c]);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = i; j < nr; ++j) {
            auto rr = detail::pair_rule<4>(i, j, q, 16);
            double mr = i == j ? 1.0 : 2.0;
            for (std::size_t k = 0; k < nt; ++k)
                for (std::size_t l = k; l < nt; ++l) {
                    auto rt = detail::pair_rule<4>(k, l, q, 16);
                    double mt = k == l ? 1.0 : 2.0;
                    double s = 0.0;
                    std::array<double, D> a, b, c, d;
                    for (std::size_t u = 0; u < rr.w.size(); ++u)
                        for (std::size_t v = 0; v < rt.w.size(); ++v) {
                            W(rr.y[u], rt.y[v], a);
                            W(rr.y[u], rt.x[v], b);
                            W(rr.x[u], rt.y[v], c);
                            W(rr.x[u], rt.x[v], d);
                            double x2 = 0.0;
                            for (std::size_t e = 0; e < D; ++e) {
                                double z = a[e] - b[e] - c[e] + d[e];
                                x2 += z * z;
                            }
                            s += rr.w[u] * rt.w[v] * detail::pow_half(x2, p);
                        }
                    total += mr * mt * s;
                }
        }
    // unit cells to physical cells of side h: each (x, y) pair contributes h^2 h^{-1-q}
    return std::pow(g.h, 2.0 * (1.0 - q)) * total;
}

struct WeightedNorm {
    double value = 0.0;
    double corona = 0.0; ///< sum over scales and corona squares
    double top = 0.0;    ///< near-saddle single-increment term
};

/// Levels and arc nodes spanned by the corona windows of saddle c (1-based).
inline Window saddle_span(const MorseLattice& lat, int c)
{
    const std::size_t per = std::size_t(1) << lat.resolution();
    const std::size_t rs = std::size_t(c) * per, ts = std::size_t(2 * c - 1) * per / 2, half = std::max<std::size_t>(per / 2, 1);
    return {rs - half, rs + half, ts - half, ts + half};
}

/**
 * sum_{n <= N-2} 2^{np(s-2a)} sum over the 12 corona squares of the discrete seminorm
 * plus 2^{2pN(s-2a)} |A(0 ->^{h} h) - A(0 ->^0 h)|^p, per saddle, summed over saddles.
 * At scale n the squares have side L = 2^{N-n-2} cells, tiling the 4L x 4L box
 * centred at the saddle minus its central 2L x 2L box.
 */
template <std::size_t D>
WeightedNorm weighted_norm(const MorseLattice& lat, const std::vector<LineGrid<D>>& grids, const NormParams& par)
{
    par.check();
    if (grids.size() != lat.saddles().size()) fail(ErrorKind::InvalidArgument, "need one line grid per saddle");
    const int N = lat.resolution();
    const std::size_t per = std::size_t(1) << N;
    WeightedNorm out;
    for (std::size_t c = 0; c < grids.size(); ++c) {
        const auto& g = grids[c];
        const std::size_t rs = (c + 1) * per, ts = (2 * c + 1) * per / 2;
        for (int n = 0; n <= N - 2; ++n) {
            const long long L = 1LL << (N - n - 2);
            const double wn = std::pow(2.0, n * par.p * (par.s - 2.0 * par.alpha));
            for (int a = -2; a <= 1; ++a)
                for (int b = -2; b <= 1; ++b) {
                    if ((a == -1 || a == 0) && (b == -1 || b == 0)) continue;
                    Window w{std::size_t((long long)rs + a * L), std::size_t((long long)rs + (a + 1) * L),
                             std::size_t((long long)ts + b * L), std::size_t((long long)ts + (b + 1) * L)};
                    out.corona += wn * discrete_aniso_seminorm(g, w, par.alpha, par.p);
                }
        }
        std::array<double, D> d;
        const auto &up = g.at(rs + 1, ts + 1), &up0 = g.at(rs + 1, ts), &lo = g.at(rs, ts + 1), &lo0 = g.at(rs, ts);
        for (std::size_t e = 0; e < D; ++e) d[e] = (up[e] - up0[e]) - (lo[e] - lo0[e]);
        out.top += std::pow(2.0, 2.0 * par.p * N * (par.s - 2.0 * par.alpha)) * detail::pow_half(detail::norm2(d), par.p);
    }
    out.value = out.corona + out.top;
    return out;
}

/// Line grids around every saddle for sample i; only the faces under the windows are drawn.
template <GroupPolicy G>
std::vector<LineGrid<G::algebra_dim>> saddle_grids(const MorseLattice& lat, const ActionFamily<G>& a, std::uint64_t seed,
                                                   std::uint64_t sample)
{
    std::vector<LineGrid<G::algebra_dim>> out;
    for (int c = 1; c <= 2 * lat.genus(); ++c) {
        auto w = saddle_span(lat, c);
        SampleRegion reg;
        reg.level_hi = w.level_hi;
        reg.col_lo = w.node_lo;
        reg.col_hi = w.node_hi;
        auto cfg = sample_config(lat, a, seed, sample, reg);
        out.push_back(line_grid(cfg, lat.mesh(), w.level_lo, w.level_hi, w.node_lo, w.node_hi));
    }
    return out;
}

struct TightnessRow {
    int N = 0;
    Estimate norm;
    Estimate top;
    std::size_t rejected = 0;
};

struct TightnessTable {
    std::vector<TightnessRow> rows;
    double slope = 0.0, slope_se = 0.0;         ///< log E[norm] against N
    double top_slope = 0.0, top_slope_se = 0.0; ///< log E[top term] against N
};

template <GroupPolicy G>
TightnessTable tightness_experiment(int genus, const std::vector<int>& ladder, const ActionFamily<G>& a, const NormParams& par,
                                    std::size_t samples, std::uint64_t seed, unsigned threads = 1, double total_area = 1.0)
{
    par.check();
    if (!(par.alpha < 0.5) || !(par.s < 0.5)) fail(ErrorKind::ParameterOutOfRange, "tightness needs alpha < 1/2 and s < 1/2");
    TightnessTable t;
    std::vector<double> xs, ys, sig, yt, st;
    for (int N : ladder) {
        if (N < 2) fail(ErrorKind::ParameterOutOfRange, "N must be >= 2 for corona windows");
        LatticeOptions o;
        o.spec = AreaSpec::MorseSingular;
        o.total_area = total_area;
        MorseLattice lat(genus, N, o);
        std::vector<double> v(samples), top(samples);
        std::vector<char> bad(samples, 0);
        parallel_for(samples, threads, [&](std::size_t i) {
            try {
                auto w = weighted_norm(lat, saddle_grids(lat, a, seed, i), par);
                v[i] = w.value;
                top[i] = w.top;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::CutLocus) throw;
                bad[i] = 1;
            }
        });
        std::vector<double> kv, kt;
        for (std::size_t i = 0; i < samples; ++i)
            if (!bad[i]) {
                kv.push_back(v[i]);
                kt.push_back(top[i]);
            }
        TightnessRow row;
        row.N = N;
        row.rejected = samples - kv.size();
        if (double(row.rejected) > 1e-3 * double(samples))
            fail(ErrorKind::CutLocusFractionExceeded, std::to_string(row.rejected) + " samples at the cut locus");
        row.norm = estimate(kv);
        row.top = estimate(kt);
        t.rows.push_back(row);
        xs.push_back(N);
        ys.push_back(std::log(row.norm.mean));
        sig.push_back(row.norm.se / row.norm.mean);
        yt.push_back(std::log(row.top.mean));
        st.push_back(row.top.se / row.top.mean);
    }
    if (xs.size() >= 3) {
        auto f = fit_line(xs, ys, sig);
        t.slope = f.slope;
        t.slope_se = f.slope_se;
        auto ft = fit_line(xs, yt, st);
        t.top_slope = ft.slope;
        t.top_slope_se = ft.slope_se;
    }
    return t;
}

} // namespace ym2
