// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>

#include "ym2/field.hpp"
#include "ym2/norms.hpp"

using namespace ym2;

namespace {

const unsigned kThreads = std::max(1u, std::thread::hardware_concurrency());

struct Outcome {
    bool ok = false;
    std::string detail;
};

std::string fmt(const char* f, auto... a)
{
    char b[512];
    std::snprintf(b, sizeof b, f, a...);
    return b;
}

std::vector<double> random_partition(Stream& rng, double total, int pieces)
{
    std::vector<double> w(pieces);
    double s = 0;
    for (auto& x : w) s += (x = 0.2 + 0.8 * rng.uniform());
    for (auto& x : w) x *= total / s;
    return w;
}

std::vector<double> refine(Stream& rng, std::vector<double> areas)
{
    int splits = 1 + int(rng() % 5);
    for (int i = 0; i < splits; ++i) {
        std::size_t k = rng() % areas.size();
        double f = 0.05 + 0.9 * rng.uniform(), a = areas[k];
        areas[k] = f * a;
        areas.push_back((1 - f) * a);
    }
    return areas;
}

Outcome graph_independence()
{
    Stream rng(20240101, 0);
    ActionFamily<U1> vu(ActionKind::Villain);
    ActionFamily<SU2> vs(ActionKind::Villain);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        int genus = trial % 3, k = (trial / 3) % 2;
        auto base = random_partition(rng, 0.5 + 1.5 * rng.uniform(), 1 + int(rng() % 6));
        auto fine = refine(rng, base);
        double d;
        if (trial % 2) {
            std::vector<SU2::Element> b;
            if (k) b.push_back(SU2::haar(rng));
            d = segal_amplitude<SU2>(genus, b, base, vs).value - segal_amplitude<SU2>(genus, b, fine, vs).value;
        } else {
            std::vector<U1::Element> b;
            if (k) b.push_back(U1::haar(rng));
            d = segal_amplitude<U1>(genus, b, base, vu).value - segal_amplitude<U1>(genus, b, fine, vu).value;
        }
        worst = std::max(worst, std::abs(d));
    }
    return {worst < 1e-11, fmt("max |dZ| = %.3g over 50 refinements", worst)};
}

template <GroupPolicy G>
bool llt_ok(ActionKind kind, std::string& detail)
{
    ActionFamily<G> a(kind);
    auto rows = llt_report(a, {8, 32, 128, 512}, 2);
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && !(rows[i].sup_distance < rows[i - 1].sup_distance)) ok = false;
        if (rows[i].n >= 32 && !std::isfinite(double(rows[i].ck_distance))) ok = false;
        if (i > 0 && rows[i - 1].n >= 32 && rows[i].ck_distance > rows[i - 1].ck_distance) ok = false;
    }
    detail += fmt(" %s/%s sup %.2e->%.2e C2 %.2e->%.2e;", to_string(G::tag), to_string(kind), double(rows.front().sup_distance),
                  double(rows.back().sup_distance), double(rows[1].ck_distance), double(rows.back().ck_distance));
    return ok;
}

Outcome local_limit()
{
    std::string d;
    bool ok = true;
    for (auto k : {ActionKind::Wilson, ActionKind::Manton}) {
        ok = llt_ok<U1>(k, d) && ok;
        ok = llt_ok<SU2>(k, d) && ok;
    }
    return {ok, d};
}

Outcome face_marginals()
{
    LatticeOptions o;
    o.spec = AreaSpec::MorseSingular;
    o.total_area = 1000.0;
    MorseLattice lat(1, 5, o);
    ActionFamily<U1> a(ActionKind::Villain);
    // a column of stacked faces sharing edges, plus two faces at the first saddle
    const std::size_t rs = 32, ts = 16;
    std::vector<std::size_t> faces{lat.face_index(0, 0), lat.face_index(1, 0), lat.face_index(2, 0), lat.face_index(rs, ts),
                                   lat.face_index(rs - 1, ts)};
    auto rep = face_marginal_check(lat, a, faces, {1, 2}, 100000, 3003, kThreads);
    double zm = 0, zc = 0;
    for (auto& m : rep.means) zm = std::max(zm, std::abs(m.row.z()));
    for (auto& c : rep.covariances) zc = std::max(zc, std::abs(c.cov.mean / c.cov.se));
    return {zm <= 4.0 && zc <= 4.0, fmt("max |z| means %.2f, covariances %.2f (%zu means, %zu pairs)", zm, zc, rep.means.size(),
                                        rep.covariances.size())};
}

Outcome boundary_law()
{
    ActionFamily<SU2> a(ActionKind::Villain);
    double zmax = 0;
    std::string d;
    for (int g : {1, 2}) {
        MorseLattice lat(g, 2);
        for (auto& r : boundary_law_check(lat, a, {0, 1, 2}, 100000, 4004 + g, kThreads)) {
            zmax = std::max(zmax, std::abs(r.z()));
            d += fmt(" g%d m%d %.4f/%.4f;", g, r.index, r.mc.mean, r.prediction);
        }
    }
    return {zmax <= 4.0, fmt("max |z| %.2f;", zmax) + d};
}

template <GroupPolicy G>
bool charfun_ladder(const ActionFamily<G>& a, std::string& d)
{
    LatticeOptions o;
    o.total_area = 8.0;
    auto psi = TestForm::bump(10.0, 0.0, 0.25, 0.0, 0.25);
    std::vector<double> err;
    double se = 0;
    for (int N = 3; N <= 8; ++N) {
        MorseLattice lat(1, N, o);
        auto r = charfun_mc(lat, a, psi, 100000, 5005, kThreads);
        err.push_back(std::abs(r.cv - r.limit));
        se = r.cv_se;
    }
    bool dec = true;
    for (std::size_t i = 1; i < err.size(); ++i) dec = dec && err[i] < err[i - 1];
    d += fmt(" %s/%s err %.3g..%.3g (SE %.2g)%s;", to_string(G::tag), to_string(a.kind()), err.front(), err.back(), se,
             dec ? "" : " not decreasing");
    return dec && err.back() < 0.01 + 4.0 * se;
}

Outcome white_noise()
{
    std::string d;
    bool ok = charfun_ladder(ActionFamily<U1>(ActionKind::Villain), d);
    ok = charfun_ladder(ActionFamily<SU2>(ActionKind::Wilson), d) && ok;
    return {ok, d};
}

Outcome level_circles()
{
    LatticeOptions o;
    o.total_area = 4.0;
    MorseLattice lat(1, 3, o);
    ActionFamily<SU2> a(ActionKind::Villain);
    double zmax = 0;
    std::string d;
    for (auto& r : level_circle_check(lat, a, {0.5, 1.0, 1.5}, {1, 2}, 100000, 6006, kThreads)) {
        zmax = std::max(zmax, std::abs(r.row.z()));
        d += fmt(" r%.1f m%d %.4f/%.4f;", r.r, r.row.index, r.row.mc.mean, r.row.prediction);
    }
    return {zmax <= 4.0, fmt("max |z| %.2f;", zmax) + d};
}

Outcome tightness()
{
    ActionFamily<U1> a(ActionKind::Villain);
    auto t = tightness_experiment(1, {3, 4, 5, 6, 7, 8}, a, NormParams{0.4, 8, 0.4}, 2000, 7007, kThreads);
    std::string d = fmt("slope %.4f +- %.4f; E norm", t.slope, t.slope_se);
    for (auto& r : t.rows) d += fmt(" %.3g", r.norm.mean);
    return {t.slope <= 2.0 * t.slope_se, d};
}

Outcome gagliardo()
{
    std::size_t bad = 0, total = 0;
    double worst = 0;
    for (double al : {0.3, 0.45})
        for (int p : {2, 4})
            for (int i = 0; i < 100; ++i) {
                Stream rng(8008, std::uint64_t(i), std::uint64_t(p));
                std::size_t M = 1 + rng() % 64;
                GagliardoResult g;
                if (i % 2) {
                    std::vector<std::array<double, 3>> f(M + 1);
                    for (auto& v : f)
                        for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
                    g = gagliardo_1d(f, al, p);
                } else {
                    std::vector<double> f(M + 1);
                    for (auto& x : f) x = 2.0 * rng.uniform() - 1.0;
                    g = gagliardo_1d(f, al, p);
                }
                ++total;
                bad += !(g.quadrature <= g.discrete);
                worst = std::max(worst, g.quadrature / g.discrete);
            }
    return {bad == 0, fmt("%zu violations in %zu; max LHS/RHS %.3g", bad, total, worst)};
}

Outcome conditioning()
{
    LatticeOptions o;
    o.total_area = 2.0;
    MorseLattice lat(1, 5, o);
    ActionFamily<U1> a(ActionKind::Villain);
    const std::size_t j = lat.last_saddle_level() + 1, row = j / 2, col = 0;
    auto others = lat.areas();
    const double s = others[lat.face_index(row, col)];
    others.erase(others.begin() + std::ptrdiff_t(lat.face_index(row, col)));
    const double face_oracle = closed_face_moment<U1>(1, others, s, a, 1);
    auto rf = condition_close(lat, a, face_character<U1>(row, col, 1), j, 200000, 9009, kThreads);

    const auto w = lat.level_circle(j);
    std::vector<double> rest(lat.areas().begin() + std::ptrdiff_t(j * lat.cols()), lat.areas().end());
    const double circle_oracle = closed_face_moment<U1>(1, rest, lat.area_below(j), a, 1);
    Observable<U1> circle{"circle", j, [&](const GaugeConfig<U1>& c) { return std::cos(holonomy(c, lat, w).angle); }};
    auto rc = condition_close(lat, a, circle, j, 200000, 9010, kThreads);

    double zf = (rf.estimate - face_oracle) / rf.se, zc = (rc.estimate - circle_oracle) / rc.se;
    bool ok = std::abs(zf) <= 4.0 && std::abs(zc) <= 4.0 && rf.ess_fraction >= 0.05 && rc.ess_fraction >= 0.05;
    return {ok, fmt("face z %.2f, circle z %.2f (%.4f vs %.4f), ESS %.2f", zf, zc, rc.estimate, circle_oracle, rf.ess_fraction)};
}

Outcome area_scaling_check()
{
    auto s = area_scaling(1, {6, 7, 8, 9, 10});
    bool ok = s.strip_exponent >= 0.8;
    std::string d = fmt("strip exponent %.3f; corona slopes", s.strip_exponent);
    for (double c : s.corona_slope) {
        ok = ok && std::abs(c - 1.0) <= 0.15;
        d += fmt(" %.3f", c);
    }
    return {ok, d};
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> all{
        {"villain graph-independence", 10, graph_independence},
        {"local limit theorem", 30, local_limit},
        {"face marginals", 60, face_marginals},
        {"boundary-holonomy law", 120, boundary_law},
        {"white-noise characteristic functional", 300, white_noise},
        {"brownian level-circle law", 60, level_circles},
        {"tightness surrogate", 600, tightness},
        {"gagliardo inequality", 30, gagliardo},
        {"conditioning consistency", 300, conditioning},
        {"area scaling", 10, area_scaling_check},
    };
    int failed = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs < all[i].budget_s;
        bool pass = o.ok && in_time;
        failed += !pass;
        if (!o.detail.empty() && o.detail.front() == ' ') o.detail.erase(0, 1);
        std::printf("%s %zu %s: %s [%.1fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str(), secs,
                    all[i].budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
