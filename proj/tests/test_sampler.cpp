#include <gtest/gtest.h>

#include <cmath>

#include "ym2/sampler.hpp"

using namespace ym2;

namespace {

LatticeOptions uniform(double total)
{
    LatticeOptions o;
    o.total_area = total;
    return o;
}

template <class F>
ErrorKind kind_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Config;
}

// face holonomy in the full edge representation: bottom, right, top^-1, left^-1
template <class G>
typename G::Element plaquette(const std::vector<typename G::Element>& hor, const std::vector<typename G::Element>& ver,
                              std::size_t cols, std::size_t i, std::size_t j)
{
    std::size_t jr = (j + 1) % cols;
    auto h = G::multiply(hor[i * cols + j], ver[i * cols + jr]);
    h = G::multiply(h, G::inverse(hor[(i + 1) * cols + j]));
    return G::multiply(h, G::inverse(ver[i * cols + j]));
}

} // namespace

TEST(Sampler, FaceMarginals)
{
    MorseLattice lat(1, 2, uniform(12.0));
    const double t = lat.face_area(0);
    ActionFamily<U1> u1(ActionKind::Villain);
    ActionFamily<SU2> su2(ActionKind::Villain);
    const std::size_t n = 20000;
    std::vector<double> a(n), b(n), c(n), d(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto g = face_increment(lat, u1, 7, i, 5);
        auto q = face_increment(lat, su2, 7, i, 5);
        a[i] = std::cos(g.angle);
        b[i] = SU2::class_character(1, SU2::class_angle(q)) / 2.0;
        c[i] = std::cos(face_increment(lat, u1, 7, i, 9).angle);
        d[i] = std::cos(stable_element<U1>(lat, 7, i, 0).angle);
    }
    auto ea = estimate(a), eb = estimate(b);
    EXPECT_LT(std::abs(ea.mean - std::exp(-0.5 * t)) / ea.se, 5.0);
    EXPECT_LT(std::abs(eb.mean - std::exp(-1.5 * t)) / eb.se, 5.0);
    auto cov = covariance(a, c);
    EXPECT_LT(std::abs(cov.mean) / cov.se, 5.0);
    auto ed = estimate(d);
    EXPECT_LT(std::abs(ed.mean) / ed.se, 5.0);
}

TEST(Sampler, WordsAndRegions)
{
    MorseLattice lat(1, 2, uniform(2.0));
    ActionFamily<SU2> a(ActionKind::Wilson);
    auto cfg = sample_config(lat, a, 3, 11);
    auto id = holonomy(cfg, lat, Word{});
    EXPECT_EQ(id.q, SU2::identity().q);
    const std::size_t f = lat.face_index(3, 5);
    auto hf = holonomy(cfg, lat, Word{{Letter::Kind::Face, f, false}});
    auto direct = face_increment(lat, a, 3, 11, f);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(hf.q[k], direct.q[k], 1e-12);
    auto bottom = holonomy(cfg, lat, lat.level_circle(0, false));
    EXPECT_EQ(bottom.q, SU2::identity().q);
    EXPECT_EQ(kind_of([&] { holonomy(cfg, lat, Word{{Letter::Kind::Stable, 9, false}}); }), ErrorKind::UnknownGenerator);
    EXPECT_EQ(kind_of([&] { holonomy(cfg, lat, Word{{Letter::Kind::Face, lat.faces(), false}}); }),
              ErrorKind::UnknownGenerator);

    // a partial region is bitwise the full configuration there
    SampleRegion r;
    r.level_hi = 6;
    r.col_lo = 2;
    r.col_hi = 5;
    auto part = sample_config(lat, a, 3, 11, r);
    for (std::size_t i = 0; i <= 6; ++i)
        for (std::size_t j = 2; j < 5; ++j) EXPECT_EQ(part.edge(i, j).q, cfg.edge(i, j).q);
    for (std::size_t b = 0; b < cfg.U.size(); ++b) EXPECT_EQ(part.U[b].q, cfg.U[b].q);
}

TEST(Sampler, GaugeInvariance)
{
    // random vertex transformations of the full edge set leave plaquette classes and the level circle trace fixed
    MorseLattice lat(1, 2, uniform(3.0));
    ActionFamily<SU2> a(ActionKind::Villain);
    const std::size_t cols = lat.cols(), levels = lat.levels();
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto cfg = sample_config(lat, a, 21, s);
        std::vector<SU2::Element> hor = cfg.M, ver(lat.faces(), SU2::identity()), g(levels * cols);
        Stream rng(99, s);
        for (auto& x : g) x = SU2::haar(rng);
        std::vector<SU2::Element> hor2(hor.size()), ver2(ver.size());
        for (std::size_t i = 0; i < levels; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                std::size_t jr = (j + 1) % cols;
                hor2[i * cols + j] = SU2::multiply(SU2::multiply(g[i * cols + j], hor[i * cols + j]), SU2::inverse(g[i * cols + jr]));
                if (i + 1 < levels)
                    ver2[i * cols + j] =
                        SU2::multiply(SU2::multiply(g[i * cols + j], ver[i * cols + j]), SU2::inverse(g[(i + 1) * cols + j]));
            }
        for (std::size_t i = 0; i < lat.rows(); ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                double before = plaquette<SU2>(hor, ver, cols, i, j).q[0];
                double after = plaquette<SU2>(hor2, ver2, cols, i, j).q[0];
                worst = std::max(worst, std::abs(before - after));
                // the plaquette is conjugate to the inverse face increment
                EXPECT_NEAR(before, cfg.increment(i, j).q[0], 1e-12);
            }
        auto circle = [&](const std::vector<SU2::Element>& h, std::size_t level) {
            auto x = SU2::identity();
            for (std::size_t j = 0; j < cols; ++j) x = SU2::multiply(x, h[level * cols + j]);
            return x.q[0];
        };
        worst = std::max(worst, std::abs(circle(hor, 7) - circle(hor2, 7)));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Sampler, BoundaryLawGenusOne)
{
    MorseLattice lat(1, 2, uniform(1.0));
    ActionFamily<SU2> a(ActionKind::Villain);
    auto rows = boundary_law_check(lat, a, {0, 1, 2}, 20000, 5);
    EXPECT_DOUBLE_EQ(rows[0].mc.mean, 1.0);
    for (auto& r : rows) EXPECT_LT(std::abs(r.z()), 4.5) << r.index;
    EXPECT_NEAR(rows[1].prediction, std::exp(-1.5) / 2.0, 1e-12);

    ActionFamily<U1> u(ActionKind::Wilson);
    for (auto& r : boundary_law_check(lat, u, {1, 2}, 20000, 6)) EXPECT_LT(std::abs(r.z()), 4.5) << r.index;
}

TEST(Sampler, BoundaryLawGenusTwo)
{
    MorseLattice lat(2, 1, uniform(0.8));
    ActionFamily<SU2> a(ActionKind::Villain);
    auto rows = boundary_law_check(lat, a, {1, 2}, 20000, 8);
    for (auto& r : rows) EXPECT_LT(std::abs(r.z()), 4.5) << r.index;
    EXPECT_NEAR(rows[0].prediction, std::exp(-0.8 * 1.5) / 8.0, 1e-12);
}

TEST(Sampler, ConditioningMatchesCharacterSums)
{
    MorseLattice lat(1, 2, uniform(2.0));
    ActionFamily<U1> a(ActionKind::Villain);
    const std::size_t j = lat.last_saddle_level() + 1, row = 2, col = 3;
    std::vector<double> others = lat.areas();
    const double s = others[lat.face_index(row, col)];
    others.erase(others.begin() + std::ptrdiff_t(lat.face_index(row, col)));
    for (int n : {1, 2}) {
        double exact = closed_face_moment<U1>(1, others, s, a, n);
        auto r = condition_close(lat, a, face_character<U1>(row, col, n), j, 40000, 17);
        EXPECT_LT(std::abs(r.estimate - exact) / r.se, 4.5) << n << " " << r.estimate << " " << exact;
        EXPECT_GT(r.ess_fraction, 0.05);
    }

    // on U1 Villain the level-j circle acts as a single face of area below j, which the constraint pulls strongly
    const auto w = lat.level_circle(j);
    std::vector<double> rest(lat.areas().begin() + std::ptrdiff_t(j * lat.cols()), lat.areas().end());
    const double below = lat.area_below(j);
    for (int n : {1, 2}) {
        Observable<U1> circle{"circle", j, [&](const GaugeConfig<U1>& c) { return std::cos(n * holonomy(c, lat, w).angle); }};
        double exact = closed_face_moment<U1>(1, rest, below, a, n);
        auto r = condition_close(lat, a, circle, j, 40000, 17);
        EXPECT_LT(std::abs(r.estimate - exact) / r.se, 4.5) << n;
        EXPECT_GT(std::abs(exact - std::exp(-0.5 * n * n * below)), 0.2);
    }

    Observable<U1> one{"one", 0, [](const GaugeConfig<U1>&) { return 1.0; }};
    EXPECT_NEAR(condition_close(lat, a, one, j, 500, 1).estimate, 1.0, 1e-14);

    EXPECT_EQ(kind_of([&] { condition_close(lat, a, face_character<U1>(j, 0, 1), j, 10, 1); }), ErrorKind::SupportViolation);
    EXPECT_EQ(kind_of([&] { condition_close(lat, a, one, lat.last_saddle_level(), 10, 1); }), ErrorKind::LevelBelowSaddles);
}

TEST(Sampler, ConditioningSU2)
{
    MorseLattice lat(1, 1, uniform(1.5));
    ActionFamily<SU2> a(ActionKind::Villain);
    const std::size_t j = lat.last_saddle_level() + 1, row = 1, col = 0;
    std::vector<double> others = lat.areas();
    const double s = others[lat.face_index(row, col)];
    others.erase(others.begin() + std::ptrdiff_t(lat.face_index(row, col)));
    double exact = closed_face_moment<SU2>(1, others, s, a, 1);
    auto r = condition_close(lat, a, face_character<SU2>(row, col, 1), j, 40000, 23);
    EXPECT_LT(std::abs(r.estimate - exact) / r.se, 4.5) << r.estimate << " " << exact;
}

TEST(Sampler, EssCollapse)
{
    // nearly all area sits low, so the rest density is a narrow spike against a Haar-like H_j
    LatticeOptions o;
    o.total_area = 20.0;
    o.smooth_density = [](double r, double) { return std::exp(-4.0 * r); };
    MorseLattice lat(1, 1, o);
    ActionFamily<U1> a(ActionKind::Villain);
    Observable<U1> one{"one", 0, [](const GaugeConfig<U1>&) { return 1.0; }};
    EXPECT_EQ(kind_of([&] { condition_close(lat, a, one, lat.levels() - 2, 4000, 3, 1, 4e6); }), ErrorKind::ESSCollapse);
}

TEST(Sampler, CausalMarkov)
{
    // given H_j, what lies above j is independent of what lies below
    MorseLattice lat(1, 2, uniform(0.5));
    ActionFamily<U1> a(ActionKind::Villain);
    const auto mid = lat.level_circle(lat.last_saddle_level() + 1), top = lat.level_circle(lat.levels() - 1);
    const std::size_t n = 40000, bins = 40;
    std::vector<double> x(n), y(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto cfg = sample_config(lat, a, 31, i);
        x[i] = std::sin(cfg.increment(0, 0).angle);
        double hm = holonomy(cfg, lat, mid).angle, ht = holonomy(cfg, lat, top).angle;
        y[i] = std::sin(ht);
        h[i] = hm;
    }
    auto slope = [&](bool binned) {
        std::vector<double> sx(bins, 0), sy(bins, 0), cnt(bins, 0);
        auto bin = [&](std::size_t i) { return binned ? std::min(bins - 1, std::size_t((h[i] + kPi) / (2 * kPi) * bins)) : 0; };
        for (std::size_t i = 0; i < n; ++i) {
            sx[bin(i)] += x[i];
            sy[bin(i)] += y[i];
            cnt[bin(i)] += 1;
        }
        double sxy = 0, sxx = 0;
        std::vector<double> rx(n), ry(n);
        for (std::size_t i = 0; i < n; ++i) {
            rx[i] = x[i] - sx[bin(i)] / cnt[bin(i)];
            ry[i] = y[i] - sy[bin(i)] / cnt[bin(i)];
            sxy += rx[i] * ry[i];
            sxx += rx[i] * rx[i];
        }
        double b = sxy / sxx, ss = 0;
        for (std::size_t i = 0; i < n; ++i) ss += (ry[i] - b * rx[i]) * (ry[i] - b * rx[i]);
        return b / std::sqrt(ss / double(n - 2) / sxx);
    };
    EXPECT_GT(std::abs(slope(false)), 10.0);
    EXPECT_LT(std::abs(slope(true)), 4.5);
}

TEST(Sampler, IncrementMoments)
{
    MorseLattice lat(1, 4, uniform(1.0));
    ActionFamily<U1> a(ActionKind::Villain);
    const double eps = lat.face_area(0);
    struct W {
        std::size_t k, l, m, n;
    };
    for (auto w : {W{0, 4, 8, 2}, W{3, 19, 40, 37}, W{10, 11, 30, 0}}) {
        double var = double((w.l - w.k) * (w.m - w.n)) * eps;
        auto two = increment_moment_check(lat, a, w.k, w.l, w.m, w.n, 2.0, 20000, 4);
        auto four = increment_moment_check(lat, a, w.k, w.l, w.m, w.n, 4.0, 20000, 4);
        EXPECT_LT(std::abs(two.mc.mean - var) / two.mc.se, 5.0);
        EXPECT_LT(std::abs(four.mc.mean - 3 * var * var) / four.mc.se, 5.0);
        EXPECT_EQ(two.rejected, 0u);
        EXPECT_NEAR(two.eps, eps, 1e-15);
        EXPECT_LE(two.mc.mean, 1.1 * two.shape);
    }
    EXPECT_EQ(increment_moment_check(lat, a, 5, 5, 8, 2, 2.0, 10, 4).mc.mean, 0.0);
    EXPECT_EQ(kind_of([&] { increment_moment_check(lat, a, 0, 4, lat.levels(), 2, 2.0, 10, 4); }), ErrorKind::IndexOutOfRange);
}

TEST(Sampler, ThreadInvariance)
{
    MorseLattice lat(1, 2, uniform(1.0));
    ActionFamily<SU2> a(ActionKind::Wilson);
    auto one = boundary_law_check(lat, a, {1, 2}, 3000, 9, 1);
    auto three = boundary_law_check(lat, a, {1, 2}, 3000, 9, 3);
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].mc.mean, three[i].mc.mean);
        EXPECT_EQ(one[i].mc.se, three[i].mc.se);
    }
    auto again = boundary_law_check(lat, a, {1, 2}, 3000, 9, 2);
    EXPECT_EQ(one[1].mc.mean, again[1].mc.mean);
}

TEST(Sampler, FaceMarginalCheck)
{
    MorseLattice lat(1, 3, uniform(4.0));
    ActionFamily<U1> a(ActionKind::Wilson);
    std::vector<std::size_t> faces{lat.face_index(0, 0), lat.face_index(0, 1), lat.face_index(1, 0), lat.face_index(3, 5)};
    auto rep = face_marginal_check(lat, a, faces, {1, 2}, 20000, 3, 2);
    ASSERT_EQ(rep.means.size(), 8u);
    ASSERT_EQ(rep.covariances.size(), 12u);
    for (auto& m : rep.means) {
        EXPECT_LT(std::abs(m.row.z()), 4.5);
        EXPECT_NEAR(m.row.prediction, a.fourier_coeff(lat.face_area(m.face), m.row.index), 1e-15);
    }
    for (auto& c : rep.covariances) EXPECT_LT(std::abs(c.cov.mean) / c.cov.se, 4.5);
    auto again = face_marginal_check(lat, a, faces, {1, 2}, 20000, 3, 1);
    EXPECT_EQ(again.means[5].row.mc.mean, rep.means[5].row.mc.mean);
    EXPECT_EQ(kind_of([&] { face_marginal_check(lat, a, {lat.faces()}, {1}, 10, 1); }), ErrorKind::IndexOutOfRange);
}
