#include <gtest/gtest.h>

#include <cmath>

#include "ym2/field.hpp"

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

template <class G>
GaugeConfig<G> identity_config(const MorseLattice& lat)
{
    GaugeConfig<G> c;
    c.levels = lat.levels();
    c.cols = lat.cols();
    c.region.level_hi = c.levels - 1;
    c.region.col_hi = c.cols;
    c.M.assign(c.levels * c.cols, G::identity());
    c.U.assign(2 * lat.genus(), G::identity());
    return c;
}

double dist(const SU2::Element& a, const SU2::Element& b)
{
    double d = 0;
    for (int k = 0; k < 4; ++k) d = std::max(d, std::abs(a.q[k] - b.q[k]));
    return d;
}

} // namespace

TEST(Field, ZeroForm)
{
    MorseLattice lat(1, 3);
    auto f = assemble(identity_config<SU2>(lat), lat);
    auto v = eval(f, 0.37, 1.2);
    for (double c : v) EXPECT_EQ(c, 0.0);
    auto li = line_integral(f, 3.5, 0.0, lat.period());
    for (double c : li) EXPECT_EQ(c, 0.0);
    EXPECT_LT(dist(holonomy_ode(f, 3.5, 0.0, lat.period()), SU2::identity()), 1e-15);
    for (auto& x : xi_N(identity_config<SU2>(lat), lat))
        for (double c : x) EXPECT_EQ(c, 0.0);
}

TEST(Field, Interpolation)
{
    MorseLattice lat(1, 3, uniform(2.0));
    ActionFamily<SU2> a(ActionKind::Villain);
    auto cfg = sample_config(lat, a, 4, 2);
    auto f = assemble(cfg, lat);
    const double h = lat.mesh();
    for (std::size_t i : {0u, 3u, 17u}) {
        for (std::size_t j : {0u, 5u, 15u}) {
            auto node = eval(f, i * h, (j + 0.5) * h);
            auto lg = SU2::log(cfg.edge(i, j));
            for (int c = 0; c < 3; ++c) EXPECT_NEAR(node[c], lg[c] / h, 1e-12);
            auto mid = eval(f, (i + 0.5) * h, (j + 0.3) * h);
            auto up = eval(f, (i + 1) * h, (j + 0.5) * h);
            for (int c = 0; c < 3; ++c) EXPECT_NEAR(mid[c], 0.5 * (node[c] + up[c]), 1e-12);
        }
    }
    auto bottom = eval(f, 0.0, 0.7);
    for (double c : bottom) EXPECT_EQ(c, 0.0);
}

TEST(Field, TopCircleMatchesSampler)
{
    for (int g : {1, 2}) {
        MorseLattice lat(g, 2, uniform(1.0));
        ActionFamily<SU2> a(ActionKind::Wilson);
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto cfg = sample_config(lat, a, 12, s);
            auto f = assemble(cfg, lat);
            const std::size_t top = lat.levels() - 1;
            auto word = holonomy(cfg, lat, lat.level_circle(top));
            EXPECT_LT(dist(holonomy_ode(f, lat.level_r(top), 0.0, lat.period()), word), 1e-12);
            // below the saddles the circle carries no insertions
            auto bare = holonomy(cfg, lat, lat.level_circle(5, false));
            EXPECT_LT(dist(holonomy_ode(f, lat.level_r(5), 0.0, lat.period()), bare), 1e-12);
        }
    }
}

TEST(Field, Multiplicativity)
{
    MorseLattice lat(2, 3, uniform(3.0));
    ActionFamily<SU2> a(ActionKind::Manton);
    auto f = assemble(sample_config(lat, a, 8, 1), lat);
    Stream rng(5, 5);
    for (int trial = 0; trial < 50; ++trial) {
        double r = rng.uniform() * lat.level_r(lat.rows());
        double t1 = rng.uniform() * lat.period(), t2 = t1 + rng.uniform() * 1.5, t3 = t2 + rng.uniform() * 1.5;
        auto lhs = SU2::multiply(holonomy_ode(f, r, t1, t2), holonomy_ode(f, r, t2, t3));
        EXPECT_LT(dist(lhs, holonomy_ode(f, r, t1, t3)), 1e-12);
    }
    EXPECT_EQ(kind_of([&] { line_integral(f, 1.0, 0.5, 0.5); }), ErrorKind::DegenerateInterval);
    EXPECT_EQ(kind_of([&] { holonomy_ode(f, 1.0, 0.0, lat.period() + 0.1); }), ErrorKind::DegenerateInterval);
}

TEST(Field, LineIntegralCrossings)
{
    MorseLattice lat(1, 2, uniform(1.0));
    ActionFamily<U1> a(ActionKind::Villain);
    auto cfg = sample_config(lat, a, 3, 3);
    auto f = assemble(cfg, lat);
    const double top = lat.level_r(lat.levels() - 1);
    // full circle above the saddles: the U terms cancel in pairs
    double plain = 0;
    for (std::size_t j = 0; j < lat.cols(); ++j) plain += U1::log(cfg.edge(lat.levels() - 1, j))[0];
    EXPECT_NEAR(line_integral(f, top, 0.0, lat.period())[0], plain, 1e-12);
    // arcs 0..2 and the slot-1 crossing at theta = 1/2
    double part = U1::log(cfg.U[0])[0];
    for (std::size_t j = 0; j < 3; ++j) part += U1::log(cfg.edge(lat.levels() - 1, j))[0];
    EXPECT_NEAR(line_integral(f, top, 0.0, 0.75)[0], part, 1e-12);
    // the same window below the saddles has no crossing
    double low = 0;
    for (std::size_t j = 0; j < 3; ++j) low += U1::log(cfg.edge(4, j))[0];
    EXPECT_NEAR(line_integral(f, lat.level_r(4), 0.0, 0.75)[0], low, 1e-12);
}

TEST(Field, XiTelescopes)
{
    MorseLattice lat(1, 3, uniform(4.0));
    ActionFamily<U1> a(ActionKind::Villain);
    auto cfg = sample_config(lat, a, 1, 9);
    auto xi = xi_N(cfg, lat);
    const double s = std::ldexp(1.0, -2 * lat.resolution());
    for (std::size_t j = 0; j < lat.cols(); ++j) {
        double col = 0;
        for (std::size_t i = 0; i < lat.rows(); ++i) col += xi[lat.face_index(i, j)][0] * s;
        EXPECT_NEAR(col, U1::log(cfg.edge(lat.rows(), j))[0], 1e-12);
    }
}

TEST(Field, XiVariance)
{
    // small-area regime: Var xi_F = 2^{4N} sigma(F)
    MorseLattice lat(1, 3, uniform(1.0));
    ActionFamily<U1> a(ActionKind::Villain);
    const std::size_t f = lat.face_index(4, 6), n = 100000;
    std::vector<double> sq(n);
    SampleRegion reg;
    reg.level_hi = 5;
    reg.col_lo = 6;
    reg.col_hi = 7;
    const double s = std::ldexp(1.0, 2 * lat.resolution());
    for (std::size_t i = 0; i < n; ++i) {
        auto cfg = sample_config(lat, a, 2, i, reg);
        double d = s * (U1::log(cfg.edge(5, 6))[0] - U1::log(cfg.edge(4, 6))[0]);
        sq[i] = d * d;
    }
    auto e = estimate(sq);
    EXPECT_LT(std::abs(e.mean - s * s * lat.face_area(f)) / e.se, 4.0);
}

TEST(Field, CharfunZeroAndLimit)
{
    MorseLattice lat(1, 5, uniform(8.0));
    ActionFamily<U1> a(ActionKind::Villain);
    auto zero = TestForm::bump(0.0, 0.0, 0.25, 0.0, 0.25);
    auto r0 = charfun_mc(lat, a, zero, 100, 1);
    EXPECT_EQ(r0.plain, std::complex<double>(1.0, 0.0));
    EXPECT_EQ(r0.cv, 1.0);

    auto psi = TestForm::bump(10.0, 0.0, 0.25, 0.0, 0.25);
    // sigma is Lebesgue here; int sin^4 over a quarter period is 3/32
    EXPECT_NEAR(sigma_norm2(lat, psi), 100.0 * std::pow(0.25 * 3.0 / 8.0, 2), 1e-10);
    auto r = charfun_mc(lat, a, psi, 20000, 3);
    EXPECT_LT(std::abs(r.plain.real() - r.control_mean), 5 * r.plain_se);
    EXPECT_LT(std::abs(r.cv - r.control_mean), 5 * r.cv_se + 1e-12);
    EXPECT_LT(std::abs(r.plain.imag()), 5 * r.plain_se);
    EXPECT_LT(std::abs(r.limit - r.control_mean), 0.01);
    EXPECT_LT(std::abs(std::exp(-0.5 * r.variance_sum) - r.control_mean), 1e-6);
    EXPECT_GT(r.leading, 0.0);
    EXPECT_EQ(r.rejected, 0u);
}

TEST(Field, CharfunSU2Wilson)
{
    MorseLattice lat(1, 6, uniform(8.0));
    ActionFamily<SU2> a(ActionKind::Wilson);
    auto psi = TestForm::bump(10.0, 0.0, 0.25, 0.0, 0.25, {1.0, 0.0, 0.0});
    auto r = charfun_mc(lat, a, psi, 10000, 5);
    EXPECT_LT(std::abs(r.plain.real() - r.cv), 5 * r.plain_se);
    EXPECT_LT(r.cv_se, r.plain_se);
    EXPECT_LT(std::abs(r.cv - r.limit), 0.01 + 4 * r.cv_se);
}

TEST(Field, PairingVarianceIdentity)
{
    MorseLattice lat(1, 8, uniform(8.0));
    ActionFamily<U1> a(ActionKind::Villain);
    auto psi = TestForm::bump(1.0, 0.0, 0.125, 0.0, 0.125);
    const std::size_t n = 4000;
    auto r = charfun_mc(lat, a, psi, n, 11);
    // SE of a Gaussian sample variance
    const double se = r.variance_sum * std::sqrt(2.0 / double(n - 1));
    EXPECT_LT(std::abs(r.pair_variance - r.variance_sum), 0.05 * r.variance_sum + 4 * se);
}

TEST(Field, ArcIntegralKurtosis)
{
    MorseLattice lat(1, 8, uniform(8.0));
    ActionFamily<U1> a(ActionKind::Villain);
    const std::size_t n = 4000, level = 32, arcs = 16;
    SampleRegion reg;
    reg.level_hi = level;
    reg.col_hi = arcs;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto cfg = sample_config(lat, a, 6, i, reg);
        x[i] = line_integral(assemble(cfg, lat), lat.level_r(level), 0.0, arcs * lat.mesh())[0];
    }
    auto m = estimate(x);
    double m2 = 0, m4 = 0;
    for (double v : x) {
        double d = v - m.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    double excess = m4 / (m2 * m2) - 3.0;
    EXPECT_LT(std::abs(excess), 4.0 * std::sqrt(24.0 / n));
}

TEST(Field, LevelCircleBrownian)
{
    MorseLattice lat(1, 2, uniform(2.0));
    ActionFamily<SU2> a(ActionKind::Villain);
    const std::size_t n = 20000;
    for (double r : {0.5, 1.5}) {
        std::size_t level = std::size_t(r / lat.mesh());
        SampleRegion reg;
        reg.level_hi = level;
        std::vector<double> chi(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto f = assemble(sample_config(lat, a, 7, i, reg), lat);
            chi[i] = SU2::class_character(1, SU2::class_angle(holonomy_ode(f, r, 0.0, lat.period()))) / 2.0;
        }
        auto e = estimate(chi);
        EXPECT_LT(std::abs(e.mean - std::exp(-1.5 * lat.area_below(level))) / e.se, 4.5) << r;
    }
}

TEST(Field, CorrectionTermsDecrease)
{
    double prev = 1e300;
    for (int N = 3; N <= 8; ++N) {
        double c = correction_terms(MorseLattice(1, N, uniform(1.0)));
        EXPECT_LT(c, prev) << N;
        prev = c;
    }
}

TEST(Field, TestFormFromGrid)
{
    auto t = TestForm::from_grid({0.0, 1.0}, {0.0, 2.0}, {0.0, 1.0, 2.0, 3.0}, {1.0});
    EXPECT_DOUBLE_EQ(t.psi(0.5, 1.0), 1.5);
    EXPECT_DOUBLE_EQ(t.psi(1.0, 2.0), 3.0);
    EXPECT_EQ(t.psi(1.5, 1.0), 0.0);
    EXPECT_EQ(kind_of([] { TestForm::from_grid({0.0}, {0.0, 1.0}, {1.0, 2.0}, {1.0}); }), ErrorKind::InvalidArgument);
}

TEST(Field, LevelCircleCheck)
{
    MorseLattice lat(1, 2, uniform(2.0));
    ActionFamily<SU2> a(ActionKind::Villain);
    auto rows = level_circle_check(lat, a, {0.5, 1.5}, {1, 2}, 20000, 9, 2);
    ASSERT_EQ(rows.size(), 4u);
    for (auto& r : rows) {
        EXPECT_NEAR(r.row.prediction, r.row.dim * std::exp(-r.area_below * r.row.casimir), 1e-12);
        EXPECT_LT(std::abs(r.row.z()), 4.5) << r.r << " " << r.row.index;
    }
    try {
        level_circle_check(lat, a, {0.6}, {1}, 10, 1);
        ADD_FAILURE();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
}
