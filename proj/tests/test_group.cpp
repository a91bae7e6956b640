#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "ym2/group.hpp"
#include "ym2/rng.hpp"

using namespace ym2;
using C = std::complex<double>;
using Mat = std::array<C, 4>;

namespace {

Mat matmul(const Mat& a, const Mat& b)
{
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

SU2::Algebra random_algebra(Stream& rng, double max_norm)
{
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SU2::Algebra x{nd(rng), nd(rng), nd(rng)};
    double s = max_norm * std::cbrt(u(rng)) / SU2::norm3(x);
    for (auto& v : x) v *= s;
    return x;
}

double qdist(const SU2::Element& a, const SU2::Element& b)
{
    double s = 0;
    for (int i = 0; i < 4; ++i) s = std::max(s, std::abs(a.q[i] - b.q[i]));
    return s;
}

} // namespace

TEST(GroupCore, IdentityAndInverseLaws)
{
    Stream rng(1, 0);
    for (int i = 0; i < 100; ++i) {
        auto g = SU2::haar(rng);
        EXPECT_LT(qdist(SU2::multiply(SU2::identity(), g), g), 1e-15);
        EXPECT_LT(qdist(SU2::multiply(g, SU2::inverse(g)), SU2::identity()), 1e-12);
        auto h = SU2::haar(rng);
        auto p = SU2::multiply(g, h);
        double n2 = 0;
        for (double v : p.q) n2 += v * v;
        EXPECT_NEAR(n2, 1.0, 1e-12);

        auto a = U1::haar(rng);
        EXPECT_NEAR(U1::multiply(a, U1::inverse(a)).angle, 0.0, 1e-15);
    }
}

TEST(GroupCore, QuaternionProductMatchesMatrices)
{
    Stream rng(2, 0);
    for (int i = 0; i < 50; ++i) {
        auto g = SU2::haar(rng), h = SU2::haar(rng);
        Mat lhs = SU2::matrix(SU2::multiply(g, h));
        Mat rhs = matmul(SU2::matrix(g), SU2::matrix(h));
        for (int k = 0; k < 4; ++k) EXPECT_LT(std::abs(lhs[k] - rhs[k]), 1e-13);
        Mat m = SU2::matrix(g);
        C det = m[0] * m[3] - m[1] * m[2];
        EXPECT_NEAR(det.real(), 1.0, 1e-13);
        EXPECT_NEAR(det.imag(), 0.0, 1e-13);
        EXPECT_NEAR((m[0] + m[3]).real(), SU2::class_character(1, SU2::class_angle(g)), 1e-12);
    }
}

TEST(GroupCore, ExpMatchesMatrixSeries)
{
    // exp(X) against a truncated power series of X = i x.sigma
    Stream rng(3, 0);
    for (int i = 0; i < 20; ++i) {
        auto x = random_algebra(rng, 3.0);
        Mat X = {C(0, x[2]), C(x[1], x[0]), C(-x[1], x[0]), C(0, -x[2])};
        Mat term = {1, 0, 0, 1}, sum = term;
        for (int k = 1; k < 60; ++k) {
            term = matmul(term, X);
            for (auto& v : term) v /= double(k);
            for (int j = 0; j < 4; ++j) sum[j] += term[j];
        }
        Mat e = SU2::matrix(SU2::exp(x));
        for (int j = 0; j < 4; ++j) EXPECT_LT(std::abs(e[j] - sum[j]), 1e-12);
    }
}

TEST(GroupCore, ExpLogRoundTrip)
{
    Stream rng(4, 0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        auto x = random_algebra(rng, 3.0);
        auto y = SU2::log(SU2::exp(x));
        for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(y[k] - x[k]));
    }
    EXPECT_LT(worst, 1e-10);

    SU2::Algebra one{0.6, 0.0, 0.8};
    auto y = SU2::log(SU2::exp(one));
    EXPECT_NEAR(SU2::norm3(y), 1.0, 1e-14);
    EXPECT_NEAR(U1::log(U1::exp({1.0}))[0], 1.0, 1e-15);
    EXPECT_LT(qdist(SU2::exp({0, 0, 0}), SU2::identity()), 1e-16);
}

TEST(GroupCore, CutLocus)
{
    SU2::Algebra x{kPi - 1e-12, 0.0, 0.0};
    auto g = SU2::exp(x);
    double n2 = 0;
    for (double v : g.q) n2 += v * v;
    EXPECT_NEAR(n2, 1.0, 1e-15);
    EXPECT_NEAR(SU2::class_angle(g), kPi, 1e-9);
    try {
        SU2::log(g);
        FAIL() << "expected CutLocus";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::CutLocus);
    }
    EXPECT_THROW(U1::log({kPi}), Error);
    EXPECT_NO_THROW(U1::log({kPi - 1e-6}));
}

TEST(GroupCore, Characters)
{
    EXPECT_NEAR(U1::character(2, {kPi / 2}).real(), -1.0, 1e-15);
    EXPECT_NEAR(U1::character(2, {kPi / 2}).imag(), 0.0, 1e-15);
    Stream rng(5, 0);
    auto g = SU2::haar(rng);
    EXPECT_EQ(SU2::character(0, g).real(), 1.0);
    for (int m = 0; m < 8; ++m) EXPECT_NEAR(SU2::character(m, SU2::identity()).real(), m + 1, 1e-12);
    for (int i = 0; i <= 200; ++i) {
        double phi = kPi * i / 200.0;
        for (int m = 0; m < 12; ++m) {
            double direct = (i == 0) ? m + 1.0 : (i == 200 ? ((m % 2) ? -(m + 1.0) : m + 1.0) : std::sin((m + 1) * phi) / std::sin(phi));
            EXPECT_NEAR(SU2::class_character(m, phi), direct, 1e-10);
            EXPECT_LE(std::abs(SU2::class_character(m, phi)), m + 1 + 1e-12);
        }
    }
}

TEST(GroupCore, ConjugationInvariance)
{
    Stream rng(6, 0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        auto g = SU2::haar(rng), h = SU2::haar(rng);
        auto c = SU2::multiply(SU2::multiply(h, g), SU2::inverse(h));
        for (int m = 0; m < 6; ++m)
            worst = std::max(worst, std::abs(SU2::character(m, c) - SU2::character(m, g)));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(GroupCore, AdInvariance)
{
    Stream rng(7, 0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        auto h = SU2::haar(rng);
        auto x = random_algebra(rng, 2.0), y = random_algebra(rng, 2.0);
        worst = std::max(worst, std::abs(SU2::inner(SU2::adjoint(h, x), SU2::adjoint(h, y)) - SU2::inner(x, y)));
    }
    EXPECT_LT(worst, 1e-12);
    EXPECT_GT(SU2::inner({0.1, 0, 0}, {0.1, 0, 0}), 0.0);
    EXPECT_EQ(dist_to_identity(identity(GroupTag::SU2)), 0.0);
}

TEST(GroupCore, DistanceIsLogNorm)
{
    Stream rng(8, 0);
    for (int i = 0; i < 200; ++i) {
        auto g = SU2::haar(rng);
        if (SU2::class_angle(g) > kPi - 1e-6) continue;
        EXPECT_NEAR(SU2::class_angle(g), SU2::norm3(SU2::log(g)), 1e-12);
    }
}

TEST(GroupCore, HaarOrthogonality)
{
    const int n = 100000;
    Stream rng(9, 0);
    std::vector<double> phis(n);
    for (auto& p : phis) p = SU2::class_angle(SU2::haar(rng));
    auto labels = SU2::irreps_up_to(10.0);
    for (auto& a : labels)
        for (auto& b : labels) {
            double s = 0, s2 = 0;
            for (double p : phis) {
                double v = SU2::class_character(a.index, p) * SU2::class_character(b.index, p);
                s += v;
                s2 += v * v;
            }
            double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
            double target = a.index == b.index ? 1.0 : 0.0;
            if (a.index == 0 && b.index == 0) {
                EXPECT_EQ(mean, 1.0);
            } else {
                EXPECT_LT(std::abs(mean - target), 4 * se + 1e-12) << a.index << " " << b.index;
            }
            if (a.index != 0 && b.index == 0) {
                EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(double(n)) * (a.dim));
            }
        }

    Stream u1(10, 0);
    std::vector<double> th(n);
    for (auto& t : th) t = U1::haar(u1).angle;
    for (auto& l : U1::irreps_up_to(10.0)) {
        if (l.index == 0) continue;
        C s = 0;
        for (double t : th) s += U1::character(l.index, {t});
        EXPECT_LT(std::abs(s / double(n)), 4.0 / std::sqrt(double(n)));
    }
}

TEST(GroupCore, Determinism)
{
    Stream a(42, 3, 7), b(42, 3, 7);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(qdist(SU2::haar(a), SU2::haar(b)), 0.0);
}

TEST(GroupCore, IrrepEnumeration)
{
    auto u = U1::irreps_up_to(0.0);
    ASSERT_EQ(u.size(), 1u);
    EXPECT_EQ(u[0].index, 0);
    auto s = SU2::irreps_up_to(SU2::casimir(2) + 1e-9);
    ASSERT_EQ(s.size(), 3u);
    for (int m = 0; m < 3; ++m) EXPECT_EQ(s[m].index, m);
    for (auto g : {GroupTag::U1, GroupTag::SU2}) {
        auto l = irreps_up_to(g, 50.0);
        for (std::size_t i = 1; i < l.size(); ++i) EXPECT_LE(l[i - 1].casimir, l[i].casimir);
        EXPECT_EQ(l[0].casimir, 0.0);
    }

    // Weyl law: sum of d^2 over c2 <= C grows like C^{dim G / 2}
    auto slope = [](auto labels_of, double lo, double hi) {
        double w1 = 0, w2 = 0;
        for (auto& l : labels_of(lo)) w1 += l.dim * l.dim;
        for (auto& l : labels_of(hi)) w2 += l.dim * l.dim;
        return std::log(w2 / w1) / std::log(std::sqrt(hi / lo));
    };
    EXPECT_NEAR(slope(U1::irreps_up_to, 1e4, 1e6), 1.0, 0.05);
    EXPECT_NEAR(slope(SU2::irreps_up_to, 1e4, 1e6), 3.0, 0.05);
}

TEST(GroupCore, RuntimeTags)
{
    GroupElement a(U1::Element{0.3}), b(SU2::identity());
    EXPECT_THROW(multiply(a, b), Error);
    EXPECT_THROW(a.as<SU2>(), Error);
    auto x = log_map(exp_map(AlgebraElement(SU2::Algebra{0.1, 0.2, 0.3})));
    EXPECT_NEAR(x.as<SU2>()[1], 0.2, 1e-14);
    EXPECT_NEAR(character(SU2::label(1), b).real(), 2.0, 1e-15);
}
