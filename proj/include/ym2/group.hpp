#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace ym2 {

inline constexpr double kPi = std::numbers::pi;

enum class GroupTag { U1, SU2 };

inline const char* to_string(GroupTag g) { return g == GroupTag::U1 ? "U1" : "SU2"; }

inline GroupTag parse_group(const std::string& s)
{
    if (s == "U1" || s == "u1") return GroupTag::U1;
    if (s == "SU2" || s == "su2") return GroupTag::SU2;
    fail(ErrorKind::InvalidArgument, "unknown group '" + s + "'");
}

/// Irreducible representation class: U1 index n in Z, SU2 index m = 2j >= 0.
struct IrrepLabel {
    GroupTag group = GroupTag::U1;
    int index = 0;
    int dim = 1;
    double casimir = 0.0;

    bool trivial() const { return index == 0; }
};

inline constexpr double kCutLocusTol = 1e-9;
inline constexpr double kRenormTol = 1e-12;

/**
 * U(1) with the unit angle coordinate. Inner product on u(1) is the plain
 * product of angles, so Casimir is n^2/2 for the generator (1/2) d^2/dtheta^2.
 */
struct U1 {
    static constexpr GroupTag tag = GroupTag::U1;
    static constexpr int algebra_dim = 1;
    static constexpr double volume = 2.0 * kPi;

    struct Element {
        double angle = 0.0;
    };
    using Algebra = std::array<double, 1>;

    static double principal(double a)
    {
        a = std::remainder(a, 2.0 * kPi);
        if (a <= -kPi) a += 2.0 * kPi;
        return a;
    }

    static Element identity() { return {}; }
    static Element multiply(Element a, Element b) { return {principal(a.angle + b.angle)}; }
    static Element inverse(Element a) { return {principal(-a.angle)}; }
    static Element exp(const Algebra& x) { return {principal(x[0])}; }

    static Algebra log(Element g)
    {
        if (std::abs(g.angle) >= kPi - kCutLocusTol)
            fail(ErrorKind::CutLocus, "U1 angle at pi");
        return {g.angle};
    }

    static double class_angle(Element g) { return std::abs(g.angle); }
    static double inner(const Algebra& x, const Algebra& y) { return x[0] * y[0]; }
    static Algebra adjoint(Element, const Algebra& x) { return x; }

    template <class Rng>
    static Element haar(Rng& rng)
    {
        std::uniform_real_distribution<double> u(-kPi, kPi);
        return {principal(u(rng))};
    }

    /// Element with class angle phi; the sign is random.
    template <class Rng>
    static Element from_class_angle(double phi, Rng& rng)
    {
        return {(rng() >> 63) ? phi : principal(-phi)};
    }

    static std::complex<double> character(int n, Element g) { return std::polar(1.0, n * g.angle); }
    /// Real part of the character on the class angle (U1 class functions here are even).
    static double class_character(int n, double phi) { return std::cos(n * phi); }

    static int dim(int) { return 1; }
    static double casimir(int n) { return 0.5 * double(n) * double(n); }
    static IrrepLabel label(int n) { return {tag, n, 1, casimir(n)}; }

    /// Density of the Haar-distributed class angle on [0, pi].
    static double haar_class_density(double) { return 1.0 / kPi; }

    static std::vector<IrrepLabel> irreps_up_to(double c2max)
    {
        if (!(c2max >= 0.0)) fail(ErrorKind::InvalidArgument, "c2max must be >= 0");
        std::vector<IrrepLabel> out{label(0)};
        for (int n = 1; casimir(n) <= c2max; ++n) {
            out.push_back(label(-n));
            out.push_back(label(n));
        }
        return out;
    }
};

/**
 * SU(2) as unit quaternions g = a0 I + i (a1 s1 + a2 s2 + a3 s3), s_k Pauli.
 * su(2) elements are X = i x.s with <X, Y> = -tr(XY)/2 = x.y, so |log g| is the
 * class angle and the unit 3-sphere metric gives c2(m) = m(m+2)/2.
 */
struct SU2 {
    static constexpr GroupTag tag = GroupTag::SU2;
    static constexpr int algebra_dim = 3;
    static constexpr double volume = 2.0 * kPi * kPi;

    struct Element {
        std::array<double, 4> q{1.0, 0.0, 0.0, 0.0};
    };
    using Algebra = std::array<double, 3>;

    static Element identity() { return {}; }

    static Element renormalize(Element g)
    {
        const auto& q = g.q;
        double n2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3];
        if (std::abs(n2 - 1.0) > kRenormTol) {
            double s = 1.0 / std::sqrt(n2);
            for (auto& v : g.q) v *= s;
        }
        return g;
    }

    static Element multiply(const Element& g, const Element& h) { return renormalize(raw_multiply(g, h)); }

    /// Quaternion product without renormalization (also valid for non-unit inputs).
    static Element raw_multiply(const Element& g, const Element& h)
    {
        const auto& a = g.q;
        const auto& b = h.q;
        Element c;
        c.q[0] = a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
        c.q[1] = a[0] * b[1] + b[0] * a[1] - (a[2] * b[3] - a[3] * b[2]);
        c.q[2] = a[0] * b[2] + b[0] * a[2] - (a[3] * b[1] - a[1] * b[3]);
        c.q[3] = a[0] * b[3] + b[0] * a[3] - (a[1] * b[2] - a[2] * b[1]);
        return c;
    }

    static Element inverse(const Element& g) { return {{g.q[0], -g.q[1], -g.q[2], -g.q[3]}}; }

    static double norm3(const Algebra& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

    static Element exp(const Algebra& x)
    {
        double phi = norm3(x);
        double s = phi < 1e-4 ? 1.0 - phi * phi / 6.0 + phi * phi * phi * phi / 120.0 : std::sin(phi) / phi;
        return renormalize({{std::cos(phi), s * x[0], s * x[1], s * x[2]}});
    }

    static double class_angle(const Element& g)
    {
        double v = std::sqrt(g.q[1] * g.q[1] + g.q[2] * g.q[2] + g.q[3] * g.q[3]);
        return std::atan2(v, g.q[0]);
    }

    static Algebra log(const Element& g)
    {
        if (2.0 * g.q[0] <= -2.0 + kCutLocusTol) fail(ErrorKind::CutLocus, "SU2 trace at -2");
        double v = std::sqrt(g.q[1] * g.q[1] + g.q[2] * g.q[2] + g.q[3] * g.q[3]);
        double phi = std::atan2(v, g.q[0]);
        double f = v < 1e-8 ? 1.0 + v * v / 6.0 : phi / v;
        return {f * g.q[1], f * g.q[2], f * g.q[3]};
    }

    static double inner(const Algebra& x, const Algebra& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

    /// Ad_h X = h X h^{-1}.
    static Algebra adjoint(const Element& h, const Algebra& x)
    {
        Element p{{0.0, x[0], x[1], x[2]}};
        Element r = raw_multiply(raw_multiply(h, p), inverse(h));
        return {r.q[1], r.q[2], r.q[3]};
    }

    template <class Rng>
    static Element haar(Rng& rng)
    {
        std::normal_distribution<double> nd;
        Element g;
        double n2 = 0.0;
        do {
            for (auto& v : g.q) v = nd(rng);
            n2 = g.q[0] * g.q[0] + g.q[1] * g.q[1] + g.q[2] * g.q[2] + g.q[3] * g.q[3];
        } while (n2 < 1e-24);
        double s = 1.0 / std::sqrt(n2);
        for (auto& v : g.q) v *= s;
        return g;
    }

    /// cos(phi) + i sin(phi) n.s with n uniform on the 2-sphere.
    template <class Rng>
    static Element from_class_angle(double phi, Rng& rng)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double z = 2.0 * u(rng) - 1.0;
        double az = 2.0 * kPi * u(rng);
        double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        double s = std::sin(phi);
        return {{std::cos(phi), s * rho * std::cos(az), s * rho * std::sin(az), s * z}};
    }

    /// chi_m(phi) = sin((m+1)phi)/sin(phi).
    static double class_character(int m, double phi)
    {
        double s = std::sin(phi);
        if (std::abs(s) > 0.1) return std::sin((m + 1) * phi) / s;
        double c = std::cos(phi);
        double u0 = 1.0, u1 = 2.0 * c;
        if (m == 0) return u0;
        for (int k = 1; k < m; ++k) {
            double u2 = 2.0 * c * u1 - u0;
            u0 = u1;
            u1 = u2;
        }
        return u1;
    }

    /// Fills out[m] = chi_m(phi) for m = 0..out.size()-1 by the Chebyshev recurrence.
    static void class_characters(double phi, std::vector<double>& out)
    {
        if (out.empty()) return;
        double c = std::cos(phi);
        out[0] = 1.0;
        if (out.size() > 1) out[1] = 2.0 * c;
        for (std::size_t k = 2; k < out.size(); ++k) out[k] = 2.0 * c * out[k - 1] - out[k - 2];
    }

    static std::complex<double> character(int m, const Element& g) { return class_character(m, class_angle(g)); }

    static int dim(int m) { return m + 1; }
    static double casimir(int m) { return 0.5 * double(m) * double(m + 2); }
    static IrrepLabel label(int m) { return {tag, m, m + 1, casimir(m)}; }

    /// Weyl integration formula: class angle density (2/pi) sin^2.
    static double haar_class_density(double phi)
    {
        double s = std::sin(phi);
        return 2.0 / kPi * s * s;
    }

    static std::vector<IrrepLabel> irreps_up_to(double c2max)
    {
        if (!(c2max >= 0.0)) fail(ErrorKind::InvalidArgument, "c2max must be >= 0");
        std::vector<IrrepLabel> out;
        for (int m = 0; casimir(m) <= c2max; ++m) out.push_back(label(m));
        return out;
    }

    /// The 2x2 matrix of g, row major.
    static std::array<std::complex<double>, 4> matrix(const Element& g)
    {
        const auto& a = g.q;
        using C = std::complex<double>;
        return {C(a[0], a[3]), C(a[2], a[1]), C(-a[2], a[1]), C(a[0], -a[3])};
    }
};

template <class G>
concept GroupPolicy = std::is_same_v<G, U1> || std::is_same_v<G, SU2>;

/// Runtime-tagged element for the untemplated surface.
class GroupElement {
public:
    GroupElement() : v_(U1::Element{}) {}
    GroupElement(U1::Element e) : v_(e) {}
    GroupElement(SU2::Element e) : v_(e) {}

    GroupTag tag() const { return v_.index() == 0 ? GroupTag::U1 : GroupTag::SU2; }
    const U1::Element& u1() const { return std::get<0>(v_); }
    const SU2::Element& su2() const { return std::get<1>(v_); }

    template <class G>
    const typename G::Element& as() const
    {
        if (tag() != G::tag) fail(ErrorKind::TagMismatch, "element is not in the requested group");
        return std::get<typename G::Element>(v_);
    }

private:
    std::variant<U1::Element, SU2::Element> v_;
};

class AlgebraElement {
public:
    AlgebraElement() : v_(U1::Algebra{0.0}) {}
    AlgebraElement(U1::Algebra x) : v_(x) {}
    AlgebraElement(SU2::Algebra x) : v_(x) {}

    GroupTag tag() const { return v_.index() == 0 ? GroupTag::U1 : GroupTag::SU2; }

    template <class G>
    const typename G::Algebra& as() const
    {
        if (tag() != G::tag) fail(ErrorKind::TagMismatch, "algebra element is not in the requested algebra");
        return std::get<typename G::Algebra>(v_);
    }

private:
    std::variant<U1::Algebra, SU2::Algebra> v_;
};

namespace detail {
template <class F>
decltype(auto) dispatch(GroupTag t, F&& f)
{
    if (t == GroupTag::U1) return f(U1{});
    return f(SU2{});
}
} // namespace detail

inline GroupElement identity(GroupTag t)
{
    return detail::dispatch(t, [](auto g) { return GroupElement(decltype(g)::identity()); });
}

inline GroupElement multiply(const GroupElement& a, const GroupElement& b)
{
    if (a.tag() != b.tag()) fail(ErrorKind::TagMismatch, "multiply across groups");
    return detail::dispatch(a.tag(), [&](auto g) {
        using G = decltype(g);
        return GroupElement(G::multiply(a.as<G>(), b.as<G>()));
    });
}

inline GroupElement inverse(const GroupElement& a)
{
    return detail::dispatch(a.tag(), [&](auto g) {
        using G = decltype(g);
        return GroupElement(G::inverse(a.as<G>()));
    });
}

inline GroupElement exp_map(const AlgebraElement& x)
{
    return detail::dispatch(x.tag(), [&](auto g) {
        using G = decltype(g);
        return GroupElement(G::exp(x.as<G>()));
    });
}

inline AlgebraElement log_map(const GroupElement& a)
{
    return detail::dispatch(a.tag(), [&](auto g) {
        using G = decltype(g);
        return AlgebraElement(G::log(a.as<G>()));
    });
}

inline double inner(const AlgebraElement& x, const AlgebraElement& y)
{
    if (x.tag() != y.tag()) fail(ErrorKind::TagMismatch, "inner product across algebras");
    return detail::dispatch(x.tag(), [&](auto g) {
        using G = decltype(g);
        return G::inner(x.as<G>(), y.as<G>());
    });
}

inline double dist_to_identity(const GroupElement& a)
{
    return detail::dispatch(a.tag(), [&](auto g) {
        using G = decltype(g);
        return G::class_angle(a.as<G>());
    });
}

inline std::complex<double> character(const IrrepLabel& l, const GroupElement& a)
{
    if (l.group != a.tag()) fail(ErrorKind::TagMismatch, "character of a label from another group");
    return detail::dispatch(a.tag(), [&](auto g) {
        using G = decltype(g);
        return std::complex<double>(G::character(l.index, a.as<G>()));
    });
}

template <class Rng>
GroupElement haar_sample(GroupTag t, Rng& rng)
{
    return detail::dispatch(t, [&](auto g) { return GroupElement(decltype(g)::haar(rng)); });
}

inline std::vector<IrrepLabel> irreps_up_to(GroupTag t, double c2max)
{
    return detail::dispatch(t, [&](auto g) { return decltype(g)::irreps_up_to(c2max); });
}

} // namespace ym2
