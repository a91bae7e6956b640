#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "group.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace ym2 {

enum class ActionKind { Villain, Manton, Wilson };

inline const char* to_string(ActionKind k)
{
    switch (k) {
    case ActionKind::Villain: return "Villain";
    case ActionKind::Manton: return "Manton";
    case ActionKind::Wilson: return "Wilson";
    }
    return "?";
}

inline ActionKind parse_action(const std::string& s)
{
    if (s == "Villain" || s == "villain") return ActionKind::Villain;
    if (s == "Manton" || s == "manton") return ActionKind::Manton;
    if (s == "Wilson" || s == "wilson") return ActionKind::Wilson;
    fail(ErrorKind::InvalidArgument, "unknown action '" + s + "'");
}

struct ActionOptions {
    /// Fourier truncation for Villain character sums; 0 picks it from t.
    double c2max = 0.0;
    /// Nodes of the inverse-CDF class table.
    int table_resolution = 4096;
    double t_max = 4.0;
};

/// Inverse-CDF table for the class angle on [0, phi_max].
struct ClassTable {
    std::vector<double> phi, cdf, pdf;
    double total = 1.0;

    template <class Rng>
    double draw(Rng& rng) const
    {
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t i = std::clamp<std::size_t>(std::size_t(it - cdf.begin()), 1, cdf.size() - 1) - 1;
        double h = phi[i + 1] - phi[i];
        // cubic Hermite for F on [phi_i, phi_i+1], solved by safeguarded Newton
        double lo = 0.0, hi = 1.0;
        double s = cdf[i + 1] > cdf[i] ? (u - cdf[i]) / (cdf[i + 1] - cdf[i]) : 0.5;
        s = std::clamp(s, 0.0, 1.0);
        for (int it2 = 0; it2 < 40; ++it2) {
            double F = hermite(i, s, h) - u;
            if (F > 0) hi = s; else lo = s;
            double dF = hermite_d(i, s, h);
            double ns = dF > 0 ? s - F / dF : 0.5 * (lo + hi);
            if (!(ns > lo && ns < hi)) ns = 0.5 * (lo + hi);
            if (std::abs(ns - s) < 1e-15) { s = ns; break; }
            s = ns;
        }
        return phi[i] + s * h;
    }

    double hermite(std::size_t i, double s, double h) const
    {
        double s2 = s * s, s3 = s2 * s;
        double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return h00 * cdf[i] + h10 * h * pdf[i] + h01 * cdf[i + 1] + h11 * h * pdf[i + 1];
    }
    double hermite_d(std::size_t i, double s, double h) const
    {
        double s2 = s * s;
        double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1, d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
        return d00 * cdf[i] + d10 * h * pdf[i] + d01 * cdf[i + 1] + d11 * h * pdf[i + 1];
    }
};

/**
 * One-parameter family of class probability measures on G.
 *
 * Densities are reported against the Riemannian volume (total mass vol(G)),
 * `density_haar` against the normalized Haar measure. Wilson uses
 * exp(-(1 - Re chi_fund / d_fund)/t), which is the literal Re Tr(1 - g)/t on U1.
 */
template <GroupPolicy G>
class ActionFamily {
public:
    using Element = typename G::Element;

    explicit ActionFamily(ActionKind kind, ActionOptions opt = {}) : kind_(kind), opt_(opt) {}

    ActionKind kind() const { return kind_; }
    const ActionOptions& options() const { return opt_; }

    void check_time(double t) const
    {
        if (!(t > 0.0)) fail(ErrorKind::NonPositiveTime, "t = " + std::to_string(t));
    }

    /// Unnormalized Boltzmann weight on the class angle (Manton and Wilson).
    double weight(double t, double phi) const
    {
        if (kind_ == ActionKind::Manton) return std::exp(-phi * phi / (2.0 * t));
        const double h = std::sin(0.5 * phi); // 1 - cos phi without cancellation
        return std::exp(-2.0 * h * h / t);
    }

    double upper(double t) const { return std::min(kPi, 30.0 * std::sqrt(t)); }

    /// Z relative to normalized Haar: int weight dHaar.
    double normalizer_haar(double t) const
    {
        check_time(t);
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = z_cache_.find(t);
            if (it != z_cache_.end()) return it->second;
        }
        double z = quad::adaptive([&](double p) { return weight(t, p) * G::haar_class_density(p); }, 0.0, upper(t), 1e-13);
        std::lock_guard<std::mutex> lk(mu_);
        z_cache_[t] = z;
        return z;
    }

    /// Z_m(t), Z_w(t) against Riemannian volume.
    double normalizer(double t) const
    {
        if (kind_ == ActionKind::Villain) return 1.0;
        return G::volume * normalizer_haar(t);
    }

    /// Largest label index needed so the Villain character-sum tail is below tol.
    static int villain_cutoff(double t, double tol = 1e-13)
    {
        for (int n = 1; n < 100000000; ++n) {
            double d = G::dim(n);
            double term = (G::tag == GroupTag::U1 ? 2.0 : d * d) * std::exp(-t * G::casimir(n));
            double dn = G::dim(n + 1);
            double ratio = (G::tag == GroupTag::U1 ? 1.0 : (dn * dn) / (d * d)) *
                           std::exp(-t * (G::casimir(n + 1) - G::casimir(n)));
            if (ratio < 1.0 && term / (1.0 - ratio) < tol) return n;
        }
        fail(ErrorKind::TruncationInsufficient, "no cutoff found");
    }

    /// Sup-norm tail bound of the Villain character sum beyond label index K.
    static double villain_tail(double t, int K)
    {
        double tail = 0.0;
        for (int n = K + 1;; ++n) {
            double d = G::dim(n);
            double term = (G::tag == GroupTag::U1 ? 2.0 : d * d) * std::exp(-t * G::casimir(n));
            tail += term;
            if (term < 1e-30 * std::max(tail, 1e-300) || term == 0.0) break;
            if (n > K + 10000000) break;
        }
        return tail;
    }

    int villain_terms(double t) const
    {
        int need = villain_cutoff(t);
        if (opt_.c2max <= 0.0) return need;
        int K = 0;
        while (G::casimir(K + 1) <= opt_.c2max) ++K;
        if (K >= need) return need;
        if (villain_tail(t, K) > 1e-10)
            fail(ErrorKind::TruncationInsufficient, "c2max " + std::to_string(opt_.c2max) + " too small at t = " + std::to_string(t));
        return K;
    }

    /// Villain density relative to Haar. Small t uses the image sum, which keeps
    /// relative accuracy in the tails where the character sum only has absolute accuracy.
    double villain_density_haar(double t, double phi) const
    {
        if (t <= kVillainImageMax) {
            if (opt_.c2max > 0.0) villain_terms(t); // a fixed truncation must still be adequate
            return villain_images(t, phi);
        }
        return villain_characters(t, phi, villain_terms(t));
    }

    static double villain_images(double t, double phi)
    {
        constexpr int R = 6;
        if constexpr (G::tag == GroupTag::U1) {
            double s = 0.0;
            for (int k = -R; k <= R; ++k) {
                double x = phi + 2.0 * kPi * k;
                s += std::exp(-x * x / (2.0 * t));
            }
            return std::sqrt(2.0 * kPi / t) * s;
        } else {
            // g(phi) = sum_k x e^{-x^2/2t}, x = phi + 2 pi k, vanishes at 0 and pi
            double g = 0.0, g1 = 0.0, g3 = 0.0;
            for (int k = -R; k <= R; ++k) {
                double x = phi + 2.0 * kPi * k, e = std::exp(-x * x / (2.0 * t)), y = x * x / t;
                g += x * e;
                g1 += (1.0 - y) * e;
                g3 += (-y * y + 6.0 * y - 3.0) / t * e;
            }
            const double pre = std::exp(0.5 * t) * std::sqrt(2.0 * kPi / t) / (2.0 * t);
            double eps = phi < 0.5 * kPi ? phi : phi - kPi;
            // the expansion in eps is only good for eps << sqrt(t)
            if (std::abs(eps) > 1e-3 * std::min(1.0, std::sqrt(t))) return pre * g / std::sin(phi);
            double sign = phi < 0.5 * kPi ? 1.0 : -1.0;
            return pre * sign * (g1 - g3 * eps * eps / 3.0) / (1.0 - eps * eps / 6.0);
        }
    }

    double villain_characters(double t, double phi, int K) const
    {
        if constexpr (G::tag == GroupTag::U1) {
            double s = 1.0;
            for (int n = K; n >= 1; --n) s += 2.0 * std::exp(-t * G::casimir(n)) * std::cos(n * phi);
            return s;
        } else {
            double sphi = std::sin(phi);
            double s = 0.0;
            if (std::abs(sphi) > 1e-3) {
                for (int m = K; m >= 0; --m) s += (m + 1) * std::exp(-t * G::casimir(m)) * std::sin((m + 1) * phi);
                return s / sphi;
            }
            double c = std::cos(phi), u0 = 1.0, u1 = 2.0 * c;
            s = 1.0 + (K >= 1 ? 2.0 * std::exp(-t * G::casimir(1)) * u1 : 0.0);
            for (int m = 2; m <= K; ++m) {
                double u2 = 2.0 * c * u1 - u0;
                u0 = u1;
                u1 = u2;
                s += (m + 1) * std::exp(-t * G::casimir(m)) * u2;
            }
            return s;
        }
    }

    double density_haar(double t, double phi) const
    {
        check_time(t);
        if (t > opt_.t_max) fail(ErrorKind::InvalidArgument, "t above t_max");
        if (kind_ == ActionKind::Villain) return villain_density_haar(t, phi);
        return weight(t, phi) / normalizer_haar(t);
    }

    /// Density against the Riemannian volume of G.
    double density(double t, const Element& g) const { return density_haar(t, G::class_angle(g)) / G::volume; }

    /// Law of the class angle on [0, pi].
    double class_density(double t, double phi) const { return density_haar(t, phi) * G::haar_class_density(phi); }

    /// mu_t-hat(lambda) = int chi_lambda dmu_t.
    double fourier_coeff(double t, int index) const
    {
        check_time(t);
        index = std::abs(index);
        if (kind_ == ActionKind::Villain) return G::dim(index) * std::exp(-t * G::casimir(index));
        if (index == 0) return 1.0;
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = coef_cache_.find({t, index});
            if (it != coef_cache_.end()) return it->second;
        }
        double z = normalizer_haar(t);
        double v = quad::adaptive(
                       [&](double p) { return G::class_character(index, p) * weight(t, p) * G::haar_class_density(p); },
                       0.0, upper(t), 1e-13) /
                   z;
        std::lock_guard<std::mutex> lk(mu_);
        if (coef_cache_.size() > 200000) coef_cache_.clear();
        coef_cache_[{t, index}] = v;
        return v;
    }

    double fourier_coeff(double t, const IrrepLabel& l) const
    {
        if (l.group != G::tag) fail(ErrorKind::TagMismatch, "label from another group");
        return fourier_coeff(t, l.index);
    }

    /**
     * mu_t-hat(lambda)/(d e^{-t c2}) - 1 in extended precision. For Manton on
     * U1 the deviation is e^{-pi^2/2t}-small and is computed from the tail
     * integral beyond the cut locus directly.
     */
    long double heat_deviation(double t, int index) const
    {
        index = std::abs(index);
        if (kind_ == ActionKind::Villain || index == 0) return 0.0L;
        if (kind_ == ActionKind::Manton && G::tag == GroupTag::U1) {
            auto x = [&](int k) -> long double {
                double I = quad::adaptive(
                    [&](double s) { return std::exp(-(kPi * s + 0.5 * s * s) / t) * std::cos(k * (kPi + s)); }, 0.0,
                    60.0 * t / kPi, 1e-13);
                if (I == 0.0) return 0.0L;
                long double lg = -(long double)(kPi * kPi) / (2.0L * t) + 0.5L * t * (long double)k * k +
                                 std::log(2.0L * std::fabs((long double)I) / std::sqrt(2.0L * kPi * t));
                return (I > 0 ? 1.0L : -1.0L) * std::exp(lg);
            };
            long double x0 = x(0), xk = x(index);
            return (x0 - xk) / (1.0L - x0);
        }
        long double heat = (long double)G::dim(index) * std::exp(-(long double)t * G::casimir(index));
        return (long double)fourier_coeff(t, index) / heat - 1.0L;
    }

    /// Draw from mu_t. Exact rejection samplers where available, class table otherwise.
    template <class Rng>
    Element sample(double t, Rng& rng) const
    {
        check_time(t);
        std::normal_distribution<double> nd;
        std::uniform_real_distribution<double> ud(0.0, 1.0);
        const double st = std::sqrt(t);
        if constexpr (G::tag == GroupTag::U1) {
            switch (kind_) {
            case ActionKind::Villain: return {U1::principal(st * nd(rng))};
            case ActionKind::Manton:
                for (;;) {
                    double x = st * nd(rng);
                    if (std::abs(x) <= kPi) return {U1::principal(x)};
                }
            case ActionKind::Wilson:
                for (;;) {
                    // envelope: 1 - cos x >= 2 x^2 / pi^2 on [-pi, pi]
                    double x = 0.5 * kPi * st * nd(rng);
                    if (std::abs(x) > kPi) continue;
                    double la = (-(1.0 - std::cos(x)) + 2.0 * x * x / (kPi * kPi)) / t;
                    if (std::log(ud(rng)) < la) return {U1::principal(x)};
                }
            }
        } else {
            if (kind_ == ActionKind::Villain && t > kVillainDirectMax) {
                double phi = table(t)->draw(rng);
                return SU2::from_class_angle(phi, rng);
            }
            for (;;) {
                SU2::Algebra x{st * nd(rng), st * nd(rng), st * nd(rng)};
                double r = SU2::norm3(x);
                double u = ud(rng);
                if (kind_ == ActionKind::Wilson) {
                    // y = 2 sin(phi/2) is Gaussian under the Wilson weight
                    if (r > 2.0 || r == 0.0) continue;
                    if (u >= std::sqrt(1.0 - 0.25 * r * r)) continue;
                    double phi = 2.0 * std::asin(0.5 * r);
                    double s = std::sin(phi) / r;
                    return SU2::renormalize({{std::cos(phi), s * x[0], s * x[1], s * x[2]}});
                }
                if (r > kPi) continue;
                double sc = r < 1e-8 ? 1.0 : std::sin(r) / r;
                double acc = kind_ == ActionKind::Manton ? sc * sc : sc;
                if (u < acc) return SU2::exp(x);
            }
        }
        return G::identity();
    }

    /// Draw through the inverse-CDF class table regardless of kind.
    template <class Rng>
    Element sample_table(double t, Rng& rng) const
    {
        check_time(t);
        double phi = table(t)->draw(rng);
        return G::from_class_angle(phi, rng);
    }

    std::shared_ptr<const ClassTable> table(double t) const
    {
        const std::int64_t key = std::llround(t * 1e12);
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = tables_.find(key);
            if (it != tables_.end()) {
                lru_.splice(lru_.begin(), lru_, it->second.second);
                return it->second.first;
            }
        }
        auto tab = std::make_shared<const ClassTable>(build_table(t));
        std::lock_guard<std::mutex> lk(mu_);
        if (tables_.find(key) == tables_.end()) {
            lru_.push_front(key);
            tables_[key] = {tab, lru_.begin()};
            while (tables_.size() > kTableCacheSize) {
                tables_.erase(lru_.back());
                lru_.pop_back();
            }
        }
        return tab;
    }

    std::size_t cached_tables() const
    {
        std::lock_guard<std::mutex> lk(mu_);
        return tables_.size();
    }

    static constexpr double kVillainDirectMax = 0.2;
    static constexpr double kVillainImageMax = 1.5;
    static constexpr std::size_t kTableCacheSize = 4096;

private:
    ClassTable build_table(double t) const
    {
        const double hi = upper(t);
        auto f = [&](double p) { return class_density(t, p); };
        for (int K = std::max(64, opt_.table_resolution), attempt = 0; attempt < 4; K *= 2, ++attempt) {
            ClassTable tab;
            tab.phi.resize(K + 1);
            tab.pdf.resize(K + 1);
            tab.cdf.assign(K + 1, 0.0);
            for (int i = 0; i <= K; ++i) {
                tab.phi[i] = hi * double(i) / K;
                tab.pdf[i] = f(tab.phi[i]);
            }
            for (int i = 0; i < K; ++i) tab.cdf[i + 1] = tab.cdf[i] + quad::gauss<10>(f, tab.phi[i], tab.phi[i + 1]);
            for (int i = 0; i < K; ++i)
                if (!(tab.cdf[i + 1] >= tab.cdf[i]) || tab.pdf[i] < -1e-12)
                    fail(ErrorKind::TableUnderResolved, "CDF table not monotone");
            tab.total = tab.cdf[K];
            double worst = 0.0;
            for (int i = 0; i < K; ++i) {
                double mid = 0.5 * (tab.phi[i] + tab.phi[i + 1]);
                double exact = tab.cdf[i] + quad::gauss<10>(f, tab.phi[i], mid);
                double approx = tab.hermite(i, 0.5, tab.phi[i + 1] - tab.phi[i]);
                worst = std::max(worst, std::abs(exact - approx) / tab.total);
            }
            if (worst < 1e-10) return tab;
        }
        fail(ErrorKind::TableUnderResolved, "CDF interpolation error above 1e-10");
    }

    struct PairHash {
        std::size_t operator()(const std::pair<double, int>& p) const
        {
            return std::hash<double>()(p.first) ^ (std::hash<int>()(p.second) * 0x9e3779b97f4a7c15ULL);
        }
    };

    ActionKind kind_;
    ActionOptions opt_;
    mutable std::mutex mu_;
    mutable std::map<double, double> z_cache_;
    mutable std::unordered_map<std::pair<double, int>, double, PairHash> coef_cache_;
    mutable std::list<std::int64_t> lru_;
    mutable std::unordered_map<std::int64_t, std::pair<std::shared_ptr<const ClassTable>, std::list<std::int64_t>::iterator>> tables_;
};

/// Property (H) diagnostics over a grid of times.
struct HReport {
    std::vector<double> t;
    std::vector<double> second_moment_ratio; ///< int <v, log g>^2 dmu_t / t, unit v
    double ratio_intercept = 0.0;            ///< linear extrapolation of the ratio to t = 0
    std::vector<std::array<double, 3>> tail_ratio; ///< mu_t(dist > t^0.4) / t^p, p = 1, 2, 3
    std::vector<std::array<double, 3>> moment_ratio; ///< int |log|^{2 beta} / t^beta, beta = 1, 1.5, 2
    std::array<double, 3> c_beta{};          ///< max over the grid of moment_ratio
    double symmetry_residual = 0.0;
    double ad_residual = 0.0;
    bool second_moment_ok = false;
    bool tail_ok = false;
    bool moment_ok = false;
    bool symmetry_ok = false;
};

template <GroupPolicy G>
HReport verify_H(const ActionFamily<G>& a, const std::vector<double>& grid, std::uint64_t seed = 1)
{
    HReport r;
    r.t = grid;
    std::sort(r.t.begin(), r.t.end());
    for (double t : r.t) {
        if (!(t > 0.0 && t <= 1.0)) fail(ErrorKind::InvalidArgument, "t-grid must lie in (0, 1]");
        const double hi = a.upper(t);
        auto mom = [&](double pw) {
            return quad::adaptive([&](double p) { return std::pow(p, pw) * a.class_density(t, p); }, 0.0, hi, 1e-12);
        };
        r.second_moment_ratio.push_back(mom(2.0) / G::algebra_dim / t);
        double cut = std::pow(t, 0.4);
        double tail = cut >= hi ? 0.0 : quad::adaptive([&](double p) { return a.class_density(t, p); }, cut, hi, 1e-10);
        tail = std::max(0.0, tail);
        r.tail_ratio.push_back({tail / t, tail / (t * t), tail / (t * t * t)});
        r.moment_ratio.push_back({mom(2.0) / t, mom(3.0) / std::pow(t, 1.5), mom(4.0) / (t * t)});
    }
    std::vector<double> x(r.t.begin(), r.t.end());
    auto fit = fit_line(x, r.second_moment_ratio);
    r.ratio_intercept = fit.intercept;
    r.second_moment_ok = std::abs(fit.intercept - 1.0) < 0.02 && std::abs(r.second_moment_ratio.front() - 1.0) < 0.05;

    r.tail_ok = true;
    for (int p = 0; p < 3; ++p)
        if (r.tail_ratio.front()[p] > r.tail_ratio.back()[p] && r.tail_ratio.front()[p] > 1e-12) r.tail_ok = false;

    r.moment_ok = true;
    for (int b = 0; b < 3; ++b) {
        double lo = 1e300, hi = 0.0;
        for (auto& m : r.moment_ratio) {
            lo = std::min(lo, m[b]);
            hi = std::max(hi, m[b]);
        }
        r.c_beta[b] = hi;
        if (!std::isfinite(hi) || hi > 20.0 * lo) r.moment_ok = false;
    }

    Stream rng(seed, 0x4855);
    for (int i = 0; i < 100; ++i) {
        auto g = G::haar(rng);
        auto h = G::haar(rng);
        double t = r.t[i % r.t.size()];
        double d0 = a.density(t, g);
        r.symmetry_residual = std::max(r.symmetry_residual, std::abs(d0 - a.density(t, G::inverse(g))) / std::max(1.0, d0));
        auto c = G::multiply(G::multiply(h, g), G::inverse(h));
        r.ad_residual = std::max(r.ad_residual, std::abs(d0 - a.density(t, c)) / std::max(1.0, d0));
    }
    r.symmetry_ok = r.symmetry_residual < 1e-9 && r.ad_residual < 1e-9;
    return r;
}

struct MomentEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
    std::size_t rejected = 0;
};

/// Monte Carlo E|log(x_1 ... x_k)|^{2 beta} with x_i ~ mu_{s_i} independent.
template <GroupPolicy G>
MomentEstimate convolved_moment(const std::vector<double>& areas, const ActionFamily<G>& a, double two_beta,
                                std::size_t samples, std::uint64_t seed, unsigned threads = 1)
{
    if (areas.empty()) fail(ErrorKind::InvalidArgument, "empty area list");
    for (double s : areas)
        if (!(s > 0.0 && s <= 1.0)) fail(ErrorKind::InvalidArgument, "areas must lie in (0, 1]");
    std::vector<double> val(samples, 0.0);
    std::vector<char> bad(samples, 0);
    parallel_for(samples, threads, [&](std::size_t i) {
        auto g = G::identity();
        for (std::size_t k = 0; k < areas.size(); ++k) {
            Stream rng(seed, i, k);
            g = G::multiply(g, a.sample(areas[k], rng));
        }
        double phi = G::class_angle(g);
        if (phi > kPi - 1e-6) {
            bad[i] = 1;
            return;
        }
        val[i] = std::pow(phi, two_beta);
    });
    std::vector<double> kept;
    kept.reserve(samples);
    std::size_t rej = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        if (bad[i]) ++rej;
        else kept.push_back(val[i]);
    }
    if (double(rej) > 1e-3 * double(samples))
        fail(ErrorKind::CutLocusFractionExceeded, std::to_string(rej) + " samples near the cut locus");
    auto e = estimate(kept);
    return {e.mean, e.se, kept.size(), rej};
}

} // namespace ym2
