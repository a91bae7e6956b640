#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "actions.hpp"
#include "errors.hpp"
#include "group.hpp"

namespace ym2 {

/// Fourier data f-hat(lambda) of a class function f = sum f-hat(lambda) chi_lambda.
template <GroupPolicy G>
struct Spectrum {
    std::string source = "custom";
    std::vector<IrrepLabel> labels; ///< sorted by Casimir
    std::vector<double> coef;
    double c2max = 0.0;
    double tail_bound = 0.0;
    bool under_truncated = false;

    std::size_t size() const { return labels.size(); }
};

inline constexpr double kSpectrumTailTol = 1e-9;
inline constexpr int kClassGridSize = 4096;

/// Endpoint-clustered class grid on [0, pi].
inline const std::vector<double>& class_grid()
{
    static const std::vector<double> grid = [] {
        std::vector<double> g(kClassGridSize);
        for (int i = 0; i < kClassGridSize; ++i)
            g[i] = 0.5 * kPi * (1.0 - std::cos(kPi * double(i) / double(kClassGridSize - 1)));
        return g;
    }();
    return grid;
}

/// Real characters chi_{|n|}(phi) for n = 0..K on the class angle (cos for U1, Chebyshev U for SU2).
template <GroupPolicy G, class T = double>
void class_characters(double phi, int K, std::vector<T>& out)
{
    out.assign(K + 1, T(0));
    const T c = std::cos((T)phi);
    out[0] = 1;
    if (K >= 1) out[1] = G::tag == GroupTag::U1 ? c : 2 * c;
    for (int k = 2; k <= K; ++k) out[k] = 2 * c * out[k - 1] - out[k - 2];
}

/// Evaluate sum coef * chi on the class angle.
template <GroupPolicy G>
double evaluate(const Spectrum<G>& s, double phi)
{
    int K = 0;
    for (auto& l : s.labels) K = std::max(K, std::abs(l.index));
    std::vector<double> ch;
    class_characters<G>(phi, K, ch);
    double v = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) v += s.coef[i] * ch[std::abs(s.labels[i].index)];
    return v;
}

namespace detail {

/// log|mu-hat/d| and sign over a list of (area, multiplicity).
template <GroupPolicy G>
std::pair<double, int> log_face_product(const ActionFamily<G>& a, const std::map<double, std::size_t>& areas, int index)
{
    double lg = 0.0;
    int sign = 1;
    const double d = G::dim(index);
    for (auto& [s, cnt] : areas) {
        if (a.kind() == ActionKind::Villain) {
            lg -= double(cnt) * s * G::casimir(index);
            continue;
        }
        double r = a.fourier_coeff(s, index) / d;
        if (r == 0.0) return {-INFINITY, 1};
        lg += double(cnt) * std::log(std::abs(r));
        if (r < 0.0 && (cnt % 2 == 1)) sign = -sign;
    }
    return {lg, sign};
}

inline std::map<double, std::size_t> tally(const std::vector<double>& areas)
{
    std::map<double, std::size_t> m;
    for (double s : areas) {
        if (!(s > 0.0)) fail(ErrorKind::InvalidArgument, "areas must be positive");
        ++m[s];
    }
    return m;
}

} // namespace detail

/// Spectrum of the convolution of mu_{s_1}, ..., mu_{s_n}: d * prod(mu-hat/d).
template <GroupPolicy G>
Spectrum<G> convolve_spectrum(const std::vector<double>& areas, const ActionFamily<G>& a, double c2max)
{
    auto tal = detail::tally(areas);
    Spectrum<G> sp;
    sp.source = to_string(a.kind());
    sp.c2max = c2max;
    sp.labels = G::irreps_up_to(c2max);
    sp.coef.resize(sp.labels.size());
    std::map<int, double> by_index;
    for (std::size_t i = 0; i < sp.size(); ++i) {
        int idx = std::abs(sp.labels[i].index);
        auto it = by_index.find(idx);
        if (it == by_index.end()) {
            auto [lg, sg] = detail::log_face_product(a, tal, idx);
            it = by_index.emplace(idx, sg * G::dim(idx) * std::exp(lg)).first;
        }
        sp.coef[i] = it->second;
    }
    // tail: the shell (c2max, 2 c2max] measured, the rest extrapolated geometrically
    auto ext = G::irreps_up_to(std::max(2.0 * c2max, c2max + 4.0));
    double shell = 0.0, last_shell = 0.0, prev = 0.0;
    for (std::size_t i = sp.size(); i < ext.size(); ++i) {
        int idx = std::abs(ext[i].index);
        auto [lg, sg] = detail::log_face_product(a, tal, idx);
        double term = std::exp(lg) * G::dim(idx) * G::dim(idx);
        shell += term;
        if (i + 1 == ext.size()) last_shell = term;
        if (i + 2 == ext.size()) prev = term;
    }
    double q = (prev > 0.0) ? std::min(last_shell / prev, 0.999) : 0.0;
    sp.tail_bound = shell + (q > 0.0 ? last_shell * q / (1.0 - q) : 0.0);
    sp.under_truncated = !(sp.tail_bound < kSpectrumTailTol);
    return sp;
}

/// Spectrum of mu_t itself.
template <GroupPolicy G>
Spectrum<G> action_spectrum(const ActionFamily<G>& a, double t, double c2max)
{
    return convolve_spectrum<G>({t}, a, c2max);
}

/// Heat kernel at time T (truncated), coefficients d e^{-T c2}.
template <GroupPolicy G>
Spectrum<G> heat_spectrum(double T, double c2max)
{
    ActionFamily<G> v(ActionKind::Villain);
    auto s = convolve_spectrum<G>({T}, v, c2max);
    s.source = "heat";
    return s;
}

/// sum (1 + c2)^{k/2} |coef| d  -- an upper bound for the C^k norm.
template <GroupPolicy G>
double ck_norm(const Spectrum<G>& s, int k)
{
    if (k < 0) fail(ErrorKind::InvalidArgument, "k must be >= 0");
    double v = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        v += std::pow(1.0 + s.labels[i].casimir, 0.5 * k) * std::abs(s.coef[i]) * s.labels[i].dim;
    return v;
}

/// Sup over the class grid of |f1 - f2|.
template <GroupPolicy G>
double sup_norm_diff(const Spectrum<G>& s1, const Spectrum<G>& s2)
{
    std::map<int, double> diff;
    for (std::size_t i = 0; i < s1.size(); ++i) diff[s1.labels[i].index] += s1.coef[i];
    for (std::size_t i = 0; i < s2.size(); ++i) diff[s2.labels[i].index] -= s2.coef[i];
    std::vector<double> by_abs;
    int K = 0;
    for (auto& [idx, c] : diff) K = std::max(K, std::abs(idx));
    by_abs.assign(K + 1, 0.0);
    for (auto& [idx, c] : diff) by_abs[std::abs(idx)] += c;
    double best = 0.0;
    std::vector<double> ch;
    for (double phi : class_grid()) {
        class_characters<G>(phi, K, ch);
        double v = 0.0;
        for (int k = K; k >= 0; --k) v += by_abs[k] * ch[k];
        best = std::max(best, std::abs(v));
    }
    return best;
}

template <GroupPolicy G>
double sup_norm(const Spectrum<G>& s)
{
    Spectrum<G> zero;
    return sup_norm_diff(s, zero);
}

struct SegalResult {
    double value = 0.0;
    double tail_bound = 0.0;
    double c2max = 0.0;
    bool under_truncated = false;
};

/**
 * Z = sum_lambda prod_F (mu-hat_F/d) chi(g_1)...chi(g_k) / d^{2g-2+k}.
 * c2max <= 0 selects the truncation from the decay of the terms.
 */
template <GroupPolicy G>
SegalResult segal_amplitude(int genus, const std::vector<typename G::Element>& boundary, const std::vector<double>& face_areas,
                            const ActionFamily<G>& a, double c2max = 0.0)
{
    if (genus < 0) fail(ErrorKind::InvalidArgument, "genus must be >= 0");
    auto tal = detail::tally(face_areas);
    const int k = int(boundary.size());
    const int euler = 2 * genus - 2 + k;
    std::map<int, double> face_cache;
    auto face = [&](int idx) {
        auto it = face_cache.find(idx);
        if (it != face_cache.end()) return it->second;
        auto [lg, sg] = detail::log_face_product(a, tal, idx);
        return face_cache[idx] = sg * std::exp(lg);
    };
    // magnitude bound of the lambda-term: |prod| d^{k} / d^{euler}
    auto bound = [&](const IrrepLabel& l) { return std::abs(face(std::abs(l.index))) * std::pow(double(l.dim), k - euler); };
    auto term = [&](const IrrepLabel& l) {
        std::complex<double> ch = 1.0;
        for (auto& g : boundary) ch *= G::character(l.index, g);
        return (face(std::abs(l.index)) * ch / std::pow(double(l.dim), euler)).real();
    };
    auto shell_tail = [&](double c) {
        auto in = G::irreps_up_to(c);
        auto ext = G::irreps_up_to(std::max(2.0 * c, c + 4.0));
        double sh = 0.0;
        for (std::size_t i = in.size(); i < ext.size(); ++i) sh += bound(ext[i]);
        return sh;
    };
    SegalResult r;
    if (c2max <= 0.0) {
        double total = 0.0;
        for (auto& [s, cnt] : tal) total += s * double(cnt);
        double c = std::max(8.0, 8.0 / std::max(total, 1e-12));
        for (int it = 0; it < 40; ++it, c *= 2.0) {
            if (shell_tail(c) < 1e-16) break;
            if (G::irreps_up_to(c).size() > 2000000) break;
        }
        c2max = c;
    }
    r.c2max = c2max;
    auto labels = G::irreps_up_to(c2max);
    std::vector<double> terms;
    terms.reserve(labels.size());
    for (auto& l : labels) terms.push_back(term(l));
    // sum small terms first
    double sum = 0.0;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) sum += *it;
    r.value = sum;
    r.tail_bound = shell_tail(c2max);
    r.under_truncated = !(r.tail_bound < kSpectrumTailTol);
    if (genus == 0 && k == 0 && r.under_truncated)
        fail(ErrorKind::DivergentSphereSum, "sphere character sum fails the tail test");
    return r;
}

struct LltRow {
    int n = 0;
    long double sup_distance = 0;  ///< sup over the class grid of |rho_{1/n}^{*n} - p_1|
    long double ck_distance = 0;   ///< C^k Fourier bound of the same difference
    double ck_bound = 0;           ///< C^k Fourier bound of rho_{1/n}^{*n} itself
    double small_delta = 0;        ///< fitted delta with |mu-hat/d| <= e^{-delta c2 t} for sqrt(t c2) <= 0.5
    double mid_delta = 0;          ///< sup |mu-hat/d| over 0.5 <= sqrt(t c2) <= 2
    double mid_contraction = 0;    ///< mid_delta^n
    double decay_s = 0;            ///< fitted s in |mu-hat/d| <= C (1 + sqrt(t c2))^{-s}
    bool under_truncated = false;
};

/// Local limit theorem ladder against the heat kernel at time 1.
template <GroupPolicy G>
std::vector<LltRow> llt_report(const ActionFamily<G>& a, const std::vector<int>& ladder, int k, double c2max = 60.0)
{
    std::vector<LltRow> rows;
    auto labels = G::irreps_up_to(c2max);
    int K = 0;
    for (auto& l : labels) K = std::max(K, std::abs(l.index));
    for (int n : ladder) {
        if (n < 1) fail(ErrorKind::InvalidArgument, "ladder entries must be >= 1");
        const double t = 1.0 / n;
        LltRow row;
        row.n = n;
        std::vector<long double> diff(K + 1, 0.0L);
        std::vector<double> conv(K + 1, 0.0);
        for (int idx = 0; idx <= K; ++idx) {
            long double d = G::dim(idx);
            long double heat = d * std::exp(-(long double)G::casimir(idx));
            long double dev = a.heat_deviation(t, idx);
            long double r = 1.0L + dev;
            if (r > 0.0L) diff[idx] = heat * std::expm1((long double)n * std::log1p(dev));
            else diff[idx] = d * std::pow(r * std::exp(-(long double)t * G::casimir(idx)), (long double)n) - heat;
            conv[idx] = double(heat + diff[idx]);
        }
        std::vector<long double> ch;
        for (double phi : class_grid()) {
            class_characters<G, long double>(phi, K, ch);
            long double v = 0.0L;
            for (int idx = K; idx >= 0; --idx) v += (idx == 0 || G::tag == GroupTag::SU2 ? 1 : 2) * diff[idx] * ch[idx];
            row.sup_distance = std::max(row.sup_distance, std::fabs(v));
        }
        for (auto& l : labels) {
            int idx = std::abs(l.index);
            long double w = std::pow(1.0L + l.casimir, 0.5L * k) * l.dim;
            row.ck_distance += w * std::fabs(diff[idx]);
            row.ck_bound += double(w) * std::abs(conv[idx]);
        }
        // three regimes on the single-step coefficients
        double dsmall = 1e300, dmid = 0.0;
        std::vector<double> xs, ys;
        int extra = 0;
        for (int idx = 1; idx <= 4 * K + 64 && extra < 200; ++idx) {
            double c2 = G::casimir(idx), x = std::sqrt(t * c2);
            double r = std::abs(a.fourier_coeff(t, idx)) / G::dim(idx);
            if (x <= 0.5) dsmall = std::min(dsmall, -std::log(r) / (c2 * t));
            else if (x <= 2.0) dmid = std::max(dmid, r);
            if (x >= 1.0) {
                ++extra;
                if (r > 1e-250) {
                    xs.push_back(std::log1p(x));
                    ys.push_back(std::log(r));
                }
            }
            if (x > 2.0 && extra >= 200) break;
        }
        row.small_delta = dsmall == 1e300 ? 0.0 : dsmall;
        row.mid_delta = dmid;
        row.mid_contraction = std::pow(dmid, n);
        if (xs.size() >= 2) row.decay_s = -fit_line(xs, ys).slope;
        row.under_truncated = std::abs(diff[K]) > 1e-9L && std::abs(conv[K]) > 1e-9;
        rows.push_back(row);
    }
    return rows;
}

/**
 * E[chi_lambda(Delta_F) | boundary holonomy = 1] on a closed genus-g surface, for one
 * face of area s among faces of the given other areas. Ratio of two character sums:
 * the face measure is replaced by chi_lambda * rho_s in the numerator.
 */
template <GroupPolicy G>
double closed_face_moment(int genus, const std::vector<double>& other_areas, double s, const ActionFamily<G>& a, int lambda,
                          double c2max = 200.0)
{
    auto tal = detail::tally(other_areas);
    std::map<int, double> face_cache;
    auto single = [&](int idx) {
        idx = std::abs(idx);
        auto it = face_cache.find(idx);
        if (it != face_cache.end()) return it->second;
        return face_cache[idx] = a.fourier_coeff(s, idx);
    };
    double num = 0.0, den = 0.0;
    for (auto& l : G::irreps_up_to(c2max)) {
        const double d = l.dim;
        auto [lg, sg] = detail::log_face_product(a, tal, std::abs(l.index));
        double rest = sg * std::exp(lg) / std::pow(d, 2 * genus - 2);
        double an = 0.0;
        if constexpr (G::tag == GroupTag::U1) {
            an = single(l.index - lambda);
        } else {
            for (int mu = std::abs(l.index - lambda); mu <= l.index + lambda; mu += 2) an += single(mu);
        }
        num += rest * an / d;
        den += rest * single(l.index) / d;
    }
    return num / den;
}

} // namespace ym2
