#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "actions.hpp"
#include "characters.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "stats.hpp"

namespace ym2 {

/// Part of the lattice to fill: levels 0..level_hi and arcs [col_lo, col_hi).
struct SampleRegion {
    static constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();
    std::size_t level_hi = kAll;
    std::size_t col_lo = 0;
    std::size_t col_hi = kAll;
};

/**
 * Configuration in discrete Morse gauge: M on horizontal edges with the bottom row
 * fixed to the identity, and the 2g stable elements U. Only the sampled region is
 * stored; edges outside it read as the identity.
 */
template <GroupPolicy G>
struct GaugeConfig {
    using Element = typename G::Element;

    std::size_t levels = 0, cols = 0;
    std::vector<Element> M; ///< (level, arc - region.col_lo) over the region, row-major
    std::vector<Element> U;
    std::uint64_t seed = 0, sample = 0;
    ActionKind action = ActionKind::Villain;
    SampleRegion region;

    std::size_t width() const { return region.col_hi - region.col_lo; }
    bool stored(std::size_t level, std::size_t arc) const
    {
        return level <= region.level_hi && arc >= region.col_lo && arc < region.col_hi;
    }

    Element edge(std::size_t level, std::size_t arc) const
    {
        if (!stored(level, arc)) return G::identity();
        return M[level * width() + arc - region.col_lo];
    }

    /// Face increment M_r^{-1} M_{r+} of face (row, col).
    Element increment(std::size_t row, std::size_t col) const
    {
        return G::multiply(G::inverse(edge(row, col)), edge(row + 1, col));
    }
};

/// Increment of face f in sample `sample`; the stream is keyed by the face alone.
template <GroupPolicy G>
typename G::Element face_increment(const MorseLattice& lat, const ActionFamily<G>& a, std::uint64_t seed,
                                   std::uint64_t sample, std::size_t f)
{
    Stream rng(seed, sample, f);
    return a.sample(lat.face_area(f), rng);
}

template <GroupPolicy G>
typename G::Element stable_element(const MorseLattice& lat, std::uint64_t seed, std::uint64_t sample, int b)
{
    Stream rng(seed, sample, lat.faces() + std::size_t(b));
    return G::haar(rng);
}

template <GroupPolicy G>
GaugeConfig<G> sample_config(const MorseLattice& lat, const ActionFamily<G>& a, std::uint64_t seed, std::uint64_t sample,
                             SampleRegion region = {})
{
    GaugeConfig<G> c;
    c.levels = lat.levels();
    c.cols = lat.cols();
    c.seed = seed;
    c.sample = sample;
    c.action = a.kind();
    region.level_hi = std::min(region.level_hi, lat.levels() - 1);
    region.col_hi = std::min(region.col_hi, lat.cols());
    region.col_lo = std::min(region.col_lo, region.col_hi);
    c.region = region;
    const std::size_t w = c.width();
    c.M.assign((region.level_hi + 1) * w, G::identity());
    for (std::size_t col = region.col_lo; col < region.col_hi; ++col)
        for (std::size_t row = 0; row < region.level_hi; ++row) {
            auto d = face_increment(lat, a, seed, sample, lat.face_index(row, col));
            const std::size_t k = col - region.col_lo;
            c.M[(row + 1) * w + k] = G::multiply(c.M[row * w + k], d);
        }
    for (int b = 0; b < 2 * lat.genus(); ++b) c.U.push_back(stable_element<G>(lat, seed, sample, b));
    return c;
}

/// Ordered product of a word; face letters give M_r^{-1} M_{r+}.
template <GroupPolicy G>
typename G::Element holonomy(const GaugeConfig<G>& cfg, const MorseLattice& lat, const Word& word)
{
    auto h = G::identity();
    for (auto& l : word) {
        typename G::Element x;
        switch (l.kind) {
        case Letter::Kind::Edge:
            if (l.index >= cfg.levels * cfg.cols) fail(ErrorKind::UnknownGenerator, "edge " + std::to_string(l.index));
            x = cfg.edge(l.index / cfg.cols, l.index % cfg.cols);
            break;
        case Letter::Kind::Face:
            if (l.index >= lat.faces()) fail(ErrorKind::UnknownGenerator, "face " + std::to_string(l.index));
            x = cfg.increment(lat.face_row(l.index), lat.face_col(l.index));
            break;
        case Letter::Kind::Stable:
            if (l.index >= cfg.U.size()) fail(ErrorKind::UnknownGenerator, "stable loop " + std::to_string(l.index));
            x = cfg.U[l.index];
            break;
        default:
            fail(ErrorKind::UnknownGenerator, "letter kind");
        }
        h = G::multiply(h, l.inverse ? G::inverse(x) : x);
    }
    return h;
}

/// Per-sample values f(i) for i < n, evaluated in parallel.
template <class F>
std::vector<double> per_sample(std::size_t n, unsigned threads, F&& f)
{
    std::vector<double> out(n);
    parallel_for(n, threads, [&](std::size_t i) { out[i] = f(i); });
    return out;
}

/// E[chi_lambda(Hol)] for the boundary circle of a genus-g surface with the given faces.
template <GroupPolicy G>
double boundary_prediction(int genus, const std::vector<double>& areas, const ActionFamily<G>& a, int index)
{
    auto [lg, sg] = detail::log_face_product(a, detail::tally(areas), index);
    return sg * std::exp(lg) / std::pow(double(G::dim(index)), 2 * genus - 1);
}

struct MomentRow {
    int index = 0;
    int dim = 1;
    double casimir = 0.0;
    Estimate mc;
    double prediction = 0.0;

    double z() const { return mc.se > 0.0 ? (mc.mean - prediction) / mc.se : (mc.mean == prediction ? 0.0 : INFINITY); }
};

/// MC character moments of the top boundary holonomy against the character-sum prediction.
template <GroupPolicy G>
std::vector<MomentRow> boundary_law_check(const MorseLattice& lat, const ActionFamily<G>& a, const std::vector<int>& indices,
                                          std::size_t samples, std::uint64_t seed, unsigned threads = 1)
{
    const auto word = lat.level_circle(lat.levels() - 1);
    auto phi = per_sample(samples, threads, [&](std::size_t i) {
        auto cfg = sample_config(lat, a, seed, i);
        return G::class_angle(holonomy(cfg, lat, word));
    });
    std::vector<MomentRow> rows;
    for (int idx : indices) {
        MomentRow r;
        r.index = idx;
        r.dim = G::dim(idx);
        r.casimir = G::casimir(idx);
        std::vector<double> v(samples);
        for (std::size_t i = 0; i < samples; ++i) v[i] = G::class_character(idx, phi[i]);
        r.mc = estimate(v);
        r.prediction = boundary_prediction(lat.genus(), lat.areas(), a, idx);
        rows.push_back(r);
    }
    return rows;
}

struct FaceMoment {
    std::size_t face = 0;
    MomentRow row;
};

struct FaceCovariance {
    std::size_t face_a = 0, face_b = 0;
    int index = 0;
    Estimate cov; ///< of Re chi_lambda on the two face loops
};

struct FaceMarginalReport {
    std::vector<FaceMoment> means;
    std::vector<FaceCovariance> covariances;
};

/**
 * Character means of face-loop holonomies against mu-hat_{sigma(F)}(lambda), and
 * pairwise covariances against 0. Holonomies are read off the sampled edges.
 */
template <GroupPolicy G>
FaceMarginalReport face_marginal_check(const MorseLattice& lat, const ActionFamily<G>& a, const std::vector<std::size_t>& faces,
                                       const std::vector<int>& indices, std::size_t samples, std::uint64_t seed, unsigned threads = 1)
{
    if (faces.empty()) fail(ErrorKind::InvalidArgument, "no faces to test");
    SampleRegion reg;
    reg.level_hi = 0;
    reg.col_lo = lat.cols();
    reg.col_hi = 0;
    for (auto f : faces) {
        if (f >= lat.faces()) fail(ErrorKind::IndexOutOfRange, "face " + std::to_string(f));
        reg.level_hi = std::max(reg.level_hi, lat.face_row(f) + 1);
        reg.col_lo = std::min(reg.col_lo, lat.face_col(f));
        reg.col_hi = std::max(reg.col_hi, lat.face_col(f) + 1);
    }
    const std::size_t nf = faces.size();
    std::vector<double> phi(samples * nf);
    parallel_for(samples, threads, [&](std::size_t i) {
        auto cfg = sample_config(lat, a, seed, i, reg);
        for (std::size_t k = 0; k < nf; ++k)
            phi[i * nf + k] = G::class_angle(holonomy(cfg, lat, Word{{Letter::Kind::Face, faces[k], false}}));
    });
    FaceMarginalReport out;
    for (int idx : indices) {
        std::vector<std::vector<double>> chi(nf, std::vector<double>(samples));
        for (std::size_t i = 0; i < samples; ++i)
            for (std::size_t k = 0; k < nf; ++k) chi[k][i] = G::class_character(idx, phi[i * nf + k]);
        for (std::size_t k = 0; k < nf; ++k) {
            FaceMoment m;
            m.face = faces[k];
            m.row.index = idx;
            m.row.dim = G::dim(idx);
            m.row.casimir = G::casimir(idx);
            m.row.mc = estimate(chi[k]);
            m.row.prediction = a.fourier_coeff(lat.face_area(faces[k]), idx);
            out.means.push_back(m);
        }
        for (std::size_t k = 0; k < nf; ++k)
            for (std::size_t l = k + 1; l < nf; ++l) out.covariances.push_back({faces[k], faces[l], idx, covariance(chi[k], chi[l])});
    }
    return out;
}

/// An observable of a configuration that only reads bonds on levels <= max_level.
template <GroupPolicy G>
struct Observable {
    std::string name;
    std::size_t max_level = 0;
    std::function<double(const GaugeConfig<G>&)> f;
};

struct ConditionResult {
    double estimate = 0.0;
    double se = 0.0;
    double ess = 0.0;
    double ess_fraction = 0.0;
    std::size_t samples = 0;
    std::vector<double> weights;
    std::vector<double> values;
};

/// Class density of the convolution of all face measures on rows >= level.
template <GroupPolicy G>
Spectrum<G> rest_spectrum(const MorseLattice& lat, const ActionFamily<G>& a, std::size_t level, double c2max)
{
    std::vector<double> rest(lat.areas().begin() + std::ptrdiff_t(level * lat.cols()), lat.areas().end());
    if (rest.empty()) fail(ErrorKind::InvalidArgument, "no faces above the conditioning level");
    return convolve_spectrum(rest, a, c2max);
}

/**
 * E[F | Hol(top) = 1] by self-normalized importance weights w_i = p_rest(H_j^{-1}),
 * where H_j is the level-j circle with insertions and p_rest the class density of
 * everything above level j.
 */
template <GroupPolicy G>
ConditionResult condition_close(const MorseLattice& lat, const ActionFamily<G>& a, const Observable<G>& obs, std::size_t level,
                                std::size_t samples, std::uint64_t seed, unsigned threads = 1, double c2max = 200.0)
{
    if (obs.max_level > level)
        fail(ErrorKind::SupportViolation, "observable '" + obs.name + "' reads level " + std::to_string(obs.max_level) +
                                              " above the conditioning level " + std::to_string(level));
    const auto word = lat.level_circle(level);
    const auto rest = rest_spectrum(lat, a, level, c2max);
    SampleRegion region;
    region.level_hi = level;
    ConditionResult r;
    r.samples = samples;
    r.weights.resize(samples);
    r.values.resize(samples);
    parallel_for(samples, threads, [&](std::size_t i) {
        auto cfg = sample_config(lat, a, seed, i, region);
        double phi = G::class_angle(holonomy(cfg, lat, word));
        r.weights[i] = std::max(0.0, evaluate(rest, phi));
        r.values[i] = obs.f(cfg);
    });
    std::vector<double> wf(samples), w2(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        wf[i] = r.weights[i] * r.values[i];
        w2[i] = r.weights[i] * r.weights[i];
    }
    double sw = pairwise_sum(r.weights), sw2 = pairwise_sum(w2);
    if (!(sw > 0.0)) fail(ErrorKind::ESSCollapse, "all importance weights vanish");
    r.estimate = pairwise_sum(wf) / sw;
    std::vector<double> dev(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        double d = r.weights[i] * (r.values[i] - r.estimate);
        dev[i] = d * d;
    }
    r.se = std::sqrt(pairwise_sum(dev)) / sw;
    r.ess = sw * sw / sw2;
    r.ess_fraction = r.ess / double(samples);
    if (r.ess_fraction < 0.01)
        fail(ErrorKind::ESSCollapse, "effective sample size " + std::to_string(r.ess) + " below 1% of samples");
    return r;
}

/// Lattice observable chi_lambda(Delta_F) for face (row, col).
template <GroupPolicy G>
Observable<G> face_character(std::size_t row, std::size_t col, int index)
{
    Observable<G> o;
    o.name = "chi_" + std::to_string(index) + "(face " + std::to_string(row) + "," + std::to_string(col) + ")";
    o.max_level = row + 1;
    o.f = [=](const GaugeConfig<G>& c) { return G::class_character(index, G::class_angle(c.increment(row, col))); };
    return o;
}

struct IncrementMoment {
    Estimate mc;
    double shape = 0.0; ///< l^b ((m-n)^b eps^b + n^{2b} eps^{2b})
    double eps = 0.0;   ///< largest face area involved
    std::size_t rejected = 0;
};

/**
 * E |sum_{j=k}^{l-1} (log M^{(m)}_j - log M^{(n)}_j)|^{2 beta} over arcs [k, l) and
 * levels n < m, with the shape of its moment bound.
 */
template <GroupPolicy G>
IncrementMoment increment_moment_check(const MorseLattice& lat, const ActionFamily<G>& a, std::size_t k, std::size_t l,
                                       std::size_t m, std::size_t n, double two_beta, std::size_t samples, std::uint64_t seed,
                                       unsigned threads = 1)
{
    if (l < k || l > lat.cols() || m >= lat.levels() || n > m)
        fail(ErrorKind::IndexOutOfRange, "increment window outside the lattice");
    IncrementMoment out;
    const double beta = 0.5 * two_beta;
    for (std::size_t row = 0; row < m; ++row)
        for (std::size_t j = k; j < l; ++j) out.eps = std::max(out.eps, lat.face_area(row, j));
    out.shape = std::pow(double(l - k), beta) *
                (std::pow(double(m - n), beta) * std::pow(out.eps, beta) + std::pow(double(n), two_beta) * std::pow(out.eps, two_beta));
    if (l == k || m == n) {
        out.mc.n = samples;
        return out;
    }
    SampleRegion region;
    region.level_hi = m;
    region.col_lo = k;
    region.col_hi = l;
    std::vector<char> bad(samples, 0);
    auto v = per_sample(samples, threads, [&](std::size_t i) {
        auto cfg = sample_config(lat, a, seed, i, region);
        typename G::Algebra s{};
        try {
            for (std::size_t j = k; j < l; ++j) {
                auto top = G::log(cfg.edge(m, j)), bot = G::log(cfg.edge(n, j));
                for (std::size_t c = 0; c < s.size(); ++c) s[c] += top[c] - bot[c];
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::CutLocus) throw;
            bad[i] = 1;
            return 0.0;
        }
        return std::pow(std::sqrt(G::inner(s, s)), two_beta);
    });
    std::vector<double> kept;
    for (std::size_t i = 0; i < samples; ++i)
        if (!bad[i]) kept.push_back(v[i]);
    out.rejected = samples - kept.size();
    if (double(out.rejected) > 1e-3 * double(samples))
        fail(ErrorKind::CutLocusFractionExceeded, std::to_string(out.rejected) + " samples at the cut locus");
    out.mc = estimate(kept);
    return out;
}

} // namespace ym2
