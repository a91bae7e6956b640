#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ym2/field.hpp"
#include "ym2/norms.hpp"

namespace ym2::cli {

using nlohmann::json;

/// A CSV table; cells are preformatted so output does not depend on the run.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }

    std::string csv() const
    {
        std::string s;
        auto line = [&](const std::vector<std::string>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
            s += '\n';
        };
        line(columns);
        for (auto& r : rows) line(r);
        return s;
    }
};

inline std::string num(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", x);
    return b;
}
inline std::string num(long double x) { return num(double(x)); }
inline std::string num(int x) { return std::to_string(x); }
inline std::string num(std::size_t x) { return std::to_string(x); }

struct Result {
    Table table;
    json payload = json::object();
    json checks = json::object(); ///< name -> bool
};

[[noreturn]] inline void config_error(const std::string& what) { fail(ErrorKind::Config, what); }

/// Typed access to the config object; every key must be consumed.
class Config {
public:
    explicit Config(json j) : j_(std::move(j))
    {
        if (!j_.is_object()) config_error("config must be a JSON object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    template <class T>
    T get(const std::string& k, T def)
    {
        if (!j_.contains(k)) return def;
        return need<T>(k);
    }

    template <class T>
    T need(const std::string& k)
    {
        used_.insert(k);
        if (!j_.contains(k)) config_error("missing field '" + k + "'");
        const auto& v = j_.at(k);
        if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_integer()) config_error("field '" + k + "' must be an integer");
            if constexpr (!std::is_same_v<T, int>)
                if (v.get<long long>() < 0 && !v.is_number_unsigned()) config_error("field '" + k + "' must be >= 0");
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) config_error("field '" + k + "' must be a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) config_error("field '" + k + "' must be a string");
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
            if (!v.is_array()) config_error("field '" + k + "' must be an array of integers");
            for (auto& e : v)
                if (!e.is_number_integer()) config_error("field '" + k + "' must be an array of integers");
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array()) config_error("field '" + k + "' must be an array of numbers");
            for (auto& e : v)
                if (!e.is_number()) config_error("field '" + k + "' must be an array of numbers");
        } else if constexpr (std::is_same_v<T, json>) {
            return v;
        }
        return v.get<T>();
    }

    void finish() const
    {
        for (auto& [k, v] : j_.items())
            if (!used_.count(k)) config_error("unknown field '" + k + "'");
    }

    const json& raw() const { return j_; }

private:
    json j_;
    std::set<std::string> used_;
};

/// The parsed common fields plus the remaining kind-specific ones.
struct Spec {
    std::string kind;
    std::string output;
    std::uint64_t seed = 0;
    GroupTag group = GroupTag::U1;
    ActionKind action = ActionKind::Villain;
    int genus = 1;
    std::vector<int> ladder;
    double total_area = 1.0;
    AreaSpec area_spec = AreaSpec::Uniform;
    double c2max = 0.0;
    std::size_t samples = 0;
};

inline const std::vector<std::string>& kinds()
{
    static const std::vector<std::string> k{"group-tables", "action-check", "segal", "llt", "sample", "charfun", "norms", "condition"};
    return k;
}

template <class F>
auto as_config(F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) config_error(e.what());
        throw;
    }
}

inline Spec common(Config& c, const std::optional<std::uint64_t>& seed_override)
{
    Spec s;
    s.kind = c.need<std::string>("kind");
    if (std::find(kinds().begin(), kinds().end(), s.kind) == kinds().end()) config_error("unknown kind '" + s.kind + "'");
    s.seed = c.need<std::uint64_t>("seed");
    if (seed_override) s.seed = *seed_override;
    s.output = c.get<std::string>("output", s.kind);
    if (s.output.empty() || s.output.find('/') != std::string::npos) config_error("output must be a plain file stem");
    s.group = as_config([&] { return parse_group(c.get<std::string>("group", "U1")); });
    s.action = as_config([&] { return parse_action(c.get<std::string>("action", "villain")); });
    s.genus = c.get<int>("genus", 1);
    if (s.genus < 0 || s.genus > 8) config_error("genus must lie in 0..8");
    if (c.has("N") && c.has("ladder")) config_error("give either N or ladder");
    if (c.has("N")) s.ladder = {c.need<int>("N")};
    if (c.has("ladder")) s.ladder = c.need<std::vector<int>>("ladder");
    s.total_area = c.get<double>("total_area", 1.0);
    if (!(s.total_area > 0.0)) config_error("total_area must be positive");
    s.area_spec = as_config([&] { return parse_area_spec(c.get<std::string>("area_spec", "uniform")); });
    s.c2max = c.get<double>("c2max", 0.0);
    if (s.c2max < 0.0) config_error("c2max must be >= 0");
    s.samples = c.get<std::size_t>("samples", 0);
    return s;
}

inline void need_lattice(const Spec& s, bool single)
{
    if (s.ladder.empty()) config_error("kind '" + s.kind + "' needs N");
    if (single && s.ladder.size() != 1) config_error("kind '" + s.kind + "' takes a single N");
    for (int N : s.ladder)
        if (N < 0 || N > 14) config_error("N must lie in 0..14");
}

inline void need_samples(const Spec& s)
{
    if (s.samples < 2) config_error("kind '" + s.kind + "' needs samples >= 2");
}

inline MorseLattice lattice(const Spec& s, int N)
{
    LatticeOptions o;
    o.spec = s.area_spec;
    o.total_area = s.total_area;
    return MorseLattice(s.genus, N, o);
}

template <class F>
decltype(auto) with_group(GroupTag t, F&& f)
{
    if (t == GroupTag::U1) return f(U1{});
    return f(SU2{});
}

// ---- kinds ----------------------------------------------------------------

/// Irreps with dimension and Casimir; checks Schur orthogonality by quadrature on the class angle.
template <GroupPolicy G>
Result group_tables(const Spec& s)
{
    Result r;
    r.table.columns = {"index", "dim", "casimir", "norm2"};
    const double c2max = s.c2max > 0.0 ? s.c2max : 20.0;
    auto labels = G::irreps_up_to(c2max);
    auto inner = [](int a, int b) {
        auto f = [&](double p) { return G::class_character(a, p) * G::class_character(b, p) * G::haar_class_density(p); };
        return quad::adaptive(f, 0.0, kPi, 1e-13);
    };
    // real parts of U1 characters: E cos(a phi) cos(b phi) = (d_{a,b} + d_{a,-b}) / 2
    auto expected = [](int a, int b) {
        if (G::tag == GroupTag::SU2) return a == b ? 1.0 : 0.0;
        return 0.5 * ((a == b ? 1.0 : 0.0) + (a == -b ? 1.0 : 0.0));
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i; j < labels.size(); ++j)
            worst = std::max(worst, std::abs(inner(labels[i].index, labels[j].index) - expected(labels[i].index, labels[j].index)));
        r.table.add({num(labels[i].index), num(labels[i].dim), num(labels[i].casimir), num(inner(labels[i].index, labels[i].index))});
    }
    r.payload["irreps"] = labels.size();
    r.payload["orthogonality_residual"] = worst;
    r.checks["orthogonality"] = worst < 1e-10;
    return r;
}

template <GroupPolicy G>
Result action_check(const Spec& s, Config& c)
{
    auto grid = c.get<std::vector<double>>("t_grid", {1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4});
    if (grid.size() < 2) config_error("t_grid needs at least two times");
    c.finish();
    ActionFamily<G> a(s.action);
    auto h = as_config([&] { return verify_H(a, grid, s.seed); });
    Result r;
    r.table.columns = {"t", "second_moment_ratio", "tail_p1", "tail_p2", "tail_p3", "moment_b1", "moment_b1_5", "moment_b2"};
    for (std::size_t i = 0; i < h.t.size(); ++i)
        r.table.add({num(h.t[i]), num(h.second_moment_ratio[i]), num(h.tail_ratio[i][0]), num(h.tail_ratio[i][1]), num(h.tail_ratio[i][2]),
                     num(h.moment_ratio[i][0]), num(h.moment_ratio[i][1]), num(h.moment_ratio[i][2])});
    r.payload["ratio_intercept"] = h.ratio_intercept;
    r.payload["c_beta"] = h.c_beta;
    r.payload["symmetry_residual"] = h.symmetry_residual;
    r.payload["ad_residual"] = h.ad_residual;
    r.checks["second_moment"] = h.second_moment_ok;
    r.checks["tails"] = h.tail_ok;
    r.checks["moments"] = h.moment_ok;
    r.checks["symmetry"] = h.symmetry_ok;
    return r;
}

/// Z for the given faces and k Haar boundary elements; optional random refinements of the faces.
template <GroupPolicy G>
Result segal(const Spec& s, Config& c)
{
    const int k = c.get<int>("k", 0);
    if (k < 0 || k > 4) config_error("k must lie in 0..4");
    auto areas = c.get<std::vector<double>>("areas", {s.total_area});
    if (areas.empty()) config_error("areas must be nonempty");
    for (double x : areas)
        if (!(x > 0.0)) config_error("areas must be positive");
    const int refinements = c.get<int>("refinements", 0);
    if (refinements < 0) config_error("refinements must be >= 0");
    c.finish();
    ActionFamily<G> a(s.action);
    Stream rng(s.seed, 0, 0);
    std::vector<typename G::Element> boundary;
    for (int i = 0; i < k; ++i) boundary.push_back(G::haar(rng));
    auto z = as_config([&] { return segal_amplitude<G>(s.genus, boundary, areas, a, s.c2max); });
    Result r;
    r.table.columns = {"genus", "k", "quantity", "value", "stderr"};
    r.table.add({num(s.genus), num(k), "Z", num(z.value), ""});
    r.payload["tail_bound"] = z.tail_bound;
    r.payload["c2max"] = z.c2max;
    r.payload["under_truncated"] = z.under_truncated;
    if (refinements > 0) {
        double worst = 0.0;
        for (int i = 0; i < refinements; ++i) {
            auto fine = areas;
            int splits = 1 + int(rng() % 5);
            for (int j = 0; j < splits; ++j) {
                std::size_t f = rng() % fine.size();
                double u = 0.05 + 0.9 * rng.uniform(), x = fine[f];
                fine[f] = u * x;
                fine.push_back((1 - u) * x);
            }
            worst = std::max(worst, std::abs(segal_amplitude<G>(s.genus, boundary, fine, a, s.c2max).value - z.value));
        }
        r.table.add({num(s.genus), num(k), "max_refinement_delta", num(worst), ""});
        r.checks["graph_independence"] = worst < 1e-11;
    }
    return r;
}

template <GroupPolicy G>
Result llt(const Spec& s, Config& c)
{
    if (s.ladder.size() < 2) config_error("llt needs a ladder of at least two n");
    const int k = c.get<int>("k", 2);
    if (k < 0) config_error("k must be >= 0");
    c.finish();
    ActionFamily<G> a(s.action);
    auto rows = as_config([&] { return llt_report(a, s.ladder, k, s.c2max > 0.0 ? s.c2max : 60.0); });
    Result r;
    r.table.columns = {"n", "sup_distance", "ck_distance", "ck_bound", "small_delta", "mid_delta", "mid_contraction", "decay_s"};
    bool decreasing = true, ck_ok = true, truncated = false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& x = rows[i];
        r.table.add({num(x.n), num(x.sup_distance), num(x.ck_distance), num(x.ck_bound), num(x.small_delta), num(x.mid_delta),
                     num(x.mid_contraction), num(x.decay_s)});
        truncated = truncated || x.under_truncated;
        if (i > 0 && !(x.sup_distance < rows[i - 1].sup_distance)) decreasing = false;
        if (x.n >= 32 && !std::isfinite(double(x.ck_distance))) ck_ok = false;
        if (i > 0 && rows[i - 1].n >= 32 && x.ck_distance > rows[i - 1].ck_distance) ck_ok = false;
    }
    r.payload["under_truncated"] = truncated;
    r.checks["distance_decreasing"] = decreasing;
    r.checks["ck_non_increasing"] = ck_ok;
    return r;
}

inline std::vector<int> default_indices(GroupTag g) { return g == GroupTag::U1 ? std::vector<int>{1, 2} : std::vector<int>{0, 1, 2}; }

/// Face marginals, boundary law or level-circle law, by `mode`.
template <GroupPolicy G>
Result sample(const Spec& s, Config& c, unsigned threads)
{
    need_lattice(s, true);
    need_samples(s);
    const auto mode = c.get<std::string>("mode", "boundary");
    auto indices = c.get<std::vector<int>>("indices", default_indices(G::tag));
    for (int i : indices)
        if (i < 0) config_error("indices must be >= 0");
    const double zmax = c.get<double>("z_max", 4.0);
    ActionFamily<G> a(s.action);
    auto lat = as_config([&] { return lattice(s, s.ladder[0]); });
    Result r;
    bool ok = true;
    if (mode == "faces") {
        std::vector<std::size_t> faces;
        if (c.has("faces")) {
            auto f = c.need<json>("faces");
            if (!f.is_array()) config_error("faces must be an array of [row, col]");
            for (auto& e : f) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
                    config_error("faces must be an array of [row, col]");
                std::size_t row = e[0], col = e[1];
                if (row >= lat.rows() || col >= lat.cols()) config_error("face outside the lattice");
                faces.push_back(lat.face_index(row, col));
            }
        } else {
            for (std::size_t k = 0; k < 5; ++k) faces.push_back(lat.face_index(k % 3, (k * lat.cols()) / 5));
        }
        c.finish();
        auto rep = as_config([&] { return face_marginal_check(lat, a, faces, indices, s.samples, s.seed, threads); });
        r.table.columns = {"quantity", "face_a", "face_b", "index", "value", "stderr", "prediction", "z"};
        for (auto& m : rep.means) {
            r.table.add({"mean", num(m.face), "", num(m.row.index), num(m.row.mc.mean), num(m.row.mc.se), num(m.row.prediction), num(m.row.z())});
            ok = ok && std::abs(m.row.z()) <= zmax;
        }
        bool cov_ok = true;
        for (auto& v : rep.covariances) {
            double z = v.cov.se > 0.0 ? v.cov.mean / v.cov.se : 0.0;
            r.table.add({"covariance", num(v.face_a), num(v.face_b), num(v.index), num(v.cov.mean), num(v.cov.se), "0", num(z)});
            cov_ok = cov_ok && std::abs(z) <= zmax;
        }
        r.checks["face_means"] = ok;
        r.checks["face_covariances"] = cov_ok;
        return r;
    }
    std::vector<MomentRow> rows;
    std::vector<std::string> keys;
    if (mode == "boundary") {
        c.finish();
        rows = boundary_law_check(lat, a, indices, s.samples, s.seed, threads);
        for (std::size_t i = 0; i < rows.size(); ++i) keys.push_back("top");
    } else if (mode == "levels") {
        auto radii = c.get<std::vector<double>>("levels", {0.5, 1.0, 1.5});
        c.finish();
        for (auto& x : as_config([&] { return level_circle_check(lat, a, radii, indices, s.samples, s.seed, threads); })) {
            rows.push_back(x.row);
            keys.push_back(num(x.r));
        }
    } else {
        config_error("sample mode must be faces, boundary or levels");
    }
    r.table.columns = {"circle", "index", "dim", "casimir", "value", "stderr", "prediction", "z"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& x = rows[i];
        r.table.add({keys[i], num(x.index), num(x.dim), num(x.casimir), num(x.mc.mean), num(x.mc.se), num(x.prediction), num(x.z())});
        ok = ok && std::abs(x.z()) <= zmax;
    }
    r.checks[mode == "boundary" ? "boundary_law" : "level_circle_law"] = ok;
    return r;
}

inline TestForm test_form(Config& c)
{
    auto box = c.get<std::vector<double>>("box", {0.0, 0.25, 0.0, 0.25});
    if (box.size() != 4 || !(box[1] > box[0]) || !(box[3] > box[2])) config_error("box must be [r_lo, r_hi, theta_lo, theta_hi]");
    auto dir = c.get<std::vector<double>>("direction", {1.0});
    return TestForm::bump(c.get<double>("amplitude", 10.0), box[0], box[1], box[2], box[3], dir);
}

/// Charfun ladder against exp(-|psi|^2/2): errors decreasing and the last one within tol + 4 SE.
template <GroupPolicy G>
Result charfun(const Spec& s, Config& c, unsigned threads)
{
    need_lattice(s, false);
    need_samples(s);
    auto psi = test_form(c);
    const double tol = c.get<double>("tolerance", 0.01);
    c.finish();
    ActionFamily<G> a(s.action);
    Result r;
    r.table.columns = {"N", "plain_re", "plain_im", "plain_se", "cv", "cv_se", "control_mean", "limit", "error", "rejected"};
    std::vector<double> err, se;
    for (int N : s.ladder) {
        auto lat = as_config([&] { return lattice(s, N); });
        auto x = as_config([&] { return charfun_mc(lat, a, psi, s.samples, s.seed, threads); });
        double e = std::abs(x.cv - x.limit);
        err.push_back(e);
        se.push_back(x.cv_se);
        r.table.add({num(N), num(x.plain.real()), num(x.plain.imag()), num(x.plain_se), num(x.cv), num(x.cv_se), num(x.control_mean),
                     num(x.limit), num(e), num(x.rejected)});
    }
    bool dec = true;
    for (std::size_t i = 1; i < err.size(); ++i) dec = dec && err[i] < err[i - 1];
    r.checks["error_decreasing"] = dec;
    r.checks["final_within_tolerance"] = err.back() < tol + 4.0 * se.back();
    return r;
}

template <GroupPolicy G>
Result norms(const Spec& s, Config& c, unsigned threads)
{
    const auto mode = c.get<std::string>("mode", "tightness");
    Result r;
    if (mode == "gagliardo") {
        const int functions = c.get<int>("functions", 100);
        auto alphas = c.get<std::vector<double>>("alphas", {0.3, 0.45});
        auto ps = c.get<std::vector<int>>("ps", {2, 4});
        const int max_cells = c.get<int>("max_cells", 32);
        if (functions < 1 || max_cells < 1) config_error("functions and max_cells must be >= 1");
        c.finish();
        r.table.columns = {"function", "alpha", "p", "cells", "quadrature", "discrete"};
        std::size_t bad = 0;
        for (double al : alphas)
            for (int p : ps)
                for (int i = 0; i < functions; ++i) {
                    Stream rng(s.seed, std::uint64_t(i), 0);
                    std::size_t M = 1 + rng() % std::uint64_t(max_cells);
                    std::vector<std::array<double, G::algebra_dim>> f(M + 1);
                    for (auto& v : f)
                        for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
                    auto g = as_config([&] { return gagliardo_1d(f, al, p); });
                    bad += !(g.quadrature <= g.discrete);
                    r.table.add({num(i), num(al), num(p), num(M), num(g.quadrature), num(g.discrete)});
                }
        r.payload["violations"] = bad;
        r.checks["gagliardo_bound"] = bad == 0;
        return r;
    }
    if (mode != "tightness") config_error("norms mode must be tightness or gagliardo");
    need_lattice(s, false);
    need_samples(s);
    if (s.ladder.size() < 3) config_error("tightness needs at least three N");
    NormParams par{c.get<double>("alpha", 0.4), c.get<int>("p", 8), c.get<double>("s", 0.4)};
    if (s.area_spec != AreaSpec::MorseSingular) config_error("tightness runs on the morse-singular lattice");
    c.finish();
    ActionFamily<G> a(s.action);
    auto t = as_config([&] {
        try {
            return tightness_experiment(s.genus, s.ladder, a, par, s.samples, s.seed, threads, s.total_area);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ParameterOutOfRange) config_error(e.what());
            throw;
        }
    });
    r.table.columns = {"N", "norm", "stderr", "top", "top_stderr", "rejected"};
    for (auto& x : t.rows) r.table.add({num(x.N), num(x.norm.mean), num(x.norm.se), num(x.top.mean), num(x.top.se), num(x.rejected)});
    r.payload["slope"] = t.slope;
    r.payload["slope_se"] = t.slope_se;
    r.payload["top_slope"] = t.top_slope;
    r.payload["top_slope_se"] = t.top_slope_se;
    r.checks["slope_nonpositive"] = t.slope <= 2.0 * t.slope_se;
    return r;
}

/// Conditioned face (or, on U1, level-circle) character against the character-sum oracle.
template <GroupPolicy G>
Result condition(const Spec& s, Config& c, unsigned threads)
{
    need_lattice(s, true);
    need_samples(s);
    ActionFamily<G> a(s.action);
    auto lat = as_config([&] { return lattice(s, s.ladder[0]); });
    const std::size_t level = c.get<std::size_t>("level", lat.last_saddle_level() + 1);
    const auto obs_kind = c.get<std::string>("observable", "face");
    const int index = c.get<int>("index", 1);
    if (index < 0) config_error("index must be >= 0");
    const double c2max = s.c2max > 0.0 ? s.c2max : 200.0;
    if (level <= lat.last_saddle_level() || level >= lat.levels()) config_error("level must lie above the last saddle");
    Observable<G> obs;
    double oracle = 0.0;
    if (obs_kind == "face") {
        const auto row = c.get<std::size_t>("row", level / 2), col = c.get<std::size_t>("col", 0);
        if (row >= level || col >= lat.cols()) config_error("face must lie below the conditioning level");
        obs = face_character<G>(row, col, index);
        auto others = lat.areas();
        const std::size_t f = lat.face_index(row, col);
        const double sf = others[f];
        others.erase(others.begin() + std::ptrdiff_t(f));
        oracle = closed_face_moment<G>(s.genus, others, sf, a, index, c2max);
    } else if (obs_kind == "circle") {
        if (G::tag != GroupTag::U1) config_error("the circle observable has a closed oracle on U1 only");
        const auto circle_level = c.get<std::size_t>("circle_level", level);
        if (circle_level > level || circle_level <= lat.last_saddle_level()) config_error("circle_level must lie in (last saddle, level]");
        auto w = lat.level_circle(circle_level);
        obs = {"circle", circle_level, [w, &lat, index](const GaugeConfig<G>& g) { return G::class_character(index, G::class_angle(holonomy(g, lat, w))); }};
        std::vector<double> rest(lat.areas().begin() + std::ptrdiff_t(circle_level * lat.cols()), lat.areas().end());
        oracle = closed_face_moment<G>(s.genus, rest, lat.area_below(circle_level), a, index, c2max);
    } else {
        config_error("observable must be face or circle");
    }
    c.finish();
    auto x = as_config([&] { return condition_close(lat, a, obs, level, s.samples, s.seed, threads, c2max); });
    Result r;
    r.table.columns = {"observable", "index", "level", "estimate", "stderr", "oracle", "ess_fraction"};
    r.table.add({obs_kind, num(index), num(level), num(x.estimate), num(x.se), num(oracle), num(x.ess_fraction)});
    const double z = x.se > 0.0 ? (x.estimate - oracle) / x.se : INFINITY;
    r.payload["z"] = z;
    r.checks["oracle_within_4se"] = std::abs(z) <= 4.0;
    r.checks["ess_at_least_5pct"] = x.ess_fraction >= 0.05;
    return r;
}

/// Validates the config and runs it. Throws Error(Config) on configuration problems.
inline Result run(Config& c, const Spec& s, unsigned threads)
{
    return with_group(s.group, [&](auto g) -> Result {
        using G = decltype(g);
        if (s.kind == "group-tables") {
            c.finish();
            return group_tables<G>(s);
        }
        if (s.kind == "action-check") return action_check<G>(s, c);
        if (s.kind == "segal") return segal<G>(s, c);
        if (s.kind == "llt") return llt<G>(s, c);
        if (s.kind == "sample") return sample<G>(s, c, threads);
        if (s.kind == "charfun") return charfun<G>(s, c, threads);
        if (s.kind == "norms") return norms<G>(s, c, threads);
        return condition<G>(s, c, threads);
    });
}

} // namespace ym2::cli
