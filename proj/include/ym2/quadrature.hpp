#pragma once

#include <cmath>
#include <algorithm>
#include <limits>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"

namespace ym2::quad {

namespace detail {

struct Panel {
    double a, b, value, error, l1;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk_panel(F& f, double a, double b)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    using G = boost::math::quadrature::gauss<double, 30>;
    const auto& x = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double f0 = f(c);
    double k = f0 * wk[0], g = 0.0, l1 = std::abs(f0) * wk[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        double fp = f(c + h * x[i]), fm = f(c - h * x[i]);
        k += (fp + fm) * wk[i];
        l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
        // the 30-point Gauss nodes sit at the odd Kronrod indices
        if (i % 2 == 1) g += (fp + fm) * wg[i / 2];
    }
    double err = std::max(std::abs(k - g), 2.0 * std::numeric_limits<double>::epsilon() * l1);
    return {a, b, h * k, h * err, h * l1};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (61 points) on [a, b]; the tolerance is relative to the L1 mass.
template <class F>
double adaptive(F&& f, double a, double b, double rel_tol = 1e-13, std::size_t max_panels = 4000)
{
    if (b <= a) return 0.0;
    std::priority_queue<detail::Panel> q;
    q.push(detail::gk_panel(f, a, b));
    double value = q.top().value, err = q.top().error, l1 = q.top().l1;
    const double floor = 64.0 * std::numeric_limits<double>::epsilon();
    while (q.size() < max_panels && err > std::max(rel_tol, floor) * l1) {
        auto p = q.top();
        q.pop();
        double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b)) {
            q.push(p);
            break;
        }
        auto l = detail::gk_panel(f, p.a, m), r = detail::gk_panel(f, m, p.b);
        value += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        l1 += l.l1 + r.l1 - p.l1;
        q.push(l);
        q.push(r);
    }
    // re-sum to shed the drift of the running totals
    value = 0.0;
    err = 0.0;
    l1 = 0.0;
    for (; !q.empty(); q.pop()) {
        value += q.top().value;
        err += q.top().error;
        l1 += q.top().l1;
    }
    if (!std::isfinite(value)) fail(ErrorKind::QuadratureFailure, "non-finite integral");
    if (err > 1e3 * std::max(rel_tol, floor) * l1 && err > 1e-14)
        fail(ErrorKind::QuadratureFailure, "error estimate " + std::to_string(err) + " above tolerance on [" +
                                               std::to_string(a) + ", " + std::to_string(b) + "]");
    return value;
}

/// Fixed-order Gauss-Legendre on [a, b].
template <unsigned N = 20, class F>
double gauss(F&& f, double a, double b)
{
    return boost::math::quadrature::gauss<double, N>::integrate(f, a, b);
}

/// Gauss-Legendre nodes and weights on [0, 1].
template <unsigned N>
struct Rule {
    double x[N];
    double w[N];
    Rule()
    {
        using G = boost::math::quadrature::gauss<double, N>;
        const auto& ab = G::abscissa();
        const auto& wt = G::weights();
        unsigned k = 0;
        // boost stores the non-negative half of the symmetric rule
        for (std::size_t i = 0; i < ab.size(); ++i) {
            double xi = ab[i];
            if (xi == 0.0) {
                x[k] = 0.5;
                w[k++] = 0.5 * wt[i];
            } else {
                x[k] = 0.5 * (1.0 - xi);
                w[k++] = 0.5 * wt[i];
                x[k] = 0.5 * (1.0 + xi);
                w[k++] = 0.5 * wt[i];
            }
        }
    }
    static const Rule& get()
    {
        static const Rule r;
        return r;
    }
};

} // namespace ym2::quad
