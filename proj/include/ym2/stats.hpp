#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ym2 {

/// Pairwise (tree) summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

inline Estimate estimate(std::span<const double> v)
{
    Estimate e;
    e.n = v.size();
    if (v.empty()) return e;
    e.mean = pairwise_sum(v) / double(v.size());
    std::vector<double> d2(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d2[i] = (v[i] - e.mean) * (v[i] - e.mean);
    if (v.size() > 1) e.se = std::sqrt(pairwise_sum(d2) / double(v.size() - 1) / double(v.size()));
    return e;
}

/// Sample covariance of two equally long series and the SE of that covariance.
inline Estimate covariance(std::span<const double> a, std::span<const double> b)
{
    Estimate ma = estimate(a), mb = estimate(b);
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma.mean) * (b[i] - mb.mean);
    return estimate(prod);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

/// Weighted least squares y ~ a + b x with per-point standard errors (sigma <= 0 means unweighted).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> sigma = {})
{
    const std::size_t n = x.size();
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = (sigma.size() == n && sigma[i] > 0.0) ? 1.0 / (sigma[i] * sigma[i]) : 1.0;
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    LineFit f;
    double det = sw * sxx - sx * sx;
    if (det == 0.0) return f;
    f.slope = (sw * sxy - sx * sy) / det;
    f.intercept = (sxx * sy - sx * sxy) / det;
    if (sigma.size() == n) {
        f.slope_se = std::sqrt(sw / det);
    } else if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / double(n - 2) * sw / det);
    }
    return f;
}

} // namespace ym2
