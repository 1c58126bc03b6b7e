#include "nf/stats.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "nf/error.hpp"
#include "nf/rng.hpp"

namespace nf {

void RunningStats::add(double x)
{
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
    max_ = std::max(max_, x);
}

void RunningStats::merge(const RunningStats& other)
{
    if (other.n_ == 0)
        return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double n = static_cast<double>(n_ + other.n_);
    const double d = other.mean_ - mean_;
    mean_ += d * static_cast<double>(other.n_) / n;
    m2_ += other.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(other.n_) / n;
    n_ += other.n_;
    max_ = std::max(max_, other.max_);
}

double RunningStats::standard_error() const
{
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

SampleSummary summarize(std::span<const double> xs)
{
    SampleSummary s;
    s.count = xs.size();
    if (xs.empty())
        return s;
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    s.mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = (x - s.mean) * (x - s.mean);
        m2 += d;
        m4 += d * d;
    }
    if (xs.size() > 1) {
        s.variance = m2 / (n - 1.0);
        s.standard_error = std::sqrt(s.variance / n);
    }
    if (m2 > 0.0)
        s.excess_kurtosis = (m4 / n) / ((m2 / n) * (m2 / n)) - 3.0;
    return s;
}

double correlation(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size())
        throw invalid_argument("correlation needs samples of equal length");
    const SampleSummary sa = summarize(a), sb = summarize(b);
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        cov += (a[i] - sa.mean) * (b[i] - sb.mean);
    const double denom = std::sqrt(sa.variance * sb.variance) * (static_cast<double>(a.size()) - 1.0);
    return denom > 0.0 ? cov / denom : 0.0;
}

double total_variation(std::span<const double> p, std::span<const double> q)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < std::max(p.size(), q.size()); ++i) {
        const double x = i < p.size() ? p[i] : 0.0;
        const double y = i < q.size() ? q[i] : 0.0;
        sum += std::abs(x - y);
    }
    return 0.5 * sum;
}

double chi_square_homogeneity_pvalue(std::span<const std::int64_t> a, std::span<const std::int64_t> b)
{
    if (a.size() != b.size())
        throw invalid_argument("histograms must share categories");
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]);
    }
    if (!(na > 0.0) || !(nb > 0.0))
        throw invalid_argument("histograms must be non-empty");
    const double n = na + nb;

    // Pool sparse categories into one.
    std::vector<std::pair<double, double>> cells;
    double pool_a = 0.0, pool_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double tot = static_cast<double>(a[i] + b[i]);
        if (tot == 0.0)
            continue;
        if (std::min(tot * na / n, tot * nb / n) < 5.0) {
            pool_a += static_cast<double>(a[i]);
            pool_b += static_cast<double>(b[i]);
        } else {
            cells.emplace_back(static_cast<double>(a[i]), static_cast<double>(b[i]));
        }
    }
    if (pool_a + pool_b > 0.0)
        cells.emplace_back(pool_a, pool_b);
    if (cells.size() < 2)
        return 1.0;
    double stat = 0.0;
    for (const auto& [x, y] : cells) {
        const double tot = x + y;
        const double ea = tot * na / n, eb = tot * nb / n;
        stat += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
    }
    const boost::math::chi_squared dist(static_cast<double>(cells.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

double poisson_tail(double mean, long k)
{
    if (k < 0)
        return 1.0;
    if (mean <= 0.0)
        return 0.0;
    // P(N > k) = P(Gamma(k + 1) < mean)
    return boost::math::gamma_p(static_cast<double>(k) + 1.0, mean);
}

namespace {

struct Ols {
    double slope, intercept, se;
};

Ols ols(const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    const double n = static_cast<double>(x.size());
    const double mx = x.mean(), my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    const double slope = ((x.array() - mx) * (y.array() - my)).sum() / sxx;
    const double intercept = my - slope * mx;
    const double rss = (y.array() - intercept - slope * x.array()).square().sum();
    const double se = n > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
    return {slope, intercept, se};
}

double quantile(std::vector<double> v, double p)
{
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < v.size() ? (1.0 - frac) * v[i] + frac * v[i + 1] : v[i];
}

} // namespace

RateFit fit_rate(std::span<const double> deltas, std::span<const double> errors, int bootstrap, std::uint64_t seed,
                 double level)
{
    if (deltas.size() != errors.size())
        throw invalid_argument("ladder and error vectors differ in length");
    if (deltas.size() < 3)
        throw invalid_argument("rate fit needs at least 3 ladder points");
    const auto n = static_cast<Eigen::Index>(deltas.size());
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(deltas[static_cast<std::size_t>(i)] > 0.0) || !(errors[static_cast<std::size_t>(i)] > 0.0))
            throw invalid_argument("rate fit needs positive deltas and errors");
        x[i] = std::log(deltas[static_cast<std::size_t>(i)]);
        y[i] = std::log(errors[static_cast<std::size_t>(i)]);
    }
    if ((x.array() - x.mean()).abs().maxCoeff() < 1e-14)
        throw invalid_argument("degenerate ladder: all deltas coincide");

    const Ols fit = ols(x, y);
    RateFit out{fit.slope, fit.intercept, fit.slope, fit.slope, level};
    const Eigen::VectorXd fitted = (fit.intercept + fit.slope * x.array()).matrix();
    Eigen::VectorXd resid = y - fitted;
    if (fit.se == 0.0 || bootstrap < 1)
        return out;

    // Leverage-adjusted, centred residuals.
    const double mx = x.mean();
    const double sxx = (x.array() - mx).square().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = 1.0 / static_cast<double>(n) + (x[i] - mx) * (x[i] - mx) / sxx;
        resid[i] /= std::sqrt(std::max(1.0 - h, 1e-12));
    }
    resid.array() -= resid.mean();

    // Bootstrap-t: studentized slope statistics from resampled residuals.
    Rng rng(seed, 0x5eedULL);
    std::vector<double> tstats;
    tstats.reserve(static_cast<std::size_t>(bootstrap));
    Eigen::VectorXd yb(n);
    for (int b = 0; b < bootstrap; ++b) {
        for (Eigen::Index i = 0; i < n; ++i)
            yb[i] = fitted[i] + resid[static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n))];
        const Ols fb = ols(x, yb);
        if (fb.se > 0.0)
            tstats.push_back((fb.slope - fit.slope) / fb.se);
    }
    if (tstats.size() < 10)
        return out;
    const double alpha = 1.0 - level;
    out.ci_low = fit.slope - quantile(tstats, 1.0 - alpha / 2.0) * fit.se;
    out.ci_high = fit.slope - quantile(tstats, alpha / 2.0) * fit.se;
    return out;
}

} // namespace nf
