#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nf {

/// Mergeable count/mean/M2 accumulator.
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& other);

    std::int64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double standard_error() const;
    double max() const { return max_; }

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double max_ = -1e308;
};

struct SampleSummary {
    double mean = 0.0;
    double variance = 0.0;       ///< unbiased
    double standard_error = 0.0; ///< of the mean
    double excess_kurtosis = 0.0;
    std::size_t count = 0;
};

SampleSummary summarize(std::span<const double> xs);

/// Pearson correlation; 0 when either sample is constant.
double correlation(std::span<const double> a, std::span<const double> b);

/// 0.5 * sum |p - q| over the common support (shorter vector zero-padded).
double total_variation(std::span<const double> p, std::span<const double> q);

/// Chi-square test of homogeneity for two count histograms over the same
/// categories; sparse categories (expected < 5) are pooled. Returns the p-value.
double chi_square_homogeneity_pvalue(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

/// Survival function of Poisson(mean) at k: P(N > k).
double poisson_tail(double mean, long k);

/// Least-squares slope of log(error) against log(delta) with a residual
/// bootstrap confidence interval.
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
};

RateFit fit_rate(std::span<const double> deltas, std::span<const double> errors, int bootstrap = 2000,
                 std::uint64_t seed = 0, double level = 0.95);

} // namespace nf
