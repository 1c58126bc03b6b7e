#include "nf/oracle.hpp"

#include <cmath>
#include <string>

#include "nf/error.hpp"
#include "nf/stats.hpp"

namespace nf {

std::size_t OracleResult::index(const Eigen::VectorXi& theta) const
{
    std::size_t idx = 0, stride = 1;
    for (Eigen::Index k = 0; k < theta_max.size(); ++k) {
        if (theta[k] < 0 || theta[k] > theta_max[k])
            return probabilities.size();
        idx += static_cast<std::size_t>(theta[k]) * stride;
        stride *= static_cast<std::size_t>(theta_max[k] + 1);
    }
    return idx;
}

Eigen::VectorXi OracleResult::state(std::size_t index) const
{
    Eigen::VectorXi theta(theta_max.size());
    for (Eigen::Index k = 0; k < theta_max.size(); ++k) {
        const auto base = static_cast<std::size_t>(theta_max[k] + 1);
        theta[k] = static_cast<int>(index % base);
        index /= base;
    }
    return theta;
}

namespace {

// Births-only domination: Theta_k(T) - Theta_k(0) <= Poisson(l(k) ||f|| T / tau).
double tail_bound(const MicroModel& model, const Eigen::VectorXi& theta0, const Eigen::VectorXi& theta_max, double T)
{
    double bound = 0.0;
    for (int k = 0; k < model.populations(); ++k) {
        const double mean = model.l(k) * model.gain().sup_norm() * T / model.tau();
        bound += poisson_tail(mean, theta_max[k] - theta0[k]);
    }
    return std::min(bound, 1.0);
}

} // namespace

OracleResult master_equation_oracle(const MicroModel& model, const Eigen::VectorXi& theta0, double T,
                                    const OracleOptions& opts)
{
    const int p = model.populations();
    if (theta0.size() != p || (p > 0 && theta0.minCoeff() < 0))
        throw invalid_argument("initial counts do not match the model");
    if (!(T >= 0.0))
        throw invalid_argument("horizon T must be non-negative");
    if (!model.grid_model().input().time_independent())
        throw Error(ErrorKind::unsupported, "oracle requires a time-independent input");
    const bool bounded = opts.space == StateSpace::bounded;
    if (bounded && (model.l() - theta0).minCoeff() < 0)
        throw invalid_argument("initial counts exceed population sizes");

    OracleResult res;
    if (opts.theta_max.size() > 0) {
        if (opts.theta_max.size() != p || (opts.theta_max - theta0).minCoeff() < 0)
            throw invalid_argument("truncation level must cover the initial state");
        res.theta_max = opts.theta_max;
    } else if (bounded) {
        res.theta_max = model.l();
    } else {
        res.theta_max = theta0;
        const double per = opts.max_tail / std::max(1, p);
        for (int k = 0; k < p; ++k) {
            const double mean = model.l(k) * model.gain().sup_norm() * T / model.tau();
            while (poisson_tail(mean, res.theta_max[k] - theta0[k]) > per)
                ++res.theta_max[k];
        }
    }
    if (bounded)
        res.theta_max = res.theta_max.cwiseMin(model.l());
    res.tail_bound = bounded && res.theta_max == model.l() ? 0.0 : tail_bound(model, theta0, res.theta_max, T);
    if (res.tail_bound > opts.max_tail)
        throw Error(ErrorKind::truncation, "truncation tail bound " + std::to_string(res.tail_bound) +
                                               " exceeds " + std::to_string(opts.max_tail));

    double states_d = 1.0;
    for (int k = 0; k < p; ++k)
        states_d *= res.theta_max[k] + 1.0;
    if (states_d > static_cast<double>(opts.max_states))
        throw Error(ErrorKind::capacity, "truncated state space has " + std::to_string(states_d) +
                                             " states, above the limit " + std::to_string(opts.max_states));
    const auto states = static_cast<std::size_t>(states_d);
    res.probabilities.assign(states, 0.0);
    const std::size_t start = res.index(theta0);

    if (T == 0.0) {
        res.probabilities[start] = 1.0;
        return res;
    }

    // Per-state rates: births[i * p + k], deaths[i * p + k], and the exit rate q_i.
    std::vector<double> births(states * static_cast<std::size_t>(p)), deaths(births.size()), exit(states);
    std::vector<int> coords(births.size());
    double lambda = 0.0;
    for (std::size_t i = 0; i < states; ++i) {
        const Eigen::VectorXi theta = res.state(i);
        for (int k = 0; k < p; ++k)
            coords[i * p + k] = theta[k];
        const Eigen::VectorXd up = activation_rates(model, theta, 0.0, opts.space);
        double q = 0.0;
        for (int k = 0; k < p; ++k) {
            births[i * p + k] = up[k];
            deaths[i * p + k] = theta[k] / model.tau();
            q += up[k] + theta[k] / model.tau();
        }
        exit[i] = q;
        lambda = std::max(lambda, q);
    }

    std::vector<std::size_t> stride(static_cast<std::size_t>(p));
    std::size_t s = 1;
    for (int k = 0; k < p; ++k) {
        stride[static_cast<std::size_t>(k)] = s;
        s *= static_cast<std::size_t>(res.theta_max[k] + 1);
    }

    if (!(lambda > 0.0)) {
        res.probabilities[start] = 1.0;
        return res;
    }

    // p(T) = sum_n Pois(n; lambda T) v P^n, P = I + Q / lambda, truncated generator.
    const double lt = lambda * T;
    std::vector<double> v(states, 0.0), next(states);
    v[start] = 1.0;
    double cum = 0.0;
    for (long n = 0;; ++n) {
        const double w = std::exp(-lt + static_cast<double>(n) * std::log(lt) - std::lgamma(static_cast<double>(n) + 1.0));
        for (std::size_t i = 0; i < states; ++i)
            res.probabilities[i] += w * v[i];
        cum += w;
        if ((cum > 1.0 - 1e-15 || (static_cast<double>(n) > lt && w < 1e-18)) && static_cast<double>(n) > lt)
            break;
        if (n > static_cast<long>(lt + 50.0 * std::sqrt(lt) + 1000.0))
            break;
        for (std::size_t i = 0; i < states; ++i)
            next[i] = v[i] * (1.0 - exit[i] / lambda);
        for (std::size_t i = 0; i < states; ++i) {
            if (v[i] == 0.0)
                continue;
            for (int k = 0; k < p; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                const int c = coords[i * p + ku];
                if (c > 0)
                    next[i - stride[ku]] += v[i] * deaths[i * p + ku] / lambda;
                if (c < res.theta_max[k])
                    next[i + stride[ku]] += v[i] * births[i * p + ku] / lambda;
                // Births beyond the box leave the truncated chain.
            }
        }
        v.swap(next);
    }
    double total = 0.0;
    for (double x : res.probabilities)
        total += x;
    res.tail = std::max(0.0, 1.0 - total);
    return res;
}

std::vector<std::int64_t> empirical_counts(const OracleResult& oracle, const std::vector<Eigen::VectorXi>& finals)
{
    std::vector<std::int64_t> counts(oracle.probabilities.size() + 1, 0);
    for (const auto& theta : finals)
        ++counts[oracle.index(theta)];
    return counts;
}

} // namespace nf
