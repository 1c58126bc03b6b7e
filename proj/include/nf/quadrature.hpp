#pragma once

#include <Eigen/Dense>

#include "nf/geometry.hpp"

namespace nf {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    int order() const { return static_cast<int>(nodes.size()); }
};

/// Golub-Welsch construction; cached per order, thread-safe.
const GaussRule& gauss_legendre(int order);

/// Tensor-product rule mapped onto a box: points are columns of `points`.
struct BoxRule {
    Eigen::MatrixXd points;
    Eigen::VectorXd weights;
};

BoxRule tensor_rule(const Box& box, int order);

/// Integrates f(x) over a box with a tensor Gauss-Legendre rule.
template <typename F>
double integrate(const Box& box, int order, F&& f)
{
    const BoxRule rule = tensor_rule(box, order);
    double sum = 0.0;
    for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
        const Eigen::VectorXd x = rule.points.col(q);
        sum += rule.weights[q] * f(x);
    }
    return sum;
}

/// Gauss-Legendre on [a, b] for scalar functions of time.
template <typename F>
double integrate_interval(double a, double b, int order, F&& f)
{
    const GaussRule& g = gauss_legendre(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (int q = 0; q < g.order(); ++q)
        sum += g.weights[q] * f(mid + half * g.nodes[q]);
    return half * sum;
}

} // namespace nf
