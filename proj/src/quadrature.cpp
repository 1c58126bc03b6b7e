#include "nf/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "nf/error.hpp"

namespace nf {

namespace {

GaussRule golub_welsch(int order)
{
    // Jacobi matrix of the Legendre recurrence.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) {
        const double beta = i / std::sqrt(4.0 * i * i - 1.0);
        jacobi(i, i - 1) = beta;
        jacobi(i - 1, i) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussRule rule;
    rule.nodes = eig.eigenvalues();
    rule.weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();

    // One Newton polish per node on P_n for full double accuracy.
    for (int i = 0; i < order; ++i) {
        double x = rule.nodes[i];
        for (int it = 0; it < 3; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = order * (x * p1 - p0) / (x * x - 1.0);
            x -= p1 / dp;
            if (it == 2)
                rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        rule.nodes[i] = x;
    }
    return rule;
}

} // namespace

const GaussRule& gauss_legendre(int order)
{
    if (order < 1)
        throw invalid_argument("quadrature order must be >= 1");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot)
        slot = std::make_unique<GaussRule>(golub_welsch(order));
    return *slot;
}

BoxRule tensor_rule(const Box& box, int order)
{
    const GaussRule& g = gauss_legendre(order);
    const int d = box.dim();
    long count = 1;
    for (int a = 0; a < d; ++a)
        count *= order;
    BoxRule rule{Eigen::MatrixXd(d, count), Eigen::VectorXd(count)};
    const Eigen::VectorXd half = 0.5 * (box.upper - box.lower);
    const Eigen::VectorXd mid = 0.5 * (box.upper + box.lower);
    for (long q = 0; q < count; ++q) {
        long rem = q;
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            const long i = rem % order;
            rem /= order;
            rule.points(a, q) = mid[a] + half[a] * g.nodes[i];
            w *= half[a] * g.weights[i];
        }
        rule.weights[q] = w;
    }
    return rule;
}

} // namespace nf
