#include "nf/norms.hpp"

#include <cmath>
#include <numbers>

#include "nf/error.hpp"

namespace nf {

using std::numbers::pi;

double NormSpec::q(int d) const
{
    if (alpha < 0.0)
        throw invalid_argument("norm exponent alpha must be non-negative");
    const double half = 0.5 * d;
    if (std::abs(alpha - half) < 1e-12)
        return 1.0 - 1e-3;
    if (alpha < half)
        return 2.0 * d / (d + 2.0 * alpha);
    return 1.0;
}

namespace {

// Brings two piecewise-constant fields onto a common grid.
std::pair<Field, Field> align(const Field& a, const Field& b)
{
    if (!a.grid || !b.grid)
        throw invalid_argument("fields without a grid");
    if (a.grid == b.grid || (a.size() == b.size() && a.grid->is_uniform() && b.grid->is_uniform() &&
                             a.grid->is_refined_by(*b.grid)))
        return {a, b};
    if (a.size() < b.size() && a.grid->is_refined_by(*b.grid))
        return {a, restrict_to(b, a.grid)};
    if (b.size() < a.size() && b.grid->is_refined_by(*a.grid))
        return {restrict_to(a, b.grid), b};
    if (a.size() == b.size() && (a.grid->measures() - b.grid->measures()).norm() == 0.0) {
        bool same = true;
        for (int k = 0; k < a.size() && same; ++k)
            same = (a.grid->cell(k).lower - b.grid->cell(k).lower).norm() < 1e-14 &&
                   (a.grid->cell(k).upper - b.grid->cell(k).upper).norm() < 1e-14;
        if (same)
            return {a, b};
    }
    throw invalid_argument("fields live on incompatible grids");
}

} // namespace

double l2_error(const Field& a, const Field& b)
{
    const auto [x, y] = align(a, b);
    return std::sqrt((x.values - y.values).array().square().matrix().dot(x.grid->measures()));
}

Eigen::MatrixXd cosine_cell_integrals(const Partition& grid, int modes)
{
    if (grid.dim() != 1)
        throw Error(ErrorKind::unsupported, "dual Sobolev norm is implemented for 1D domains only");
    if (modes < 1)
        throw invalid_argument("number of cosine modes must be >= 1");
    const double a = grid.domain().bounds().lower[0];
    const double L = grid.domain().bounds().upper[0] - a;
    Eigen::MatrixXd c(modes + 1, grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        const double x0 = grid.cell(k).lower[0] - a;
        const double x1 = grid.cell(k).upper[0] - a;
        c(0, k) = (x1 - x0) / std::sqrt(L);
        for (int j = 1; j <= modes; ++j) {
            const double w = j * pi / L;
            c(j, k) = std::sqrt(2.0 / L) * (std::sin(w * x1) - std::sin(w * x0)) / w;
        }
    }
    return c;
}

Eigen::VectorXd dual_sobolev_weights(const Partition& grid, const NormSpec& spec)
{
    if (spec.alpha < 0.0)
        throw invalid_argument("norm exponent alpha must be non-negative");
    const double L = grid.domain().bounds().upper[0] - grid.domain().bounds().lower[0];
    Eigen::VectorXd w(spec.modes + 1);
    for (int j = 0; j <= spec.modes; ++j)
        w[j] = std::pow(1.0 + std::pow(pi * j / L, 2), -spec.alpha);
    return w;
}

double dual_sobolev_error(const Field& a, const Field& b, const NormSpec& spec)
{
    const auto [x, y] = align(a, b);
    const Eigen::VectorXd c = cosine_cell_integrals(*x.grid, spec.modes) * (x.values - y.values);
    return std::sqrt(c.array().square().matrix().dot(dual_sobolev_weights(*x.grid, spec)));
}

} // namespace nf
