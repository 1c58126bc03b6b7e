#include "nf/field.hpp"

#include <cmath>

#include "nf/error.hpp"
#include "nf/quadrature.hpp"

namespace nf {

Eigen::VectorXd cell_integrals(const Profile& phi, const Partition& grid, int order)
{
    Eigen::VectorXd out(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        if (phi.kind() == Profile::Kind::zero)
            out[k] = 0.0;
        else if (phi.kind() == Profile::Kind::constant)
            out[k] = phi(grid.cell(k).center()) * grid.measures()[k];
        else
            out[k] = integrate(grid.cell(k), order, [&](const Eigen::VectorXd& x) { return phi(x); });
    }
    return out;
}

Field project(const Profile& phi, PartitionPtr grid, int order)
{
    Eigen::VectorXd v = cell_integrals(phi, *grid, order).cwiseQuotient(grid->measures());
    return {std::move(grid), std::move(v)};
}

Field sample(const Profile& phi, const PartitionPtr& grid)
{
    Eigen::VectorXd v(grid->size());
    for (int k = 0; k < grid->size(); ++k)
        v[k] = phi(grid->cell(k).center());
    return {grid, std::move(v), Field::Representation::nodal};
}

double l2_norm(const Field& f)
{
    return std::sqrt(f.values.array().square().matrix().dot(f.grid->measures()));
}

double inner(const Field& f, const Profile& phi, int order)
{
    return f.values.dot(cell_integrals(phi, *f.grid, order));
}

Field restrict_to(const Field& fine, const PartitionPtr& coarse)
{
    if (fine.grid == coarse || fine.grid->size() == coarse->size())
        return {coarse, fine.values, fine.representation};
    const std::vector<int> parent = coarse->parent_map(*fine.grid);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(coarse->size());
    const Eigen::VectorXd& m = fine.grid->measures();
    for (int j = 0; j < fine.size(); ++j)
        sum[parent[static_cast<std::size_t>(j)]] += fine.values[j] * m[j];
    return {coarse, sum.cwiseQuotient(coarse->measures())};
}

} // namespace nf
