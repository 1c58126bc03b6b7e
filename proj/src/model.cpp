#include "nf/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nf/error.hpp"
#include "nf/parallel.hpp"
#include "nf/quadrature.hpp"

namespace nf {

Eigen::MatrixXd discretize_weights(const Kernel& kernel, const Partition& partition, int order)
{
    if (order < 1)
        throw invalid_argument("quadrature order must be >= 1");
    const int p = partition.size();
    Eigen::MatrixXd wbar = Eigen::MatrixXd::Zero(p, p);
    if (kernel.kind() == Kernel::Kind::zero)
        return wbar;
    if (kernel.kind() == Kernel::Kind::constant) {
        const double c = kernel(partition.cell(0).center(), partition.cell(0).center());
        wbar.rowwise() = c * partition.measures().transpose();
        return wbar;
    }

    std::vector<BoxRule> rules;
    rules.reserve(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k)
        rules.push_back(tensor_rule(partition.cell(k), order));

    parallel_for(static_cast<std::size_t>(p), [&](std::size_t ku) {
        const int k = static_cast<int>(ku);
        const BoxRule& rk = rules[ku];
        for (int j = 0; j < p; ++j) {
            const BoxRule& rj = rules[static_cast<std::size_t>(j)];
            double sum = 0.0;
            for (Eigen::Index q = 0; q < rk.weights.size(); ++q) {
                double inner = 0.0;
                for (Eigen::Index r = 0; r < rj.weights.size(); ++r)
                    inner += rj.weights[r] * kernel(rk.points.col(q), rj.points.col(r));
                sum += rk.weights[q] * inner;
            }
            const double v = sum / partition.measures()[k];
            if (!std::isfinite(v))
                throw numeric_error("kernel integral is not finite on cells (" + std::to_string(k) + ", " +
                                    std::to_string(j) + ")");
            wbar(k, j) = v;
        }
    });
    return wbar;
}

Eigen::VectorXd discretize_input(const InputCurrent& input, const Partition& partition, double t, int order)
{
    Eigen::VectorXd out(partition.size());
    for (int k = 0; k < partition.size(); ++k) {
        const double v =
            integrate(partition.cell(k), order, [&](const Eigen::VectorXd& x) { return input(t, x); }) /
            partition.measures()[k];
        if (!std::isfinite(v))
            throw numeric_error("input average is not finite on cell " + std::to_string(k) + " at t=" +
                                std::to_string(t));
        out[k] = v;
    }
    return out;
}

Eigen::VectorXi discrete_initial_condition(const Eigen::VectorXd& cell_averages, const Eigen::VectorXi& l)
{
    if (cell_averages.size() != l.size())
        throw invalid_argument("initial condition and population vector sizes differ");
    Eigen::VectorXi theta(l.size());
    for (Eigen::Index k = 0; k < l.size(); ++k) {
        if (l[k] < 1)
            throw invalid_argument("population sizes must be positive");
        const double a = cell_averages[k];
        const double lk = l[k];
        const int lo = static_cast<int>(std::clamp(std::floor(a * lk), 0.0, lk));
        const int hi = std::min(lo + 1, l[k]);
        theta[k] = std::abs(hi / lk - a) < std::abs(lo / lk - a) ? hi : lo;
    }
    return theta;
}

Eigen::VectorXi discrete_initial_condition(const Profile& nu0, const Partition& partition, const Eigen::VectorXi& l,
                                           int order)
{
    return discrete_initial_condition(cell_integrals(nu0, partition, order).cwiseQuotient(partition.measures()), l);
}

GridModel::GridModel(const MacroModel& macro, PartitionPtr grid, int quadrature_order)
    : GridModel(macro.tau, grid, discretize_weights(macro.kernel, *grid, quadrature_order), macro.gain, macro.input,
                quadrature_order)
{
}

GridModel::GridModel(double tau, PartitionPtr grid, Eigen::MatrixXd weights, GainFunction gain, InputCurrent input,
                     int quadrature_order)
    : tau_(tau), grid_(std::move(grid)), weights_(std::move(weights)), gain_(std::move(gain)),
      input_(std::move(input)), order_(quadrature_order)
{
    if (!(tau_ > 0.0) || !std::isfinite(tau_))
        throw invalid_argument("tau must be positive");
    if (!grid_)
        throw invalid_argument("grid model needs a partition");
    if (weights_.rows() != grid_->size() || weights_.cols() != grid_->size())
        throw invalid_argument("weight matrix dimensions do not match the partition");
    if (input_.is_separable())
        profile_avg_ = cell_integrals(input_.profile(), *grid_, order_).cwiseQuotient(grid_->measures());
}

Eigen::VectorXd GridModel::input_at(double t) const
{
    if (input_.is_separable())
        return profile_avg_ * input_.modulation()(t);
    return discretize_input(input_, *grid_, t, order_);
}

double GridModel::input_at(int k, double t) const
{
    if (input_.is_separable())
        return profile_avg_[k] * input_.modulation()(t);
    const double v =
        integrate(grid_->cell(k), order_, [&](const Eigen::VectorXd& x) { return input_(t, x); });
    return v / grid_->measures()[k];
}

Eigen::VectorXd GridModel::synaptic_input(const Eigen::VectorXd& nu, double t) const
{
    return weights_ * nu + input_at(t);
}

Eigen::VectorXd GridModel::nemytzkii(const Eigen::VectorXd& nu, double t) const
{
    return synaptic_input(nu, t).unaryExpr([this](double z) { return gain_(z); });
}

Eigen::VectorXi PopulationPolicy::sizes(int n, int populations) const
{
    const double raw = kind == Kind::uniform ? value : value * n;
    const long l = std::lround(raw);
    if (l < 1)
        throw invalid_argument("population policy yields l < 1 at n=" + std::to_string(n));
    return Eigen::VectorXi::Constant(populations, static_cast<int>(l));
}

MicroModel::MicroModel(GridModel grid_model, Eigen::VectorXi l) : grid_model_(std::move(grid_model)), l_(std::move(l))
{
    if (l_.size() != grid_model_.size())
        throw invalid_argument("population vector size does not match the partition");
    if (l_.size() == 0 || l_.minCoeff() < 1)
        throw invalid_argument("all population sizes must be >= 1");
}

MicroModelPtr build_micro_model(const MacroModel& macro, int n, const PopulationPolicy& policy, int quadrature_order)
{
    auto grid = make_uniform_partition(macro.domain, n);
    GridModel gm(macro, grid, quadrature_order);
    return std::make_shared<const MicroModel>(std::move(gm), policy.sizes(n, grid->size()));
}

} // namespace nf
