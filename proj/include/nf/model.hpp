#pragma once

#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "nf/field.hpp"
#include "nf/functions.hpp"
#include "nf/geometry.hpp"

namespace nf {

/// Macroscopic data of the neural field: tau * dnu/dt = -nu + f(int w nu + I).
struct MacroModel {
    Domain domain;
    double tau = 1.0;
    Kernel kernel;
    GainFunction gain = GainFunction::constant(0.0);
    InputCurrent input;
};

/// Wbar[k][j] = (1/|D_k|) int_{D_k} int_{D_j} w(x, y) dy dx by tensor Gauss-Legendre.
Eigen::MatrixXd discretize_weights(const Kernel& kernel, const Partition& partition, int order = 8);

/// Cell averages of I(t, .).
Eigen::VectorXd discretize_input(const InputCurrent& input, const Partition& partition, double t,
                                 int order = 8);

/// theta0[k] = argmin_{i in 0..l(k)} |i / l(k) - avg_k(nu0)|, ties to the smaller i.
Eigen::VectorXi discrete_initial_condition(const Eigen::VectorXd& cell_averages, const Eigen::VectorXi& l);
Eigen::VectorXi discrete_initial_condition(const Profile& nu0, const Partition& partition,
                                           const Eigen::VectorXi& l, int order = 8);

/// The field equation discretized on a partition: weights, cell-averaged
/// input, gain and time constant. Shared by the jump process, the
/// deterministic solvers and the SPDE integrators.
class GridModel {
public:
    GridModel(const MacroModel& macro, PartitionPtr grid, int quadrature_order = 8);
    GridModel(double tau, PartitionPtr grid, Eigen::MatrixXd weights, GainFunction gain, InputCurrent input,
              int quadrature_order = 8);

    double tau() const { return tau_; }
    const Partition& grid() const { return *grid_; }
    const PartitionPtr& grid_ptr() const { return grid_; }
    int size() const { return grid_->size(); }
    const Eigen::MatrixXd& weights() const { return weights_; }
    const GainFunction& gain() const { return gain_; }
    const InputCurrent& input() const { return input_; }
    int quadrature_order() const { return order_; }

    /// Ibar(t); exact cell averages for separable inputs.
    Eigen::VectorXd input_at(double t) const;
    double input_at(int k, double t) const;

    /// W nu + Ibar(t)
    Eigen::VectorXd synaptic_input(const Eigen::VectorXd& nu, double t) const;
    /// Discrete Nemytzkii operator F(nu, t)_k = f((W nu)_k + Ibar_k(t)).
    Eigen::VectorXd nemytzkii(const Eigen::VectorXd& nu, double t) const;

private:
    double tau_;
    PartitionPtr grid_;
    Eigen::MatrixXd weights_;
    GainFunction gain_;
    InputCurrent input_;
    int order_;
    Eigen::VectorXd profile_avg_;
};

/// Population sizes l(k) along a ladder of partitions.
struct PopulationPolicy {
    enum class Kind { uniform, proportional } kind = Kind::uniform;
    double value = 1.0;

    /// uniform: l(k) = value; proportional: l(k) = round(value * n).
    Eigen::VectorXi sizes(int n, int populations) const;
};

/// Full specification of the n-th microscopic jump model.
class MicroModel {
public:
    MicroModel(GridModel grid_model, Eigen::VectorXi l);

    const GridModel& grid_model() const { return grid_model_; }
    const Partition& partition() const { return grid_model_.grid(); }
    const PartitionPtr& partition_ptr() const { return grid_model_.grid_ptr(); }
    double tau() const { return grid_model_.tau(); }
    const GainFunction& gain() const { return grid_model_.gain(); }
    int populations() const { return grid_model_.size(); }

    const Eigen::VectorXi& l() const { return l_; }
    int l(int k) const { return l_[k]; }
    int ell_minus() const { return l_.minCoeff(); }
    int ell_plus() const { return l_.maxCoeff(); }
    /// rho = ell_-(n) / v_+(n), the martingale rescaling.
    double rho() const { return ell_minus() / partition().v_plus(); }
    /// epsilon = sqrt(v_+(n) / ell_-(n)) = 1 / sqrt(rho).
    double epsilon() const { return std::sqrt(partition().v_plus() / ell_minus()); }

private:
    GridModel grid_model_;
    Eigen::VectorXi l_;
};

using MicroModelPtr = std::shared_ptr<const MicroModel>;

MicroModelPtr build_micro_model(const MacroModel& macro, int n, const PopulationPolicy& policy,
                                int quadrature_order = 8);

} // namespace nf
