#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nf/field.hpp"
#include "nf/model.hpp"

namespace nf {

enum class FieldEquation {
    wilson_cowan, ///< tau nu' = -nu + f(W nu + I)
    amari,        ///< tau nu' = -nu + W f(nu) + I
    bounded,      ///< tau nu' = -nu + (1 - nu) f(W nu + I)
};

enum class Scheme {
    exponential, ///< second-order exponential Runge-Kutta (ETD2RK)
    rk4,
    euler,       ///< forward Euler; matches the noiseless SPDE integrator step for step
};

struct SolverConfig {
    int m = 512;      ///< grid cells per axis when the solver builds its own grid
    double dt = 1e-3;
    Scheme scheme = Scheme::exponential;
    int quadrature_order = 8;
    int record_every = 1;
};

/// Time-indexed field on a fixed grid.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(PartitionPtr grid) : grid_(std::move(grid)) {}

    void push(double t, Eigen::VectorXd values);

    const PartitionPtr& grid() const { return grid_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Eigen::VectorXd>& values() const { return values_; }
    std::size_t size() const { return times_.size(); }
    double final_time() const { return times_.back(); }
    Field final_field() const { return Field(grid_, values_.back()); }

    /// Linear interpolation in time; throws outside the recorded range.
    Eigen::VectorXd values_at(double t) const;
    Field at(double t) const { return Field(grid_, values_at(t)); }

private:
    PartitionPtr grid_;
    std::vector<double> times_;
    std::vector<Eigen::VectorXd> values_;
};

/// Right-hand side of the chosen equation divided out of tau: returns
/// tau * dnu/dt.
Eigen::VectorXd field_rhs(FieldEquation eq, const GridModel& model, const Eigen::VectorXd& nu, double t);

/// Integrates on nu0's grid, which must match the model grid.
Trajectory solve_field(FieldEquation eq, const Field& nu0, const GridModel& model, double T, const SolverConfig& cfg);

Trajectory solve_wilson_cowan(const Field& nu0, const GridModel& model, double T, const SolverConfig& cfg);
Trajectory solve_amari(const Field& nu0, const GridModel& model, double T, const SolverConfig& cfg);
Trajectory solve_bounded_limit(const Field& nu0, const GridModel& model, double T, const SolverConfig& cfg);

/// F(g, t)(x) = f(int w(x, y) g(y) dy + I(t, x)) on g's grid.
Field nemytzkii_apply(const Field& g, double t, const GridModel& model);

} // namespace nf
