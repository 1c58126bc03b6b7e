#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "nf/field.hpp"
#include "nf/model.hpp"
#include "nf/solver.hpp"

namespace nf {

/// Per-cell cylindrical noise of amplitude epsilon.
struct NoiseSpec {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

struct SpdeOptions {
    double T = 1.0;
    double dt = 0.0; ///< 0 selects T / 2048
    int record_every = 0; ///< 0 records only the initial and final states
    /// Test mode: drop the drift term.
    bool zero_drift = false;
    /// Test mode: replace g(t, x) by a constant.
    std::optional<double> constant_diffusion;
};

/// Recorded states and the accumulated stochastic-integral term Z.
struct SpdeTrajectory {
    PartitionPtr grid;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> noise;

    Field final_field() const { return Field(grid, states.back()); }
};

/// g(t, x) = (1/tau) [nu(t, x) + F(nu, t)(x)]. Throws a numeric error when nu
/// falls below -1e-10.
Field diffusion_coefficient(const Field& nu, double t, const GridModel& model);

/// <C(t) phi, psi> = int_0^t int_D phi g(s, .) psi dx ds, composite Simpson in
/// time with `time_steps` subintervals (rounded up to even) and Gauss-Legendre
/// in space.
double covariance_form(const Profile& phi, const Profile& psi, double t, const Trajectory& reference,
                       const GridModel& model, int time_steps = 1024, int order = 8);
/// Piecewise-constant test fields on the reference grid.
double covariance_form(const Field& phi, const Field& psi, double t, const Trajectory& reference,
                       const GridModel& model, int time_steps = 1024);

/// Euler-Maruyama for dU = tau^-1 (-U + F(U, t)) dt + eps sqrt(g(nu(t))) dW,
/// diffusion frozen along the reference; increments N(0, dt / |D_k|) per cell.
SpdeTrajectory simulate_linear_noise(const Field& nu0, const GridModel& model, const Trajectory& reference,
                                     const NoiseSpec& noise, const SpdeOptions& opts, std::uint64_t stream = 0);

/// Same scheme with g evaluated at the current state, clamped at 0 before the root.
SpdeTrajectory simulate_langevin(const Field& nu0, const GridModel& model, const NoiseSpec& noise,
                                 const SpdeOptions& opts, std::uint64_t stream = 0);

/// Drives linear-noise and Langevin integrators with the same increments.
std::pair<SpdeTrajectory, SpdeTrajectory> simulate_coupled(const Field& nu0, const GridModel& model,
                                                           const Trajectory& reference, const NoiseSpec& noise,
                                                           const SpdeOptions& opts, std::uint64_t stream = 0);

} // namespace nf
