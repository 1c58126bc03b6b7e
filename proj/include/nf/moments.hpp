#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nf/field.hpp"
#include "nf/model.hpp"

namespace nf {

/// Moments of the cell values nu_k at one time.
struct MomentState {
    double t = 0.0;
    Eigen::VectorXd mean;             ///< E nu_k
    Eigen::MatrixXd second;           ///< E nu_i nu_j
    Eigen::VectorXd projected_mean;   ///< E (phi, nu)
    Eigen::VectorXd projected_second; ///< E (phi, nu)^2
};

struct MomentTrajectory {
    std::vector<MomentState> states;
    /// True when a non-affine gain forced the moment closure, or an affine
    /// gain's clamp was active at the mean.
    bool approximate = false;
};

struct MomentOptions {
    double dt = 1e-3;
    int record_every = 1;
    /// Permit the mean-field closure E f(X) ~ f(E X) for non-affine gains.
    bool allow_closure = false;
};

/// Moment ODEs of the jump process nu^n_t (exact for affine gain), RK4.
/// Starts from a deterministic initial count vector with the given mean.
MomentTrajectory moment_odes_markov(const MicroModel& model, const Eigen::VectorXd& theta0_mean, double T,
                                    const std::vector<Profile>& tests, const MomentOptions& opts = {});

enum class NoiseVariant { langevin, linear_noise };

/// Moment ODEs of the Langevin or linear-noise SPDE on the model grid with
/// noise amplitude epsilon. The linear-noise variant integrates the
/// deterministic reference alongside and freezes the diffusion on it.
MomentTrajectory moment_odes_langevin(const GridModel& model, const Field& nu0, double T,
                                      const std::vector<Profile>& tests, double epsilon, NoiseVariant variant,
                                      const MomentOptions& opts = {});

} // namespace nf
