#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "nf/field.hpp"
#include "nf/model.hpp"

namespace nf {

/// Unbounded counts (the Wilson-Cowan master equation) or counts capped at
/// l(k) with activation rate (l(k) - theta_k) f_k / tau.
enum class StateSpace { unbounded, bounded };

struct MicroState {
    Eigen::VectorXi theta;
    double t = 0.0;
};

struct JumpEvent {
    double time;
    int population;
    int direction; // +1 activation, -1 deactivation
};

/// Piecewise-constant trajectory of the counts on [0, horizon].
class JumpPath {
public:
    JumpPath(MicroModelPtr model, Eigen::VectorXi theta0, double horizon, StateSpace space);

    const MicroModel& model() const { return *model_; }
    const MicroModelPtr& model_ptr() const { return model_; }
    const Eigen::VectorXi& initial_state() const { return theta0_; }
    double horizon() const { return horizon_; }
    StateSpace state_space() const { return space_; }
    const std::vector<JumpEvent>& events() const { return events_; }

    void push(const JumpEvent& e) { events_.push_back(e); }

    /// Right-continuous state at time t.
    Eigen::VectorXi state_at(double t) const;
    Eigen::VectorXi final_state() const { return state_at(horizon_); }

private:
    MicroModelPtr model_;
    Eigen::VectorXi theta0_;
    double horizon_;
    StateSpace space_;
    std::vector<JumpEvent> events_;
};

/// Per-population activation rates (1/tau) l(k) f_k(theta, t); in the bounded
/// state space (1/tau) (l(k) - theta_k) f_k(theta, t).
Eigen::VectorXd activation_rates(const MicroModel& model, const Eigen::VectorXi& theta, double t,
                                 StateSpace space = StateSpace::unbounded);

/// f_k(theta, t) = f(sum_j Wbar_kj theta_j / l(j) + Ibar_k(t)).
Eigen::VectorXd gain_rates(const MicroModel& model, const Eigen::VectorXi& theta, double t);

/// lambda(theta, t) = (1/tau) sum_k (theta_k + l(k) f_k(theta, t)).
double total_rate(const MicroModel& model, const Eigen::VectorXi& theta, double t,
                  StateSpace space = StateSpace::unbounded);

/// Post-jump law: down[k] = P(theta - e_k), up[k] = P(theta + e_k).
struct TransitionDistribution {
    Eigen::VectorXd down;
    Eigen::VectorXd up;
};

/// Throws ErrorKind::no_transition when lambda = 0.
TransitionDistribution transition_distribution(const MicroModel& model, const Eigen::VectorXi& theta, double t,
                                               StateSpace space = StateSpace::unbounded);

/// Exact sample by thinning: deactivations from exact exponential clocks,
/// activations from candidates at the envelope l(k) ||f||_0 / tau accepted
/// with probability f_k / ||f||_0. Deterministic in (seed, stream).
JumpPath simulate_path(const MicroModelPtr& model, const Eigen::VectorXi& theta0, double T, std::uint64_t seed,
                       std::uint64_t stream = 0);

/// Bounded state space variant; theta0 must satisfy 0 <= theta0 <= l.
JumpPath simulate_path_bounded(const MicroModelPtr& model, const Eigen::VectorXi& theta0, double T,
                               std::uint64_t seed, std::uint64_t stream = 0);

/// Gillespie direct method without thinning; time-independent inputs only.
JumpPath simulate_path_direct(const MicroModelPtr& model, const Eigen::VectorXi& theta0, double T,
                              std::uint64_t seed, std::uint64_t stream = 0,
                              StateSpace space = StateSpace::unbounded);

/// Piecewise-constant field theta_k / l(k).
Field embed(const Eigen::VectorXi& theta, const MicroModel& model);

/// Compensator int_0^t (-nu_s + Fbar(nu_s, s)) / tau ds at each evaluation time,
/// as cell values. Inter-jump integrals are exact for time-independent input
/// and use 4-point Gauss-Legendre otherwise.
std::vector<Eigen::VectorXd> compensator(const JumpPath& path, std::span<const double> eval_times);

/// M_t = nu_t - nu_0 - compensator(t) at the evaluation times.
struct MartingalePath {
    PartitionPtr grid;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;
    double scale = 1.0;

    Field at(std::size_t i) const { return Field(grid, values[i]); }
};

MartingalePath martingale_path(const JumpPath& path, std::span<const double> eval_times);

/// Multiplies values by sqrt(ell_-(n) / v_+(n)) and records the factor.
MartingalePath rescale_martingale(MartingalePath mp, const MicroModel& model);

/// Pathwise int_0^T lambda int ||nu(xi) - nu(theta)||^2 mu(d xi) ds, the
/// predictable quadratic characteristic of the L2-valued martingale.
double quadratic_characteristic(const JumpPath& path);

} // namespace nf
