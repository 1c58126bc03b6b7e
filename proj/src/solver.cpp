#include "nf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nf/error.hpp"

namespace nf {

void Trajectory::push(double t, Eigen::VectorXd values)
{
    if (!times_.empty() && !(t > times_.back()))
        throw invalid_argument("trajectory times must be strictly increasing");
    times_.push_back(t);
    values_.push_back(std::move(values));
}

Eigen::VectorXd Trajectory::values_at(double t) const
{
    if (times_.empty())
        throw invalid_argument("empty trajectory");
    const double tol = 1e-12 * std::max(1.0, std::abs(times_.back()));
    if (t < times_.front() - tol || t > times_.back() + tol)
        throw invalid_argument("time " + std::to_string(t) + " outside the trajectory range [" +
                               std::to_string(times_.front()) + ", " + std::to_string(times_.back()) + "]");
    if (t <= times_.front())
        return values_.front();
    if (t >= times_.back())
        return values_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto i = static_cast<std::size_t>(it - times_.begin());
    const double s = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return (1.0 - s) * values_[i - 1] + s * values_[i];
}

Eigen::VectorXd field_rhs(FieldEquation eq, const GridModel& model, const Eigen::VectorXd& nu, double t)
{
    switch (eq) {
    case FieldEquation::wilson_cowan:
        return model.nemytzkii(nu, t) - nu;
    case FieldEquation::amari: {
        const Eigen::VectorXd fnu = nu.unaryExpr([&](double z) { return model.gain()(z); });
        return model.weights() * fnu + model.input_at(t) - nu;
    }
    case FieldEquation::bounded:
        return (1.0 - nu.array()).matrix().cwiseProduct(model.nemytzkii(nu, t)) - nu;
    }
    return nu;
}

Trajectory solve_field(FieldEquation eq, const Field& nu0, const GridModel& model, double T, const SolverConfig& cfg)
{
    if (!(cfg.dt > 0.0))
        throw invalid_argument("solver time step must be positive");
    if (!(T >= 0.0))
        throw invalid_argument("horizon T must be non-negative");
    if (!nu0.grid || nu0.size() != model.size())
        throw invalid_argument("initial field does not live on the model grid");
    if (cfg.record_every < 1)
        throw invalid_argument("record_every must be >= 1");

    const double tau = model.tau();
    const long steps = T > 0.0 ? std::max(1L, static_cast<long>(std::ceil(T / cfg.dt - 1e-9))) : 0;
    const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;

    // Exponential integrator coefficients for L = -1/tau.
    const double z = h / tau;
    const double e = std::exp(-z);
    const double phi1 = -std::expm1(-z);                                        // (1 - e^-z)
    const double phi2 = z > 1e-4 ? (std::expm1(-z) + z) / z : z / 2.0 - z * z / 6.0; // (e^-z - 1 + z) / z

    // Nonlinear part of tau * rhs: rhs + nu.
    auto nonlinear = [&](const Eigen::VectorXd& u, double t) -> Eigen::VectorXd {
        return field_rhs(eq, model, u, t) + u;
    };

    Trajectory traj(model.grid_ptr());
    Eigen::VectorXd u = nu0.values;
    traj.push(0.0, u);
    for (long n = 0; n < steps; ++n) {
        const double t = h * static_cast<double>(n);
        switch (cfg.scheme) {
        case Scheme::exponential: {
            const Eigen::VectorXd nu = nonlinear(u, t);
            const Eigen::VectorXd a = e * u + phi1 * nu;
            u = a + phi2 * (nonlinear(a, t + h) - nu);
            break;
        }
        case Scheme::rk4: {
            const Eigen::VectorXd k1 = field_rhs(eq, model, u, t) / tau;
            const Eigen::VectorXd k2 = field_rhs(eq, model, u + 0.5 * h * k1, t + 0.5 * h) / tau;
            const Eigen::VectorXd k3 = field_rhs(eq, model, u + 0.5 * h * k2, t + 0.5 * h) / tau;
            const Eigen::VectorXd k4 = field_rhs(eq, model, u + h * k3, t + h) / tau;
            u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            break;
        }
        case Scheme::euler:
            u = u + (h / tau) * field_rhs(eq, model, u, t);
            break;
        }
        if (!u.allFinite())
            throw numeric_error("non-finite field value at t=" + std::to_string(t + h));
        if ((n + 1) % cfg.record_every == 0 || n + 1 == steps)
            traj.push(n + 1 == steps ? T : h * static_cast<double>(n + 1), u);
    }
    return traj;
}

Trajectory solve_wilson_cowan(const Field& nu0, const GridModel& model, double T, const SolverConfig& cfg)
{
    return solve_field(FieldEquation::wilson_cowan, nu0, model, T, cfg);
}

Trajectory solve_amari(const Field& nu0, const GridModel& model, double T, const SolverConfig& cfg)
{
    return solve_field(FieldEquation::amari, nu0, model, T, cfg);
}

Trajectory solve_bounded_limit(const Field& nu0, const GridModel& model, double T, const SolverConfig& cfg)
{
    return solve_field(FieldEquation::bounded, nu0, model, T, cfg);
}

Field nemytzkii_apply(const Field& g, double t, const GridModel& model)
{
    if (g.size() != model.size())
        throw invalid_argument("field does not live on the model grid");
    return {model.grid_ptr(), model.nemytzkii(g.values, t)};
}

} // namespace nf
