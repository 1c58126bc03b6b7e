#include "nf/spde.hpp"

#include <cmath>
#include <string>

#include "nf/error.hpp"
#include "nf/quadrature.hpp"
#include "nf/rng.hpp"

namespace nf {

namespace {

Eigen::VectorXd reference_on_grid(const Trajectory& reference, const GridModel& model, double t)
{
    Eigen::VectorXd v = reference.values_at(t);
    if (v.size() == model.size())
        return v;
    return restrict_to(Field(reference.grid(), std::move(v)), model.grid_ptr()).values;
}

Eigen::VectorXd diffusion_values(const Eigen::VectorXd& nu, double t, const GridModel& model)
{
    return (nu + model.nemytzkii(nu, t)) / model.tau();
}

double simpson(int steps, double t, const std::function<double(double)>& f)
{
    const int n = steps + (steps % 2);
    const double h = t / n;
    double sum = f(0.0) + f(t);
    for (int i = 1; i < n; ++i)
        sum += (i % 2 ? 4.0 : 2.0) * f(h * i);
    return sum * h / 3.0;
}

enum class Mode { linear_noise, langevin };

// Shared Euler-Maruyama loop; each mode consumes the same normal draws.
std::vector<SpdeTrajectory> integrate(const Field& nu0, const GridModel& model, const Trajectory* reference,
                                      const NoiseSpec& noise, const SpdeOptions& opts, std::uint64_t stream,
                                      const std::vector<Mode>& modes)
{
    if (!(noise.epsilon >= 0.0))
        throw invalid_argument("noise amplitude epsilon must be non-negative");
    if (!(opts.T >= 0.0))
        throw invalid_argument("horizon T must be non-negative");
    if (nu0.size() != model.size())
        throw invalid_argument("initial field does not live on the model grid");
    const double dt = opts.dt > 0.0 ? opts.dt : opts.T / 2048.0;
    const long steps = opts.T > 0.0 ? std::max(1L, static_cast<long>(std::ceil(opts.T / dt - 1e-9))) : 0;
    const double h = steps > 0 ? opts.T / static_cast<double>(steps) : 0.0;
    const double tau = model.tau();
    const int p = model.size();
    const Eigen::VectorXd noise_sd = (h / model.grid().measures().array()).sqrt().matrix();

    Rng rng(noise.seed, stream);
    std::vector<SpdeTrajectory> out(modes.size());
    std::vector<Eigen::VectorXd> u(modes.size(), nu0.values);
    std::vector<Eigen::VectorXd> z(modes.size(), Eigen::VectorXd::Zero(p));
    for (std::size_t m = 0; m < modes.size(); ++m) {
        out[m].grid = model.grid_ptr();
        out[m].times.push_back(0.0);
        out[m].states.push_back(u[m]);
        out[m].noise.push_back(z[m]);
    }

    Eigen::VectorXd dw(p);
    for (long n = 0; n < steps; ++n) {
        const double t = h * static_cast<double>(n);
        for (int k = 0; k < p; ++k)
            dw[k] = rng.normal() * noise_sd[k];
        Eigen::VectorXd g_ref;
        for (std::size_t m = 0; m < modes.size(); ++m) {
            Eigen::VectorXd& um = u[m];
            Eigen::VectorXd fu;
            if (!opts.zero_drift || modes[m] == Mode::langevin)
                fu = model.nemytzkii(um, t);
            Eigen::VectorXd g;
            if (opts.constant_diffusion) {
                g = Eigen::VectorXd::Constant(p, *opts.constant_diffusion);
            } else if (modes[m] == Mode::linear_noise) {
                if (g_ref.size() == 0)
                    g_ref = diffusion_values(reference_on_grid(*reference, model, t), t, model);
                g = g_ref;
            } else {
                g = (um + fu) / tau;
            }
            const Eigen::VectorXd incr = noise.epsilon * g.cwiseMax(0.0).cwiseSqrt().cwiseProduct(dw);
            if (opts.zero_drift)
                um = um + incr;
            else
                um = um + (h / tau) * (fu - um) + incr;
            z[m] += incr;
            if (!um.allFinite())
                throw numeric_error("non-finite SPDE state at t=" + std::to_string(t + h));
        }
        const bool last = n + 1 == steps;
        if (last || (opts.record_every > 0 && (n + 1) % opts.record_every == 0)) {
            for (std::size_t m = 0; m < modes.size(); ++m) {
                out[m].times.push_back(last ? opts.T : h * static_cast<double>(n + 1));
                out[m].states.push_back(u[m]);
                out[m].noise.push_back(z[m]);
            }
        }
    }
    return out;
}

} // namespace

Field diffusion_coefficient(const Field& nu, double t, const GridModel& model)
{
    if (nu.size() != model.size())
        throw invalid_argument("field does not live on the model grid");
    if (nu.size() > 0 && nu.values.minCoeff() < -1e-10)
        throw numeric_error("field value " + std::to_string(nu.values.minCoeff()) +
                            " below the admissible set at t=" + std::to_string(t));
    return {model.grid_ptr(), diffusion_values(nu.values, t, model)};
}

double covariance_form(const Profile& phi, const Profile& psi, double t, const Trajectory& reference,
                       const GridModel& model, int time_steps, int order)
{
    const Partition& grid = model.grid();
    Eigen::VectorXd prod(grid.size());
    for (int k = 0; k < grid.size(); ++k)
        prod[k] = integrate(grid.cell(k), order, [&](const Eigen::VectorXd& x) { return phi(x) * psi(x); });
    Field pf(model.grid_ptr(), prod.cwiseQuotient(grid.measures()));
    return covariance_form(pf, Field(model.grid_ptr(), Eigen::VectorXd::Ones(grid.size())), t, reference, model,
                           time_steps);
}

double covariance_form(const Field& phi, const Field& psi, double t, const Trajectory& reference,
                       const GridModel& model, int time_steps)
{
    if (phi.size() != model.size() || psi.size() != model.size())
        throw invalid_argument("test fields do not live on the model grid");
    if (t < 0.0 || reference.size() == 0 || t > reference.final_time() * (1.0 + 1e-12))
        throw invalid_argument("covariance time " + std::to_string(t) + " beyond the reference trajectory");
    if (t == 0.0)
        return 0.0;
    const Eigen::VectorXd weight = phi.values.cwiseProduct(psi.values).cwiseProduct(model.grid().measures());
    return simpson(std::max(2, time_steps), t, [&](double s) {
        return diffusion_coefficient(Field(model.grid_ptr(), reference_on_grid(reference, model, s)), s, model)
            .values.dot(weight);
    });
}

SpdeTrajectory simulate_linear_noise(const Field& nu0, const GridModel& model, const Trajectory& reference,
                                     const NoiseSpec& noise, const SpdeOptions& opts, std::uint64_t stream)
{
    return integrate(nu0, model, &reference, noise, opts, stream, {Mode::linear_noise}).front();
}

SpdeTrajectory simulate_langevin(const Field& nu0, const GridModel& model, const NoiseSpec& noise,
                                 const SpdeOptions& opts, std::uint64_t stream)
{
    return integrate(nu0, model, nullptr, noise, opts, stream, {Mode::langevin}).front();
}

std::pair<SpdeTrajectory, SpdeTrajectory> simulate_coupled(const Field& nu0, const GridModel& model,
                                                           const Trajectory& reference, const NoiseSpec& noise,
                                                           const SpdeOptions& opts, std::uint64_t stream)
{
    auto both = integrate(nu0, model, &reference, noise, opts, stream, {Mode::linear_noise, Mode::langevin});
    return {std::move(both[0]), std::move(both[1])};
}

} // namespace nf
