#include "nf/moments.hpp"

#include <cmath>

#include "nf/error.hpp"

namespace nf {

namespace {

// Affine model of the mean gain around m: F(nu) ~ J nu + c.
struct Linearization {
    Eigen::MatrixXd J;
    Eigen::VectorXd c;
    Eigen::VectorXd F;
    bool clamped = false;
};

Linearization linearize(const GridModel& model, const Eigen::VectorXd& m, double t)
{
    const Eigen::VectorXd u = model.synaptic_input(m, t);
    const GainFunction& f = model.gain();
    Linearization lin;
    lin.F = u.unaryExpr([&](double z) { return f(z); });
    Eigen::VectorXd slope(u.size());
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        slope[k] = f.derivative(u[k]);
        if (f.kind() == GainFunction::Kind::affine) {
            const double v = f.affine_slope() * u[k] + f.affine_intercept();
            if (v < 0.0 || v > f.sup_norm())
                lin.clamped = true;
        }
    }
    lin.J = slope.asDiagonal() * model.weights();
    lin.c = lin.F - lin.J * m;
    return lin;
}

struct State {
    Eigen::VectorXd m;
    Eigen::MatrixXd S;
    Eigen::VectorXd ref; // linear-noise reference, empty otherwise

    State operator+(const State& o) const
    {
        return {m + o.m, S + o.S, ref.size() ? Eigen::VectorXd(ref + o.ref) : ref};
    }
    State operator*(double a) const { return {a * m, a * S, ref.size() ? Eigen::VectorXd(a * ref) : ref}; }
};

struct Integrator {
    const GridModel& model;
    // Noise intensity per cell: diag term = noise_scale[k] * (x_k + F_k(x)) / tau.
    Eigen::VectorXd noise_scale;
    bool linear_noise = false;
    bool clamped = false;

    State rhs(const State& s, double t)
    {
        const double tau = model.tau();
        const Linearization lin = linearize(model, s.m, t);
        clamped = clamped || lin.clamped;
        State d;
        d.m = (lin.F - s.m) / tau;
        Eigen::MatrixXd ds = s.S * lin.J.transpose() + s.m * lin.c.transpose() - s.S;
        ds += ds.transpose().eval();
        Eigen::VectorXd g = s.m + lin.F;
        if (linear_noise) {
            d.ref = (model.nemytzkii(s.ref, t) - s.ref) / tau;
            g = s.ref + model.nemytzkii(s.ref, t);
        }
        ds.diagonal() += noise_scale.cwiseProduct(g);
        d.S = ds / tau;
        return d;
    }
};

MomentState snapshot(double t, const State& s, const Eigen::MatrixXd& phibar)
{
    MomentState out;
    out.t = t;
    out.mean = s.m;
    out.second = s.S;
    out.projected_mean = phibar * s.m;
    out.projected_second = (phibar * s.S * phibar.transpose()).diagonal();
    return out;
}

MomentTrajectory run(Integrator& integ, State s, double T, const std::vector<Profile>& tests,
                     const MomentOptions& opts)
{
    if (!(opts.dt > 0.0))
        throw invalid_argument("moment time step must be positive");
    if (opts.record_every < 1)
        throw invalid_argument("record_every must be >= 1");
    const Partition& grid = integ.model.grid();
    Eigen::MatrixXd phibar(static_cast<Eigen::Index>(tests.size()), grid.size());
    for (std::size_t i = 0; i < tests.size(); ++i)
        phibar.row(static_cast<Eigen::Index>(i)) = cell_integrals(tests[i], grid, integ.model.quadrature_order());

    const long steps = T > 0.0 ? std::max(1L, static_cast<long>(std::ceil(T / opts.dt - 1e-9))) : 0;
    const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;
    MomentTrajectory traj;
    traj.states.push_back(snapshot(0.0, s, phibar));
    for (long n = 0; n < steps; ++n) {
        const double t = h * static_cast<double>(n);
        const State k1 = integ.rhs(s, t);
        const State k2 = integ.rhs(s + k1 * (0.5 * h), t + 0.5 * h);
        const State k3 = integ.rhs(s + k2 * (0.5 * h), t + 0.5 * h);
        const State k4 = integ.rhs(s + k3 * h, t + h);
        s = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if (!s.m.allFinite() || !s.S.allFinite())
            throw numeric_error("non-finite moment at t=" + std::to_string(t + h));
        if ((n + 1) % opts.record_every == 0 || n + 1 == steps)
            traj.states.push_back(snapshot(n + 1 == steps ? T : t + h, s, phibar));
    }
    return traj;
}

void require_closure(const GainFunction& gain, const MomentOptions& opts)
{
    if (!gain.is_affine() && !opts.allow_closure)
        throw Error(ErrorKind::closure_required,
                    "moment equations are exact only for affine gain; " + gain.describe() +
                        " needs the closure flag");
}

} // namespace

MomentTrajectory moment_odes_markov(const MicroModel& model, const Eigen::VectorXd& theta0_mean, double T,
                                    const std::vector<Profile>& tests, const MomentOptions& opts)
{
    require_closure(model.gain(), opts);
    if (theta0_mean.size() != model.populations())
        throw invalid_argument("initial mean has the wrong number of populations");
    Integrator integ{model.grid_model(), model.l().cast<double>().cwiseInverse()};
    State s;
    s.m = theta0_mean.cwiseQuotient(model.l().cast<double>());
    s.S = s.m * s.m.transpose();
    MomentTrajectory traj = run(integ, std::move(s), T, tests, opts);
    traj.approximate = !model.gain().is_affine() || integ.clamped;
    return traj;
}

MomentTrajectory moment_odes_langevin(const GridModel& model, const Field& nu0, double T,
                                      const std::vector<Profile>& tests, double epsilon, NoiseVariant variant,
                                      const MomentOptions& opts)
{
    require_closure(model.gain(), opts);
    if (!(epsilon >= 0.0))
        throw invalid_argument("noise amplitude epsilon must be non-negative");
    if (nu0.size() != model.size())
        throw invalid_argument("initial field does not live on the model grid");
    Integrator integ{model, (epsilon * epsilon) * model.grid().measures().cwiseInverse()};
    integ.linear_noise = variant == NoiseVariant::linear_noise;
    State s;
    s.m = nu0.values;
    s.S = s.m * s.m.transpose();
    if (integ.linear_noise)
        s.ref = nu0.values;
    MomentTrajectory traj = run(integ, std::move(s), T, tests, opts);
    traj.approximate = !model.gain().is_affine() || integ.clamped;
    return traj;
}

} // namespace nf
