#include "nf/jump.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nf/error.hpp"
#include "nf/quadrature.hpp"
#include "nf/rng.hpp"

namespace nf {

namespace {

constexpr int kInterJumpOrder = 4;

void check_counts(const MicroModel& model, const Eigen::VectorXi& theta, StateSpace space)
{
    if (theta.size() != model.populations())
        throw invalid_argument("count vector has " + std::to_string(theta.size()) + " entries, model has " +
                               std::to_string(model.populations()) + " populations");
    if (theta.size() > 0 && theta.minCoeff() < 0)
        throw invalid_argument("counts must be non-negative");
    if (space == StateSpace::bounded && (model.l() - theta).minCoeff() < 0)
        throw invalid_argument("counts exceed population sizes in the bounded state space");
}

Eigen::VectorXd fractions(const Eigen::VectorXi& theta, const MicroModel& model)
{
    return theta.cast<double>().cwiseQuotient(model.l().cast<double>());
}

// Tracks nu = theta / l and u = Wbar nu along a path.
struct Walker {
    const MicroModel& model;
    Eigen::VectorXi theta;
    Eigen::VectorXd u;

    Walker(const MicroModel& m, const Eigen::VectorXi& theta0)
        : model(m), theta(theta0), u(m.grid_model().weights() * fractions(theta0, m))
    {
    }

    void apply(int k, int direction)
    {
        theta[k] += direction;
        u.noalias() += model.grid_model().weights().col(k) * (static_cast<double>(direction) / model.l(k));
    }

    double gain(int k, double t) const { return model.gain()(u[k] + model.grid_model().input_at(k, t)); }

    Eigen::VectorXd gains(double t) const
    {
        return (u + model.grid_model().input_at(t)).unaryExpr([this](double z) { return model.gain()(z); });
    }
};

// int_a^b F(nu, s) ds with nu frozen.
Eigen::VectorXd integrate_gains(const Walker& w, double a, double b, bool time_independent)
{
    if (time_independent)
        return (b - a) * w.gains(a);
    const GaussRule& g = gauss_legendre(kInterJumpOrder);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(w.u.size());
    for (int q = 0; q < g.order(); ++q)
        sum += g.weights[q] * w.gains(mid + half * g.nodes[q]);
    return half * sum;
}

JumpPath simulate_thinning(const MicroModelPtr& model, const Eigen::VectorXi& theta0, double T, std::uint64_t seed,
                           std::uint64_t stream, StateSpace space)
{
    if (!model)
        throw invalid_argument("null model");
    check_counts(*model, theta0, space);
    if (!(T >= 0.0))
        throw invalid_argument("horizon T must be non-negative");
    if (!model->grid_model().input().bounded())
        throw Error(ErrorKind::envelope_unavailable, "input current has no declared bound on [0, T]");

    JumpPath path(model, theta0, T, space);
    const MicroModel& m = *model;
    const int p = m.populations();
    const double tau = m.tau();
    const double fmax = m.gain().sup_norm();
    const Eigen::VectorXi& l = m.l();
    Rng rng(seed, stream);
    Walker w(m, theta0);

    long dead_sum = theta0.sum();
    long env_sum = space == StateSpace::bounded ? (l - theta0).sum() : l.sum();
    if (!(fmax > 0.0))
        env_sum = 0;
    // Envelope weights per population: l(k), or l(k) - theta_k when bounded.
    auto env_weight = [&](int k) { return space == StateSpace::bounded ? l[k] - w.theta[k] : l[k]; };

    double t = 0.0;
    for (;;) {
        const double deaths = static_cast<double>(dead_sum) / tau;
        const double births = static_cast<double>(env_sum) * fmax / tau;
        const double lambda = deaths + births;
        if (!(lambda > 0.0))
            break;
        t += rng.exponential(lambda);
        if (t > T)
            break;
        const double r = rng.uniform() * lambda;
        if (r < deaths) {
            long target = std::min(static_cast<long>(r * tau), dead_sum - 1);
            int k = 0;
            for (; k < p - 1; ++k) {
                if (target < w.theta[k])
                    break;
                target -= w.theta[k];
            }
            w.apply(k, -1);
            --dead_sum;
            if (space == StateSpace::bounded)
                ++env_sum;
            path.push({t, k, -1});
        } else {
            long target = std::min(static_cast<long>((r - deaths) * tau / fmax), env_sum - 1);
            int k = 0;
            for (; k < p - 1; ++k) {
                const int wk = env_weight(k);
                if (target < wk)
                    break;
                target -= wk;
            }
            if (rng.uniform() * fmax < w.gain(k, t)) {
                w.apply(k, +1);
                ++dead_sum;
                if (space == StateSpace::bounded)
                    --env_sum;
                path.push({t, k, +1});
            }
        }
    }
    return path;
}

} // namespace

JumpPath::JumpPath(MicroModelPtr model, Eigen::VectorXi theta0, double horizon, StateSpace space)
    : model_(std::move(model)), theta0_(std::move(theta0)), horizon_(horizon), space_(space)
{
}

Eigen::VectorXi JumpPath::state_at(double t) const
{
    Eigen::VectorXi theta = theta0_;
    for (const JumpEvent& e : events_) {
        if (e.time > t)
            break;
        theta[e.population] += e.direction;
    }
    return theta;
}

Eigen::VectorXd gain_rates(const MicroModel& model, const Eigen::VectorXi& theta, double t)
{
    return model.grid_model().nemytzkii(fractions(theta, model), t);
}

Eigen::VectorXd activation_rates(const MicroModel& model, const Eigen::VectorXi& theta, double t, StateSpace space)
{
    check_counts(model, theta, space);
    const Eigen::VectorXd f = gain_rates(model, theta, t);
    const Eigen::VectorXi weight = space == StateSpace::bounded ? Eigen::VectorXi(model.l() - theta) : model.l();
    return weight.cast<double>().cwiseProduct(f) / model.tau();
}

double total_rate(const MicroModel& model, const Eigen::VectorXi& theta, double t, StateSpace space)
{
    return static_cast<double>(theta.sum()) / model.tau() + activation_rates(model, theta, t, space).sum();
}

TransitionDistribution transition_distribution(const MicroModel& model, const Eigen::VectorXi& theta, double t,
                                               StateSpace space)
{
    const Eigen::VectorXd up = activation_rates(model, theta, t, space);
    const Eigen::VectorXd down = theta.cast<double>() / model.tau();
    const double lambda = up.sum() + down.sum();
    if (!(lambda > 0.0))
        throw Error(ErrorKind::no_transition, "total jump rate is zero; state is frozen");
    return {down / lambda, up / lambda};
}

JumpPath simulate_path(const MicroModelPtr& model, const Eigen::VectorXi& theta0, double T, std::uint64_t seed,
                       std::uint64_t stream)
{
    return simulate_thinning(model, theta0, T, seed, stream, StateSpace::unbounded);
}

JumpPath simulate_path_bounded(const MicroModelPtr& model, const Eigen::VectorXi& theta0, double T,
                               std::uint64_t seed, std::uint64_t stream)
{
    return simulate_thinning(model, theta0, T, seed, stream, StateSpace::bounded);
}

JumpPath simulate_path_direct(const MicroModelPtr& model, const Eigen::VectorXi& theta0, double T,
                              std::uint64_t seed, std::uint64_t stream, StateSpace space)
{
    if (!model)
        throw invalid_argument("null model");
    check_counts(*model, theta0, space);
    if (!model->grid_model().input().time_independent())
        throw Error(ErrorKind::unsupported, "direct method requires a time-independent input");

    JumpPath path(model, theta0, T, space);
    const MicroModel& m = *model;
    const int p = m.populations();
    const double tau = m.tau();
    Rng rng(seed, stream);
    Walker w(m, theta0);
    Eigen::VectorXd rates(2 * p);

    double t = 0.0;
    for (;;) {
        const Eigen::VectorXd f = w.gains(0.0);
        for (int k = 0; k < p; ++k) {
            rates[k] = w.theta[k] / tau;
            const int weight = space == StateSpace::bounded ? m.l(k) - w.theta[k] : m.l(k);
            rates[p + k] = weight * f[k] / tau;
        }
        const double lambda = rates.sum();
        if (!(lambda > 0.0))
            break;
        t += rng.exponential(lambda);
        if (t > T)
            break;
        double r = rng.uniform() * lambda;
        int i = 0;
        for (; i < 2 * p - 1; ++i) {
            if (r < rates[i] && rates[i] > 0.0)
                break;
            r -= rates[i];
        }
        // Guard against rounding selecting a zero-rate slot at the end.
        while (rates[i] <= 0.0 && i > 0)
            --i;
        const int k = i % p;
        const int dir = i < p ? -1 : +1;
        w.apply(k, dir);
        path.push({t, k, dir});
    }
    return path;
}

Field embed(const Eigen::VectorXi& theta, const MicroModel& model)
{
    return {model.partition_ptr(), fractions(theta, model)};
}

std::vector<Eigen::VectorXd> compensator(const JumpPath& path, std::span<const double> eval_times)
{
    const MicroModel& m = path.model();
    const bool ti = m.grid_model().input().time_independent();
    const double tau = m.tau();
    for (std::size_t i = 1; i < eval_times.size(); ++i)
        if (eval_times[i] < eval_times[i - 1])
            throw invalid_argument("evaluation times must be non-decreasing");

    Walker w(m, path.initial_state());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m.populations());
    auto advance = [&](double a, double b) {
        if (b > a)
            acc += (integrate_gains(w, a, b, ti) - (b - a) * fractions(w.theta, m)) / tau;
    };

    std::vector<Eigen::VectorXd> out;
    out.reserve(eval_times.size());
    const auto& events = path.events();
    std::size_t i = 0;
    double c = 0.0;
    for (double te : eval_times) {
        if (te < 0.0 || te > path.horizon() * (1.0 + 1e-12))
            throw invalid_argument("evaluation time " + std::to_string(te) + " outside [0, T]");
        while (i < events.size() && events[i].time <= te) {
            advance(c, events[i].time);
            c = events[i].time;
            w.apply(events[i].population, events[i].direction);
            ++i;
        }
        advance(c, te);
        c = std::max(c, te);
        out.push_back(acc);
    }
    return out;
}

MartingalePath martingale_path(const JumpPath& path, std::span<const double> eval_times)
{
    const MicroModel& m = path.model();
    const std::vector<Eigen::VectorXd> comp = compensator(path, eval_times);
    MartingalePath mp;
    mp.grid = m.partition_ptr();
    mp.times.assign(eval_times.begin(), eval_times.end());
    const Eigen::VectorXd nu0 = fractions(path.initial_state(), m);

    // States at the (sorted) evaluation times in one sweep.
    Eigen::VectorXi theta = path.initial_state();
    const auto& events = path.events();
    std::size_t i = 0;
    for (std::size_t j = 0; j < eval_times.size(); ++j) {
        while (i < events.size() && events[i].time <= eval_times[j]) {
            theta[events[i].population] += events[i].direction;
            ++i;
        }
        mp.values.push_back(fractions(theta, m) - nu0 - comp[j]);
    }
    return mp;
}

MartingalePath rescale_martingale(MartingalePath mp, const MicroModel& model)
{
    const double factor = std::sqrt(model.rho());
    for (auto& v : mp.values)
        v *= factor;
    mp.scale *= factor;
    return mp;
}

double quadratic_characteristic(const JumpPath& path)
{
    const MicroModel& m = path.model();
    const bool ti = m.grid_model().input().time_independent();
    const double tau = m.tau();
    const Eigen::VectorXd l = m.l().cast<double>();
    // Squared L2 norm of a single jump in population k.
    const Eigen::VectorXd jump2 = m.partition().measures().cwiseQuotient(l.cwiseProduct(l));

    Walker w(m, path.initial_state());
    double total = 0.0;
    auto advance = [&](double a, double b) {
        if (!(b > a))
            return;
        Eigen::VectorXd birth = integrate_gains(w, a, b, ti);
        if (path.state_space() == StateSpace::bounded)
            birth = birth.cwiseProduct((m.l() - w.theta).cast<double>());
        else
            birth = birth.cwiseProduct(l);
        const Eigen::VectorXd death = (b - a) * w.theta.cast<double>();
        total += (birth + death).dot(jump2) / tau;
    };
    double c = 0.0;
    for (const JumpEvent& e : path.events()) {
        advance(c, e.time);
        c = e.time;
        w.apply(e.population, e.direction);
    }
    advance(c, path.horizon());
    return total;
}

} // namespace nf
