#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "nf/error.hpp"
#include "nf/experiments.hpp"
#include "nf/moments.hpp"
#include "nf/norms.hpp"
#include "nf/oracle.hpp"
#include "nf/parallel.hpp"
#include "nf/spde.hpp"
#include "nf/stats.hpp"

using namespace nf;

namespace {

ErrorKind kind_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::invalid_argument;
}

MicroModelPtr small_model(int p, const Eigen::MatrixXd& w, const GainFunction& gain, const Eigen::VectorXi& l,
                          const InputCurrent& input = InputCurrent::zero(), double tau = 1.0)
{
    auto grid = make_uniform_partition(Domain(1), p);
    return std::make_shared<const MicroModel>(GridModel(tau, grid, w, gain, input), l);
}

MicroModelPtr affine_pair()
{
    Eigen::MatrixXd w(2, 2);
    w << 0.2, -0.1, 0.15, 0.1;
    return small_model(2, w, GainFunction::affine(0.5, 0.3, 1.0), Eigen::Vector2i(20, 30),
                       InputCurrent(Profile::constant(0.2)));
}

} // namespace

TEST_CASE("L2 error")
{
    auto g2 = make_uniform_partition(Domain(1), 2);
    const Field a(g2, Eigen::Vector2d(0.25, 0.75));
    CHECK(l2_error(a, a) == 0.0);
    CHECK(l2_error(Field(g2, Eigen::Vector2d(0.3, 0.3)), Field(g2, Eigen::Vector2d(0.8, 0.8))) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(l2_error(a, Field(g2, Eigen::Vector2d(0.5, 0.5))) == doctest::Approx(0.25).epsilon(1e-15));
    // Finer field restricted onto the coarse grid.
    auto g4 = make_uniform_partition(Domain(1), 4);
    CHECK(l2_error(Field(g4, Eigen::Vector4d(0.0, 0.5, 1.0, 0.5)), a) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(l2_error(a, Field(g4, Eigen::Vector4d(0.0, 0.5, 1.0, 0.5))) == doctest::Approx(0.0).epsilon(1e-15));
    auto g3 = make_uniform_partition(Domain(1), 3);
    CHECK(kind_of([&] { l2_error(a, Field(g3, Eigen::Vector3d::Zero())); }) == ErrorKind::invalid_argument);
}

TEST_CASE("dual Sobolev norm")
{
    auto g = make_uniform_partition(Domain(1), 64);
    const Field a = project(Profile::bump(0.8, 0.3, 0.1), g);
    const Field b = project(Profile::sine(0.4, 2.0, 0.2), g);
    CHECK(dual_sobolev_error(a, a, {1.0, 64}) == 0.0);
    const double l2 = l2_error(a, b);
    CHECK(std::abs(dual_sobolev_error(a, b, {0.0, 4096}) - l2) < 1e-3 * l2);
    double prev = 1e300;
    for (double alpha : {0.0, 0.25, 0.5, 1.0, 2.0}) {
        const double v = dual_sobolev_error(a, b, {alpha, 256});
        CHECK(v <= prev);
        prev = v;
    }
    // Cell integrals of e_0 sum to sqrt(L).
    CHECK(cosine_cell_integrals(*g, 4).row(0).sum() == doctest::Approx(1.0).epsilon(1e-14));

    CHECK(NormSpec{0.0}.q(1) == doctest::Approx(2.0));
    CHECK(NormSpec{0.25}.q(1) == doctest::Approx(2.0 / 1.5));
    CHECK(NormSpec{0.5}.q(1) == doctest::Approx(1.0 - 1e-3));
    CHECK(NormSpec{1.0}.q(1) == doctest::Approx(1.0));
    CHECK(NormSpec{0.5}.q(2) == doctest::Approx(4.0 / 3.0));

    auto sq = make_uniform_partition(Domain(Box{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)}), 2);
    const Field z(sq, Eigen::Vector4d::Zero());
    CHECK(kind_of([&] { dual_sobolev_error(z, z, {1.0, 8}); }) == ErrorKind::unsupported);
}

TEST_CASE("master equation oracle")
{
    SUBCASE("pure death is binomial thinning")
    {
        const MicroModelPtr m = small_model(2, Eigen::MatrixXd::Zero(2, 2), GainFunction::constant(0.0),
                                            Eigen::Vector2i(8, 8), InputCurrent::zero(), 1.5);
        const Eigen::Vector2i theta0(6, 3);
        const double T = 0.9;
        const OracleResult res = master_equation_oracle(*m, theta0, T);
        const double p = std::exp(-T / 1.5);
        boost::math::binomial_distribution<> b0(6, p), b1(3, p);
        double worst = 0.0;
        for (std::size_t i = 0; i < res.probabilities.size(); ++i) {
            const Eigen::VectorXi s = res.state(i);
            const double exact = (s[0] <= 6 && s[1] <= 3) ? boost::math::pdf(b0, s[0]) * boost::math::pdf(b1, s[1]) : 0.0;
            worst = std::max(worst, std::abs(res.probabilities[i] - exact));
        }
        CHECK(worst < 1e-8);
    }
    SUBCASE("zero horizon is a point mass")
    {
        const MicroModelPtr m = small_model(1, Eigen::MatrixXd::Zero(1, 1), GainFunction::constant(0.4), Eigen::VectorXi::Constant(1, 5));
        const OracleResult res = master_equation_oracle(*m, Eigen::VectorXi::Constant(1, 2), 0.0);
        CHECK(res.probabilities[res.index(Eigen::VectorXi::Constant(1, 2))] == 1.0);
        double total = 0.0;
        for (double q : res.probabilities)
            total += q;
        CHECK(total == 1.0);
    }
    SUBCASE("capacity and truncation")
    {
        const MicroModelPtr m = small_model(3, Eigen::MatrixXd::Zero(3, 3), GainFunction::constant(0.9), Eigen::Vector3i(50, 50, 50));
        OracleOptions big;
        big.theta_max = Eigen::Vector3i(200, 200, 200);
        CHECK(kind_of([&] { master_equation_oracle(*m, Eigen::Vector3i(1, 1, 1), 1.0, big); }) == ErrorKind::capacity);
        OracleOptions tight;
        tight.theta_max = Eigen::Vector3i(2, 2, 2);
        CHECK(kind_of([&] { master_equation_oracle(*m, Eigen::Vector3i(1, 1, 1), 1.0, tight); }) == ErrorKind::truncation);
    }
    SUBCASE("simulation agrees with the oracle")
    {
        Eigen::MatrixXd w(2, 2);
        w << 0.8, -1.2, 1.5, 0.4;
        const MicroModelPtr m = small_model(2, w, GainFunction::logistic(2.0, -0.5), Eigen::Vector2i(3, 3),
                                            InputCurrent(Profile::constant(0.3)));
        const Eigen::Vector2i theta0(1, 2);
        const OracleResult res = master_equation_oracle(*m, theta0, 1.0);
        CHECK(res.tail <= res.tail_bound + 1e-12);
        const int R = 20000;
        std::vector<Eigen::VectorXi> fin(R);
        parallel_for(R, [&](std::size_t r) { fin[r] = simulate_path(m, theta0, 1.0, 31, r).final_state(); });
        const std::vector<std::int64_t> counts = empirical_counts(res, fin);
        std::vector<double> freq(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            freq[i] = static_cast<double>(counts[i]) / R;
        CHECK(total_variation(freq, res.probabilities) < 0.02);
    }
}

TEST_CASE("rate fits")
{
    const std::vector<double> deltas{0.25, 0.125, 0.0625, 0.03125};
    std::vector<double> lin, quad;
    for (double d : deltas) {
        lin.push_back(3.0 * d);
        quad.push_back(0.7 * d * d);
    }
    CHECK(std::abs(fit_rate(deltas, lin).slope - 1.0) < 1e-10);
    CHECK(std::abs(fit_rate(deltas, quad).slope - 2.0) < 1e-10);

    std::mt19937_64 gen(5);
    std::normal_distribution<double> noise(0.0, 0.1);
    int covered = 0;
    const int reps = 200;
    for (int i = 0; i < reps; ++i) {
        std::vector<double> err;
        for (double d : deltas)
            err.push_back(d * std::exp(noise(gen)));
        const RateFit fit = fit_rate(deltas, err, 1000, static_cast<std::uint64_t>(i));
        CHECK(fit.ci_low <= fit.slope);
        CHECK(fit.slope <= fit.ci_high);
        covered += fit.ci_low <= 1.0 && 1.0 <= fit.ci_high;
    }
    CHECK(covered >= 0.9 * reps);

    CHECK(kind_of([&] { fit_rate(std::vector<double>{0.1, 0.1, 0.1}, std::vector<double>{1, 2, 3}); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { fit_rate(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 2}); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { fit_rate(deltas, std::vector<double>{1, 0, 1, 1}); }) == ErrorKind::invalid_argument);
}

TEST_CASE("statistics helpers")
{
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0, 10.0};
    const SampleSummary s = summarize(xs);
    CHECK(s.mean == doctest::Approx(4.0));
    CHECK(s.variance == doctest::Approx(12.5));
    CHECK(s.standard_error == doctest::Approx(std::sqrt(12.5 / 5)));
    RunningStats a, b, all;
    for (int i = 0; i < 5; ++i) {
        (i < 2 ? a : b).add(xs[i]);
        all.add(xs[i]);
    }
    a.merge(b);
    CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-15));
    CHECK(a.variance() == doctest::Approx(12.5).epsilon(1e-14));
    CHECK(correlation(xs, xs) == doctest::Approx(1.0));
    CHECK(correlation(xs, std::vector<double>(5, 2.0)) == 0.0);
    CHECK(total_variation(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0}) == doctest::Approx(0.5));
    CHECK(poisson_tail(2.0, 0) == doctest::Approx(1.0 - std::exp(-2.0)));
    CHECK(poisson_tail(2.0, 1) == doctest::Approx(1.0 - 3.0 * std::exp(-2.0)));
    const std::vector<std::int64_t> h{500, 300, 200};
    CHECK(chi_square_homogeneity_pvalue(h, h) == doctest::Approx(1.0));
    CHECK(chi_square_homogeneity_pvalue(h, std::vector<std::int64_t>{200, 300, 500}) < 1e-10);
}

TEST_CASE("Markov moment equations")
{
    SUBCASE("constant gain closed form")
    {
        const double b = 0.35, tau = 0.8;
        const MicroModelPtr m = small_model(1, Eigen::MatrixXd::Zero(1, 1), GainFunction::constant(b),
                                            Eigen::VectorXi::Constant(1, 10), InputCurrent::zero(), tau);
        MomentOptions mo;
        mo.dt = 1e-3;
        mo.record_every = 100;
        const MomentTrajectory traj = moment_odes_markov(*m, Eigen::VectorXd::Constant(1, 7.0), 2.0, {Profile::constant(1.0)}, mo);
        CHECK_FALSE(traj.approximate);
        for (const MomentState& st : traj.states) {
            const double e = std::exp(-st.t / tau);
            const double mean = b + (0.7 - b) * e;
            CHECK(std::abs(st.mean[0] - mean) < 1e-8);
            // Var nu = (1/l) int_0^t e^{-2(t-s)/tau} (m_s + b) / tau ds.
            const double var = (b * (1 - e * e) + (0.7 - b) * (e - e * e)) / 10.0;
            CHECK(std::abs(st.second(0, 0) - mean * mean - var) < 1e-8);
        }
    }
    SUBCASE("affine gain against Monte Carlo")
    {
        const MicroModelPtr m = affine_pair();
        const Eigen::Vector2i theta0(4, 20);
        const std::vector<Profile> tests{Profile::constant(1.0), Profile::linear(0.0, 1.0)};
        MomentOptions mo;
        mo.record_every = 1000;
        const MomentTrajectory traj = moment_odes_markov(*m, theta0.cast<double>(), 1.0, tests, mo);
        CHECK_FALSE(traj.approximate);
        const MomentState& fin = traj.states.back();
        REQUIRE(fin.t == 1.0);
        const int R = 20000;
        std::vector<Eigen::VectorXi> out(R);
        parallel_for(R, [&](std::size_t r) { out[r] = simulate_path(m, theta0, 1.0, 41, r).final_state(); });
        Eigen::MatrixXd phibar(2, 2);
        for (int i = 0; i < 2; ++i)
            phibar.row(i) = cell_integrals(tests[i], m->partition()).transpose();
        for (int k = 0; k < 2; ++k) {
            std::vector<double> v(R);
            for (int r = 0; r < R; ++r)
                v[r] = out[r][k] / static_cast<double>(m->l(k));
            const SampleSummary s = summarize(v);
            CHECK(std::abs(s.mean - fin.mean[k]) < 3.0 * s.standard_error);
        }
        for (int i = 0; i < 2; ++i) {
            std::vector<double> sq(R), pr(R);
            for (int r = 0; r < R; ++r) {
                const double p = phibar.row(i).dot(embed(out[r], *m).values);
                pr[r] = p;
                sq[r] = p * p;
            }
            const SampleSummary s2 = summarize(sq), s1 = summarize(pr);
            CHECK(std::abs(s1.mean - fin.projected_mean[i]) < 3.0 * s1.standard_error);
            CHECK(std::abs(s2.mean - fin.projected_second[i]) < 3.0 * s2.standard_error);
        }
    }
    SUBCASE("non-affine gain needs the closure flag")
    {
        const MicroModelPtr m = small_model(1, Eigen::MatrixXd::Constant(1, 1, 0.5), GainFunction::logistic(1.0, 0.0),
                                            Eigen::VectorXi::Constant(1, 10));
        CHECK(kind_of([&] { moment_odes_markov(*m, Eigen::VectorXd::Constant(1, 2.0), 1.0, {}); }) ==
              ErrorKind::closure_required);
        MomentOptions mo;
        mo.allow_closure = true;
        CHECK(moment_odes_markov(*m, Eigen::VectorXd::Constant(1, 2.0), 1.0, {}, mo).approximate);
    }
}

TEST_CASE("SPDE moment equations")
{
    MacroModel mm;
    mm.kernel = Kernel::gaussian(0.4, 0.2);
    mm.gain = GainFunction::affine(0.6, 0.2, 1.0);
    mm.input = InputCurrent(Profile::cosine(0.2, 1.0, 0.3));
    auto g = make_uniform_partition(Domain(1), 8);
    GridModel gm(mm, g);
    const Field nu0 = project(Profile::bump(0.5, 0.5, 0.2, 0.1), g);
    const std::vector<Profile> tests{Profile::constant(1.0), Profile::cosine(1.0, 1.0)};
    MomentOptions mo;
    mo.dt = 1e-3;
    mo.record_every = 100;
    const double eps = 0.1, T = 1.0;

    const MomentTrajectory lan = moment_odes_langevin(gm, nu0, T, tests, eps, NoiseVariant::langevin, mo);
    const MomentTrajectory lin = moment_odes_langevin(gm, nu0, T, tests, eps, NoiseVariant::linear_noise, mo);
    CHECK_FALSE(lan.approximate);
    REQUIRE(lan.states.size() == lin.states.size());
    for (std::size_t i = 0; i < lan.states.size(); ++i) {
        CHECK((lan.states[i].second - lin.states[i].second).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((lan.states[i].mean - lin.states[i].mean).cwiseAbs().maxCoeff() < 1e-10);
    }

    // Mean follows the Wilson-Cowan equation.
    const Trajectory wc = solve_wilson_cowan(nu0, gm, T, {8, 1e-3, Scheme::rk4, 8, 100});
    for (std::size_t i = 0; i < lan.states.size(); ++i)
        CHECK((lan.states[i].mean - wc.values_at(lan.states[i].t)).cwiseAbs().maxCoeff() < 1e-6);

    const MomentTrajectory quiet = moment_odes_langevin(gm, nu0, T, tests, 0.0, NoiseVariant::langevin, mo);
    for (const MomentState& st : quiet.states)
        CHECK((st.second - st.mean * st.mean.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    // Monte Carlo second moment of the Langevin SPDE.
    const int R = 20000;
    std::vector<double> sq(R);
    const Eigen::VectorXd phibar = cell_integrals(tests[1], *g);
    SpdeOptions so;
    so.T = T;
    so.dt = T / 1024;
    parallel_for(R, [&](std::size_t r) {
        const double p = phibar.dot(simulate_langevin(nu0, gm, {eps, 43}, so, r).states.back());
        sq[r] = p * p;
    });
    const SampleSummary s = summarize(sq);
    CHECK(std::abs(s.mean - lan.states.back().projected_second[1]) < 3.0 * s.standard_error);
}

TEST_CASE("reference resolution")
{
    CHECK(reference_resolution({4, 8, 16, 32}, 0) == 128);
    CHECK(reference_resolution({4, 8, 16, 32}, 512) == 512);
    CHECK(reference_resolution({3, 4}, 0) == 24);
    CHECK(reference_resolution({3, 4}, 50) == 60);
}

TEST_CASE("experiments on a silent model")
{
    MacroModel silent;
    silent.gain = GainFunction::constant(0.0);
    LlnOptions lo;
    lo.replicates = 10;
    lo.T = 1.0;
    lo.reference.m = 64;
    lo.reference.dt = 1e-2;
    const LlnReport lln = lln_experiment(silent, lo);
    REQUIRE(lln.rows.size() == 4);
    for (const LadderRow& row : lln.rows) {
        CHECK(row.err_mean == 0.0);
        CHECK(row.qc_mean == 0.0);
    }

    InfiniteTimeOptions io;
    io.replicates = 5;
    io.T = 5.0;
    io.reference.m = 64;
    io.reference.dt = 1e-2;
    const InfiniteTimeReport inf = infinite_time_experiment(silent, io);
    REQUIRE(inf.times.size() == 5);
    CHECK(inf.times.front() == 1.0);
    CHECK(inf.times.back() == 5.0);
    for (double e : inf.err_mean)
        CHECK(e == 0.0);
    CHECK(inf.no_growth);

    CltOptions co;
    co.replicates = 10;
    co.n = 4;
    co.reference.m = 64;
    co.reference.dt = 1e-2;
    co.tests = {{"one", Profile::constant(1.0)}};
    const CltReport clt = clt_experiment(silent, co);
    CHECK(clt.rows.at(0).variance == 0.0);
    CHECK(clt.rows.at(0).mean == 0.0);
    CHECK(clt.rows.at(0).limit_variance == 0.0);
}

TEST_CASE("birth-death martingale variance")
{
    // One population with constant gain b: Var(sqrt(rho) M_T) = 2bT/tau + (m0 - b)(1 - e^{-T/tau}).
    MacroModel mm;
    mm.tau = 1.0;
    mm.gain = GainFunction::constant(0.4);
    CltOptions co;
    co.n = 1;
    co.T = 1.0;
    co.replicates = 4000;
    co.seed = 3;
    co.policy = {PopulationPolicy::Kind::uniform, 50};
    co.nu0 = Profile::constant(0.8);
    co.reference.m = 64;
    co.reference.dt = 1e-3;
    co.tests = {{"one", Profile::constant(1.0)}};
    const CltReport rep = clt_experiment(mm, co);
    const CltRow& row = rep.rows.at(0);
    const double exact = 2 * 0.4 + (0.8 - 0.4) * (1 - std::exp(-1.0));
    CHECK(row.limit_variance == doctest::Approx(exact).epsilon(1e-6));
    CHECK(std::abs(row.variance - exact) < 3.0 * row.variance_ratio_se * exact);
    CHECK(std::abs(row.mean) < 3.0 * row.mean_se);
    CHECK(std::abs(row.increment_correlation) < 3.0 / std::sqrt(4000.0));
}

TEST_CASE("experiment reports do not depend on the thread count")
{
    MacroModel mm;
    mm.kernel = Kernel::gaussian(1.0, 0.2);
    mm.gain = GainFunction::logistic(3.0, -1.0);
    mm.input = InputCurrent(Profile::cosine(0.3, 1.0, 0.2));
    LlnOptions lo;
    lo.ladder = {2, 4, 8};
    lo.replicates = 16;
    lo.T = 0.5;
    lo.seed = 9;
    lo.policy = {PopulationPolicy::Kind::proportional, 4};
    lo.nu0 = Profile::constant(0.3);
    lo.reference.m = 64;
    lo.reference.dt = 1e-2;
    lo.threads = 1;
    const std::string one = lln_experiment(mm, lo).to_json().dump();
    lo.threads = 3;
    CHECK(lln_experiment(mm, lo).to_json().dump() == one);

    CltOptions co;
    co.n = 4;
    co.replicates = 24;
    co.seed = 2;
    co.policy = {PopulationPolicy::Kind::uniform, 16};
    co.nu0 = Profile::constant(0.3);
    co.reference.m = 64;
    co.reference.dt = 1e-2;
    co.tests = {{"cos", Profile::cosine(1.0, 1.0)}};
    co.threads = 1;
    const std::string c1 = clt_experiment(mm, co).to_json().dump();
    co.threads = 4;
    CHECK(clt_experiment(mm, co).to_json().dump() == c1);
}
