// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "nf/experiments.hpp"
#include "nf/moments.hpp"
#include "nf/oracle.hpp"
#include "nf/parallel.hpp"
#include "nf/spde.hpp"

using namespace nf;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

MacroModel standard_model()
{
    MacroModel mm;
    mm.tau = 1.0;
    mm.kernel = Kernel::gaussian(2.0, 0.1);
    mm.gain = GainFunction::logistic(4.0, -1.0);
    mm.input = InputCurrent(Profile::cosine(0.5, 1.0, 0.2));
    return mm;
}

const Profile kInitial = Profile::bump(0.6, 0.3, 0.1, 0.1);

LlnOptions standard_ladder()
{
    LlnOptions o;
    o.ladder = {4, 8, 16, 32};
    o.replicates = 200;
    o.T = 2.0;
    o.seed = 2024;
    o.policy = {PopulationPolicy::Kind::proportional, 4.0};
    o.nu0 = kInitial;
    return o;
}

std::string ladder_summary(const LlnReport& rep)
{
    std::string s = "err";
    for (const LadderRow& r : rep.rows)
        s += " " + fmt("%.4g", r.err_mean) + "(" + fmt("%.2g", r.err_se) + ")";
    return s + ", slope " + fmt("%.3f", rep.fit.slope);
}

Outcome oracle_equivalence()
{
    Eigen::MatrixXd w(2, 2);
    w << 0.8, -1.2, 1.5, 0.4;
    auto grid = make_uniform_partition(Domain(1), 2);
    const auto model = std::make_shared<const MicroModel>(
        GridModel(1.0, grid, w, GainFunction::logistic(2.0, -0.5), InputCurrent(Profile::constant(0.3))),
        Eigen::Vector2i(3, 3));
    const Eigen::Vector2i theta0(1, 2);
    const OracleResult res = master_equation_oracle(*model, theta0, 1.0);
    const int R = 100000;
    std::vector<Eigen::VectorXi> finals(R);
    parallel_for(R, [&](std::size_t r) { finals[r] = simulate_path(model, theta0, 1.0, 7, r).final_state(); });
    const std::vector<std::int64_t> counts = empirical_counts(res, finals);
    std::vector<double> freq(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        freq[i] = static_cast<double>(counts[i]) / R;
    const double tv = total_variation(freq, res.probabilities);
    return {tv < 0.02, "TV " + fmt("%.4f", tv) + " < 0.02 over " + std::to_string(res.probabilities.size()) +
                           " states, tail bound " + fmt("%.1e", res.tail_bound)};
}

// The three ladders are computed once and shared by the LLN, bound and bounded-variant checks.
struct LadderRuns {
    LlnReport standard, frozen, bounded;
};

const LadderRuns& ladders()
{
    static const LadderRuns runs = [] {
        LadderRuns r;
        const MacroModel mm = standard_model();
        r.standard = lln_experiment(mm, standard_ladder());
        LlnOptions frozen = standard_ladder();
        frozen.policy = {PopulationPolicy::Kind::uniform, 16.0};
        frozen.norm = {1.0, 256};
        r.frozen = lln_experiment(mm, frozen);
        LlnOptions bounded = standard_ladder();
        bounded.space = StateSpace::bounded;
        r.bounded = lln_experiment(mm, bounded);
        return r;
    }();
    return runs;
}

Outcome lln_trend(const LlnReport& rep)
{
    const bool slope_ok = rep.fit.slope >= 0.4 && rep.fit.slope <= 1.2;
    return {rep.strictly_decreasing && slope_ok,
            ladder_summary(rep) + (rep.strictly_decreasing ? ", decreasing" : ", NOT decreasing") +
                (slope_ok ? "" : ", slope outside [0.4, 1.2]")};
}

Outcome frozen_population_ladder()
{
    const LlnReport& rep = ladders().frozen;
    return {rep.strictly_decreasing,
            "l = 16, H^-1: " + ladder_summary(rep) + (rep.strictly_decreasing ? ", decreasing" : ", NOT decreasing")};
}

Outcome martingale_bound()
{
    double worst = 0.0;
    bool ok = true;
    for (const LlnReport* rep : {&ladders().standard, &ladders().frozen, &ladders().bounded}) {
        ok = ok && rep->quadratic_bound_holds;
        for (const LadderRow& r : rep->rows)
            worst = std::max(worst, r.qc_mean / r.qc_bound);
    }
    return {ok, "max qc_mean / bound " + fmt("%.3f", worst) + " <= 1.05 over 12 ladder points"};
}

Outcome mean_bound()
{
    double worst = -1e300;
    for (const LadderRow& r : ladders().standard.rows)
        worst = std::max(worst, r.mean_bound_margin);
    return {ladders().standard.mean_bound_holds,
            "max over checkpoints of E Theta - l(1 + ||f||) - 3 SE: " + fmt("%.4g", worst)};
}

Outcome clt_covariance()
{
    CltOptions o;
    o.n = 32;
    o.T = 1.0;
    o.replicates = 2000;
    o.seed = 11;
    o.policy = {PopulationPolicy::Kind::uniform, 128.0};
    o.nu0 = kInitial;
    o.tests = {{"1", Profile::constant(1.0)},
               {"cos(pi x)", Profile::cosine(1.0, 1.0)},
               {"cos(2 pi x)", Profile::cosine(1.0, 2.0)}};
    const CltReport rep = clt_experiment(standard_model(), o);
    const double corr_limit = 3.0 / std::sqrt(static_cast<double>(o.replicates));
    bool ok = true;
    std::string detail;
    for (const CltRow& r : rep.rows) {
        const bool row_ok = r.variance_ratio >= 0.85 && r.variance_ratio <= 1.15 &&
                            std::abs(r.mean) < 3.0 * r.mean_se && std::abs(r.excess_kurtosis) < 0.3 &&
                            std::abs(r.increment_correlation) < corr_limit;
        ok = ok && row_ok;
        detail += (detail.empty() ? "" : "; ") + r.name + ": ratio " + fmt("%.3f", r.variance_ratio) + ", mean/SE " +
                  fmt("%.2f", r.mean / r.mean_se) + ", kurt " + fmt("%.3f", r.excess_kurtosis) + ", corr " +
                  fmt("%.3f", r.increment_correlation);
    }
    return {ok, detail};
}

Outcome deterministic_solver()
{
    const MacroModel mm = standard_model();
    const double T = 2.0;
    auto final_state = [&](int m, double dt) {
        auto g = make_uniform_partition(Domain(1), m);
        GridModel gm(mm, g);
        return solve_wilson_cowan(project(kInitial, g), gm, T, {m, dt, Scheme::exponential, 8, 1 << 30})
            .final_field();
    };
    std::vector<double> dts, dt_err, hs, h_err;
    for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
        dts.push_back(dt);
        dt_err.push_back(l2_error(final_state(64, dt), final_state(64, dt / 2)));
    }
    for (int m : {8, 16, 32, 64}) {
        hs.push_back(1.0 / m);
        h_err.push_back(l2_error(final_state(m, 1e-2), final_state(2 * m, 1e-2)));
    }
    const double p_dt = fit_rate(dts, dt_err).slope;
    const double p_h = fit_rate(hs, h_err).slope;

    // Pointwise bounds along full trajectories from admissible initial data.
    auto g = make_uniform_partition(Domain(1), 128);
    GridModel gm(mm, g);
    const double sup = mm.gain.sup_norm();
    double lo = 1e300, hi = -1e300;
    for (const Profile& p : {Profile::zero(), Profile::constant(sup), kInitial, Profile::sine(0.5, 5.0, 0.5)}) {
        const Trajectory tr = solve_wilson_cowan(project(p, g), gm, 5.0, {128, 1e-2, Scheme::exponential, 8, 1});
        for (const auto& v : tr.values()) {
            lo = std::min(lo, v.minCoeff());
            hi = std::max(hi, v.maxCoeff());
        }
    }
    const bool bounds = lo >= -1e-12 && hi <= sup + 1e-12;
    return {p_dt >= 1.8 && p_h >= 1.8 && bounds, "order dt " + fmt("%.3f", p_dt) + ", grid " + fmt("%.3f", p_h) +
                                                     ", range [" + fmt("%.3g", lo) + ", " + fmt("%.6g", hi) + "]"};
}

Outcome spde_moments()
{
    MacroModel mm;
    mm.kernel = Kernel::gaussian(0.4, 0.2);
    mm.gain = GainFunction::affine(0.6, 0.2, 1.0);
    mm.input = InputCurrent(Profile::cosine(0.2, 1.0, 0.3));
    auto g = make_uniform_partition(Domain(1), 8);
    GridModel gm(mm, g);
    const Field nu0 = project(Profile::bump(0.5, 0.5, 0.2, 0.1), g);
    const std::vector<Profile> tests{Profile::constant(1.0), Profile::cosine(1.0, 1.0), Profile::cosine(1.0, 2.0)};
    const double T = 1.0, eps = 0.1;
    MomentOptions mo;
    mo.dt = 1e-3;
    mo.record_every = 50;
    const MomentTrajectory lan = moment_odes_langevin(gm, nu0, T, tests, eps, NoiseVariant::langevin, mo);
    const MomentTrajectory lin = moment_odes_langevin(gm, nu0, T, tests, eps, NoiseVariant::linear_noise, mo);
    const Trajectory wc = solve_wilson_cowan(nu0, gm, T, {8, 1e-3, Scheme::rk4, 8, 50});

    double mean_gap = 0.0, second_gap = 0.0;
    for (std::size_t i = 0; i < lan.states.size(); ++i) {
        mean_gap = std::max(mean_gap, (lan.states[i].mean - wc.values_at(lan.states[i].t)).cwiseAbs().maxCoeff());
        second_gap = std::max(second_gap, (lan.states[i].second - lin.states[i].second).cwiseAbs().maxCoeff());
    }

    // Monte Carlo of both SPDEs against the ODE moments at T.
    const int R = 5000;
    const Trajectory ref = solve_wilson_cowan(nu0, gm, T, {8, 1e-3, Scheme::exponential, 8, 1});
    Eigen::MatrixXd phibar(3, 8);
    for (int i = 0; i < 3; ++i)
        phibar.row(i) = cell_integrals(tests[i], *g).transpose();
    std::vector<Eigen::VectorXd> p_lan(R), p_lin(R);
    SpdeOptions so;
    so.T = T;
    so.dt = T / 1024;
    parallel_for(R, [&](std::size_t r) {
        const auto [a, b] = simulate_coupled(nu0, gm, ref, {eps, 99}, so, r);
        p_lin[r] = phibar * a.states.back();
        p_lan[r] = phibar * b.states.back();
    });
    double worst_z = 0.0;
    auto compare = [&](const std::vector<Eigen::VectorXd>& proj, const MomentState& st) {
        for (int i = 0; i < 3; ++i) {
            std::vector<double> m1(R), m2(R);
            for (int r = 0; r < R; ++r) {
                m1[r] = proj[r][i];
                m2[r] = proj[r][i] * proj[r][i];
            }
            const SampleSummary s1 = summarize(m1), s2 = summarize(m2);
            worst_z = std::max(worst_z, std::abs(s1.mean - st.projected_mean[i]) / s1.standard_error);
            worst_z = std::max(worst_z, std::abs(s2.mean - st.projected_second[i]) / s2.standard_error);
        }
    };
    compare(p_lan, lan.states.back());
    compare(p_lin, lin.states.back());
    const bool ok = !lan.approximate && mean_gap < 1e-6 && second_gap < 1e-10 && worst_z < 3.0;
    return {ok, "mean vs Wilson-Cowan " + fmt("%.2e", mean_gap) + ", Langevin vs linear-noise " +
                    fmt("%.2e", second_gap) + ", max MC |z| " + fmt("%.2f", worst_z) + " < 3"};
}

Outcome infinite_time()
{
    InfiniteTimeOptions o;
    o.n = 16;
    o.T = 50.0;
    o.checkpoint_every = 1.0;
    o.replicates = 200;
    o.seed = 5;
    o.policy = {PopulationPolicy::Kind::proportional, 4.0};
    o.nu0 = kInitial;
    const InfiniteTimeReport rep = infinite_time_experiment(standard_model(), o);
    return {rep.no_growth, "early sup " + fmt("%.4g", rep.early_sup) + " (" + fmt("%.2g", rep.early_se) +
                               "), late sup " + fmt("%.4g", rep.late_sup) + " (" + fmt("%.2g", rep.late_se) + ")"};
}

Outcome reproducibility()
{
    const MacroModel mm = standard_model();
    LlnOptions lo = standard_ladder();
    lo.replicates = 40;
    lo.T = 1.0;
    CltOptions co;
    co.n = 8;
    co.replicates = 200;
    co.seed = 4;
    co.policy = {PopulationPolicy::Kind::uniform, 32.0};
    co.nu0 = kInitial;
    co.tests = {{"cos(pi x)", Profile::cosine(1.0, 1.0)}};
    InfiniteTimeOptions io;
    io.n = 8;
    io.T = 5.0;
    io.replicates = 40;
    io.nu0 = kInitial;
    io.policy = {PopulationPolicy::Kind::proportional, 4.0};

    std::vector<std::string> runs[2];
    const int threads[2] = {1, 5};
    for (int i = 0; i < 2; ++i) {
        lo.threads = co.threads = io.threads = threads[i];
        runs[i].push_back(lln_experiment(mm, lo).to_json().dump());
        lo.space = StateSpace::bounded;
        runs[i].push_back(lln_experiment(mm, lo).to_json().dump());
        lo.space = StateSpace::unbounded;
        runs[i].push_back(clt_experiment(mm, co).to_json().dump());
        runs[i].push_back(infinite_time_experiment(mm, io).to_json().dump());
    }
    int same = 0;
    for (std::size_t k = 0; k < runs[0].size(); ++k)
        same += runs[0][k] == runs[1][k];
    return {same == static_cast<int>(runs[0].size()),
            std::to_string(same) + "/" + std::to_string(runs[0].size()) + " reports identical for 1 vs 5 workers"};
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"LLN trend", [] { return lln_trend(ladders().standard); }},
        {"frozen population ladder in H^-1", frozen_population_ladder},
        {"martingale quadratic bound", martingale_bound},
        {"mean bound", mean_bound},
        {"CLT covariance", clt_covariance},
        {"deterministic solver", deterministic_solver},
        {"SPDE moments", spde_moments},
        {"infinite-time stability", infinite_time},
        {"bounded variant LLN trend", [] { return lln_trend(ladders().bounded); }},
        {"reproducibility across workers", reproducibility},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
