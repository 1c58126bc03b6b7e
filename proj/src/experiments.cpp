#include "nf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "nf/error.hpp"
#include "nf/parallel.hpp"
#include "nf/spde.hpp"

namespace nf {

namespace {

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::uint64_t replicate_stream(int n, int r)
{
    return (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint32_t>(r);
}

nlohmann::json norm_json(const NormSpec& norm) { return {{"alpha", norm.alpha}, {"modes", norm.modes}}; }

struct Reference {
    std::shared_ptr<const GridModel> model;
    Trajectory traj;
};

Reference solve_reference(const MacroModel& macro, const ExperimentBase& base, const std::vector<int>& ns, double T,
                          FieldEquation eq, int record_every)
{
    const int min_cells = macro.domain.dim() == 1 ? base.reference.m : 0;
    const int m = reference_resolution(ns, min_cells);
    auto grid = make_uniform_partition(macro.domain, m);
    auto model = std::make_shared<const GridModel>(macro, grid, base.reference.quadrature_order);
    SolverConfig cfg = base.reference;
    cfg.m = m;
    cfg.record_every = std::max(1, record_every);
    Field nu0 = project(base.nu0, grid, base.quadrature_order);
    return {model, solve_field(eq, nu0, *model, T, cfg)};
}

// Distance between a piecewise-constant coarse state and the fine reference
// at arbitrary times. L2 uses the orthogonal split into the coarse mismatch
// and the reference's within-cell variation; alpha > 0 uses exact cosine
// coefficients.
class ErrorProbe {
public:
    ErrorProbe(const Trajectory& fine, const PartitionPtr& coarse, const NormSpec& norm)
        : coarse_(coarse), spectral_(norm.alpha > 0.0), times_(fine.times())
    {
        const auto& vals = fine.values();
        if (spectral_) {
            c_coarse_ = cosine_cell_integrals(*coarse, norm.modes);
            weights_ = dual_sobolev_weights(*coarse, norm);
            const Eigen::MatrixXd c_fine = cosine_cell_integrals(*fine.grid(), norm.modes);
            for (const auto& v : vals)
                ref_.push_back(c_fine * v);
            return;
        }
        const std::vector<int> parent = coarse->parent_map(*fine.grid());
        const Eigen::VectorXd& mf = fine.grid()->measures();
        std::vector<Eigen::VectorXd> resid;
        for (const auto& v : vals) {
            Field r = restrict_to(Field(fine.grid(), v), coarse);
            Eigen::VectorXd e(v.size());
            for (Eigen::Index j = 0; j < v.size(); ++j)
                e[j] = v[j] - r.values[parent[static_cast<std::size_t>(j)]];
            ref_.push_back(std::move(r.values));
            resid.push_back(std::move(e));
        }
        for (std::size_t i = 0; i < resid.size(); ++i) {
            self_.push_back(resid[i].cwiseProduct(resid[i]).dot(mf));
            cross_.push_back(i + 1 < resid.size() ? resid[i].cwiseProduct(resid[i + 1]).dot(mf) : 0.0);
        }
    }

    bool spectral() const { return spectral_; }
    const Eigen::MatrixXd& coarse_coefficients() const { return c_coarse_; }

    /// `state` is the coarse cell vector for L2 and the cosine coefficients otherwise.
    double operator()(double t, const Eigen::VectorXd& state) const
    {
        std::size_t i = 0;
        double s = 0.0;
        locate(t, i, s);
        const std::size_t j = std::min(i + 1, times_.size() - 1);
        if (spectral_) {
            const Eigen::VectorXd d = state - (1.0 - s) * ref_[i] - s * ref_[j];
            return std::sqrt(d.array().square().matrix().dot(weights_));
        }
        const Eigen::VectorXd d = state - (1.0 - s) * ref_[i] - s * ref_[j];
        const double proj = (1.0 - s) * (1.0 - s) * self_[i] + 2.0 * s * (1.0 - s) * cross_[i] + s * s * self_[j];
        return std::sqrt(d.array().square().matrix().dot(coarse_->measures()) + std::max(proj, 0.0));
    }

private:
    void locate(double t, std::size_t& i, double& s) const
    {
        if (t <= times_.front()) {
            i = 0;
            s = 0.0;
            return;
        }
        if (t >= times_.back()) {
            i = times_.size() - 1;
            s = 0.0;
            return;
        }
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        i = static_cast<std::size_t>(it - times_.begin()) - 1;
        s = (t - times_[i]) / (times_[i + 1] - times_[i]);
    }

    PartitionPtr coarse_;
    bool spectral_;
    std::vector<double> times_;
    std::vector<Eigen::VectorXd> ref_;
    std::vector<double> self_, cross_;
    Eigen::MatrixXd c_coarse_;
    Eigen::VectorXd weights_;
};

struct LlnSample {
    double sup_error = 0.0;
    double qc = 0.0;
    std::vector<Eigen::VectorXi> checkpoints;
};

LlnSample lln_replicate(const MicroModelPtr& model, const Eigen::VectorXi& theta0, const ErrorProbe& probe,
                        const LlnOptions& opts, std::uint64_t stream)
{
    const JumpPath path = opts.space == StateSpace::bounded
                              ? simulate_path_bounded(model, theta0, opts.T, opts.seed, stream)
                              : simulate_path(model, theta0, opts.T, opts.seed, stream);
    const MicroModel& m = *model;
    const Eigen::VectorXd inv_l = m.l().cast<double>().cwiseInverse();
    Eigen::VectorXi theta = theta0;
    Eigen::VectorXd state = theta.cast<double>().cwiseProduct(inv_l);
    if (probe.spectral())
        state = probe.coarse_coefficients() * state;

    LlnSample out;
    double sup = 0.0;
    auto eval = [&](double t) { sup = std::max(sup, probe(t, state)); };

    const int grid_n = std::max(1, opts.time_grid);
    int next_grid = 0;
    auto grid_time = [&](int i) { return opts.T * static_cast<double>(i) / grid_n; };
    int next_check = 1;
    auto check_time = [&](int j) { return opts.T * static_cast<double>(j) / opts.checkpoints; };

    for (const JumpEvent& e : path.events()) {
        while (next_grid <= grid_n && grid_time(next_grid) < e.time)
            eval(grid_time(next_grid++));
        while (next_check <= opts.checkpoints && check_time(next_check) < e.time) {
            out.checkpoints.push_back(theta);
            ++next_check;
        }
        eval(e.time);
        theta[e.population] += e.direction;
        const double delta = e.direction * inv_l[e.population];
        if (probe.spectral())
            state += probe.coarse_coefficients().col(e.population) * delta;
        else
            state[e.population] += delta;
        eval(e.time);
    }
    while (next_grid <= grid_n)
        eval(grid_time(next_grid++));
    while (next_check <= opts.checkpoints) {
        out.checkpoints.push_back(theta);
        ++next_check;
    }
    out.sup_error = sup;
    out.qc = quadratic_characteristic(path);
    return out;
}

} // namespace

int reference_resolution(const std::vector<int>& ns, int min_cells)
{
    if (ns.empty())
        throw invalid_argument("empty ladder");
    int l = 1, mx = 0;
    for (int n : ns) {
        if (n < 1)
            throw invalid_argument("ladder entries must be positive");
        l = std::lcm(l, n);
        mx = std::max(mx, n);
    }
    const int target = std::max(min_cells, 4 * mx);
    return ((target + l - 1) / l) * l;
}

// ---------------------------------------------------------------- LLN

LlnReport lln_experiment(const MacroModel& macro, const LlnOptions& opts)
{
    if (opts.ladder.size() < 1)
        throw invalid_argument("ladder must be non-empty");
    for (std::size_t i = 1; i < opts.ladder.size(); ++i)
        if (opts.ladder[i] <= opts.ladder[i - 1])
            throw invalid_argument("ladder must be strictly increasing");
    if (opts.replicates < 2)
        throw invalid_argument("at least 2 replicates are needed");
    if (opts.checkpoints < 1)
        throw invalid_argument("at least one checkpoint is needed");

    const FieldEquation eq = opts.space == StateSpace::bounded ? FieldEquation::bounded : FieldEquation::wilson_cowan;
    const Reference ref = solve_reference(macro, opts, opts.ladder, opts.T, eq, opts.reference.record_every);

    LlnReport report;
    report.norm = opts.norm;
    report.T = opts.T;
    report.space = opts.space;
    const double fmax = macro.gain.sup_norm();

    for (int n : opts.ladder) {
        const MicroModelPtr model = build_micro_model(macro, n, opts.policy, opts.quadrature_order);
        const Eigen::VectorXi theta0 =
            discrete_initial_condition(opts.nu0, model->partition(), model->l(), opts.quadrature_order);
        const ErrorProbe probe(ref.traj, model->partition_ptr(), opts.norm);

        std::vector<LlnSample> samples(static_cast<std::size_t>(opts.replicates));
        parallel_for(
            samples.size(),
            [&](std::size_t r) {
                samples[r] = lln_replicate(model, theta0, probe, opts, replicate_stream(n, static_cast<int>(r)));
            },
            opts.threads);

        RunningStats err, qc;
        const int p = model->populations();
        std::vector<RunningStats> counts(static_cast<std::size_t>(opts.checkpoints * p));
        for (const LlnSample& s : samples) {
            err.add(s.sup_error);
            qc.add(s.qc);
            for (int j = 0; j < opts.checkpoints; ++j)
                for (int k = 0; k < p; ++k)
                    counts[static_cast<std::size_t>(j * p + k)].add(s.checkpoints[static_cast<std::size_t>(j)][k]);
        }

        LadderRow row;
        row.n = n;
        row.populations = p;
        row.delta_plus = model->partition().delta_plus();
        row.v_plus = model->partition().v_plus();
        row.ell_minus = model->ell_minus();
        row.replicates = opts.replicates;
        row.err_mean = err.mean();
        row.err_se = err.standard_error();
        row.qc_mean = qc.mean();
        row.qc_se = qc.standard_error();
        row.qc_bound = (opts.T / macro.tau) * (1.0 + 2.0 * fmax) * macro.domain.measure() / model->ell_minus();
        row.mean_bound_margin = -1e300;
        for (int j = 0; j < opts.checkpoints; ++j)
            for (int k = 0; k < p; ++k) {
                const RunningStats& c = counts[static_cast<std::size_t>(j * p + k)];
                row.mean_bound_margin = std::max(row.mean_bound_margin,
                                                 c.mean() - model->l(k) * (1.0 + fmax) - 3.0 * c.standard_error());
            }
        report.rows.push_back(row);
    }

    report.strictly_decreasing = true;
    report.quadratic_bound_holds = true;
    report.mean_bound_holds = true;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const LadderRow& r = report.rows[i];
        report.quadratic_bound_holds = report.quadratic_bound_holds && r.qc_mean <= 1.05 * r.qc_bound;
        report.mean_bound_holds = report.mean_bound_holds && r.mean_bound_margin <= 0.0;
        if (i + 1 < report.rows.size()) {
            const LadderRow& s = report.rows[i + 1];
            report.strictly_decreasing = report.strictly_decreasing &&
                                         r.err_mean - s.err_mean > 2.0 * std::hypot(r.err_se, s.err_se);
        }
    }
    if (report.rows.size() >= 3) {
        std::vector<double> deltas, errs;
        bool positive = true;
        for (const auto& r : report.rows) {
            deltas.push_back(r.delta_plus);
            errs.push_back(r.err_mean);
            positive = positive && r.err_mean > 0.0;
        }
        if (positive)
            report.fit = fit_rate(deltas, errs, 2000, opts.seed);
    }
    return report;
}

nlohmann::json LlnReport::to_json() const
{
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"n", r.n},
                             {"populations", r.populations},
                             {"delta_plus", r.delta_plus},
                             {"v_plus", r.v_plus},
                             {"ell_minus", r.ell_minus},
                             {"replicates", r.replicates},
                             {"err_mean", r.err_mean},
                             {"err_se", r.err_se},
                             {"qc_mean", r.qc_mean},
                             {"qc_se", r.qc_se},
                             {"qc_bound", r.qc_bound},
                             {"mean_bound_margin", r.mean_bound_margin}});
    return {{"experiment", "lln"},
            {"norm", norm_json(norm)},
            {"T", T},
            {"state_space", space == StateSpace::bounded ? "bounded" : "unbounded"},
            {"rows", rows_json},
            {"fit", {{"slope", fit.slope}, {"intercept", fit.intercept}, {"ci_low", fit.ci_low},
                     {"ci_high", fit.ci_high}, {"level", fit.level}}},
            {"strictly_decreasing", strictly_decreasing},
            {"quadratic_bound_holds", quadratic_bound_holds},
            {"mean_bound_holds", mean_bound_holds}};
}

std::string LlnReport::to_csv() const
{
    std::ostringstream os;
    os << "n,delta_plus,v_plus,ell_minus,replicates,err_mean,err_se,qc_mean,qc_se,qc_bound,mean_bound_margin\n";
    for (const auto& r : rows)
        os << r.n << ',' << fmt(r.delta_plus) << ',' << fmt(r.v_plus) << ',' << r.ell_minus << ',' << r.replicates
           << ',' << fmt(r.err_mean) << ',' << fmt(r.err_se) << ',' << fmt(r.qc_mean) << ',' << fmt(r.qc_se) << ','
           << fmt(r.qc_bound) << ',' << fmt(r.mean_bound_margin) << '\n';
    return os.str();
}

// ---------------------------------------------------------------- infinite time

InfiniteTimeReport infinite_time_experiment(const MacroModel& macro, const InfiniteTimeOptions& opts)
{
    if (!(opts.checkpoint_every > 0.0) || !(opts.T >= opts.checkpoint_every))
        throw invalid_argument("checkpoint spacing must be positive and below the horizon");
    if (opts.replicates < 2)
        throw invalid_argument("at least 2 replicates are needed");
    if (!macro.input.bounded())
        throw invalid_argument("infinite-time experiment needs a bounded input");

    const int per = std::max(1, static_cast<int>(std::lround(opts.checkpoint_every / opts.reference.dt)));
    const Reference ref = solve_reference(macro, opts, {opts.n}, opts.T, FieldEquation::wilson_cowan,
                                          std::min(per, std::max(1, static_cast<int>(std::lround(0.01 / opts.reference.dt)))));
    const MicroModelPtr model = build_micro_model(macro, opts.n, opts.policy, opts.quadrature_order);
    const Eigen::VectorXi theta0 =
        discrete_initial_condition(opts.nu0, model->partition(), model->l(), opts.quadrature_order);
    const ErrorProbe probe(ref.traj, model->partition_ptr(), opts.norm);

    std::vector<double> times;
    for (int j = 1; opts.checkpoint_every * j <= opts.T * (1.0 + 1e-12); ++j)
        times.push_back(std::min(opts.checkpoint_every * j, opts.T));
    const std::size_t nt = times.size();

    std::vector<std::vector<double>> samples(static_cast<std::size_t>(opts.replicates));
    parallel_for(
        samples.size(),
        [&](std::size_t r) {
            const JumpPath path =
                simulate_path(model, theta0, opts.T, opts.seed, replicate_stream(opts.n, static_cast<int>(r)));
            const Eigen::VectorXd inv_l = model->l().cast<double>().cwiseInverse();
            Eigen::VectorXd nu = theta0.cast<double>().cwiseProduct(inv_l);
            std::vector<double> errs;
            errs.reserve(nt);
            std::size_t j = 0;
            auto state = [&] { return probe.spectral() ? Eigen::VectorXd(probe.coarse_coefficients() * nu) : nu; };
            for (const JumpEvent& e : path.events()) {
                while (j < nt && times[j] < e.time)
                    errs.push_back(probe(times[j++], state()));
                nu[e.population] += e.direction * inv_l[e.population];
            }
            while (j < nt)
                errs.push_back(probe(times[j++], state()));
            samples[r] = std::move(errs);
        },
        opts.threads);

    InfiniteTimeReport report;
    report.n = opts.n;
    report.norm = opts.norm;
    report.times = times;
    for (std::size_t j = 0; j < nt; ++j) {
        RunningStats s;
        for (const auto& e : samples)
            s.add(e[j]);
        report.err_mean.push_back(s.mean());
        report.err_se.push_back(s.standard_error());
    }
    report.early_sup = report.late_sup = -1.0;
    for (std::size_t j = 0; j < nt; ++j) {
        const bool late = times[j] > 0.5 * opts.T;
        double& sup = late ? report.late_sup : report.early_sup;
        double& se = late ? report.late_se : report.early_se;
        if (report.err_mean[j] > sup) {
            sup = report.err_mean[j];
            se = report.err_se[j];
        }
    }
    report.early_sup = std::max(report.early_sup, 0.0);
    report.late_sup = std::max(report.late_sup, 0.0);
    report.sup = std::max(report.early_sup, report.late_sup);
    report.no_growth = report.late_sup <= report.early_sup + 2.0 * std::hypot(report.early_se, report.late_se);
    return report;
}

nlohmann::json InfiniteTimeReport::to_json() const
{
    return {{"experiment", "infinite-time"},
            {"n", n},
            {"norm", norm_json(norm)},
            {"times", times},
            {"err_mean", err_mean},
            {"err_se", err_se},
            {"early_sup", early_sup},
            {"early_se", early_se},
            {"late_sup", late_sup},
            {"late_se", late_se},
            {"sup", sup},
            {"no_growth", no_growth}};
}

std::string InfiniteTimeReport::to_csv() const
{
    std::ostringstream os;
    os << "t,err_mean,err_se\n";
    for (std::size_t j = 0; j < times.size(); ++j)
        os << fmt(times[j]) << ',' << fmt(err_mean[j]) << ',' << fmt(err_se[j]) << '\n';
    return os.str();
}

// ---------------------------------------------------------------- CLT

CltReport clt_experiment(const MacroModel& macro, const CltOptions& opts)
{
    if (opts.tests.empty())
        throw invalid_argument("CLT experiment needs at least one test function");
    if (opts.replicates < 4)
        throw invalid_argument("at least 4 replicates are needed");

    const Reference ref = solve_reference(macro, opts, {opts.n}, opts.T, FieldEquation::wilson_cowan,
                                          opts.reference.record_every);
    const MicroModelPtr model = build_micro_model(macro, opts.n, opts.policy, opts.quadrature_order);
    const Eigen::VectorXi theta0 =
        discrete_initial_condition(opts.nu0, model->partition(), model->l(), opts.quadrature_order);

    const std::size_t nt = opts.tests.size();
    Eigen::MatrixXd phibar(static_cast<Eigen::Index>(nt), model->populations());
    for (std::size_t i = 0; i < nt; ++i)
        phibar.row(static_cast<Eigen::Index>(i)) =
            cell_integrals(opts.tests[i].phi, model->partition(), opts.quadrature_order);

    // Per replicate: projections at T/2 and T for every test function.
    const std::vector<double> eval{0.5 * opts.T, opts.T};
    std::vector<Eigen::MatrixXd> samples(static_cast<std::size_t>(opts.replicates));
    parallel_for(
        samples.size(),
        [&](std::size_t r) {
            const JumpPath path =
                simulate_path(model, theta0, opts.T, opts.seed, replicate_stream(opts.n, static_cast<int>(r)));
            const MartingalePath mp = rescale_martingale(martingale_path(path, eval), *model);
            Eigen::MatrixXd x(static_cast<Eigen::Index>(nt), 2);
            x.col(0) = phibar * mp.values[0];
            x.col(1) = phibar * mp.values[1];
            samples[r] = x;
        },
        opts.threads);

    CltReport report;
    report.n = opts.n;
    report.ell_minus = model->ell_minus();
    report.replicates = opts.replicates;
    report.T = opts.T;
    report.rho = model->rho();
    for (std::size_t i = 0; i < nt; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        std::vector<double> full, first, second;
        for (const auto& x : samples) {
            full.push_back(x(ii, 1));
            first.push_back(x(ii, 0));
            second.push_back(x(ii, 1) - x(ii, 0));
        }
        const SampleSummary s = summarize(full);
        CltRow row;
        row.name = opts.tests[i].name;
        row.limit_variance = covariance_form(opts.tests[i].phi, opts.tests[i].phi, opts.T, ref.traj, *ref.model);
        row.variance = s.variance;
        row.variance_ratio = row.limit_variance > 0.0 ? s.variance / row.limit_variance : 0.0;
        row.variance_ratio_se = row.variance_ratio *
                                std::sqrt(std::max(0.0, 2.0 + s.excess_kurtosis) / (static_cast<double>(s.count) - 1.0));
        row.mean = s.mean;
        row.mean_se = s.standard_error;
        row.excess_kurtosis = s.excess_kurtosis;
        row.increment_correlation = correlation(first, second);
        report.rows.push_back(row);
    }
    return report;
}

nlohmann::json CltReport::to_json() const
{
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows)
        rows_json.push_back({{"name", r.name},
                             {"limit_variance", r.limit_variance},
                             {"variance", r.variance},
                             {"variance_ratio", r.variance_ratio},
                             {"variance_ratio_se", r.variance_ratio_se},
                             {"mean", r.mean},
                             {"mean_se", r.mean_se},
                             {"excess_kurtosis", r.excess_kurtosis},
                             {"increment_correlation", r.increment_correlation}});
    return {{"experiment", "clt"}, {"n", n},   {"ell_minus", ell_minus}, {"replicates", replicates},
            {"T", T},              {"rho", rho}, {"rows", rows_json}};
}

std::string CltReport::to_csv() const
{
    std::ostringstream os;
    os << "name,limit_variance,variance,variance_ratio,variance_ratio_se,mean,mean_se,excess_kurtosis,"
          "increment_correlation\n";
    for (const auto& r : rows)
        os << r.name << ',' << fmt(r.limit_variance) << ',' << fmt(r.variance) << ',' << fmt(r.variance_ratio) << ','
           << fmt(r.variance_ratio_se) << ',' << fmt(r.mean) << ',' << fmt(r.mean_se) << ','
           << fmt(r.excess_kurtosis) << ',' << fmt(r.increment_correlation) << '\n';
    return os.str();
}

} // namespace nf
