#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "nf/config.hpp"
#include "nf/error.hpp"
#include "nf/experiments.hpp"
#include "nf/jump.hpp"
#include "nf/moments.hpp"
#include "nf/oracle.hpp"
#include "nf/parallel.hpp"
#include "nf/solver.hpp"
#include "nf/spde.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    int threads = 0;
};

struct Loaded {
    nf::ModelConfig cfg;
    std::string hash;
};

std::string fmt(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Loaded load(const Common& c)
{
    std::ifstream in(c.config, std::ios::binary);
    if (!in)
        throw nf::Error(nf::ErrorKind::schema, "cannot open config file '" + c.config + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    return {nf::parse_model_config(nf::parse_json_text(bytes, c.config)), nf::fnv1a_hex(bytes)};
}

void write_atomic(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        os << content;
        os.flush();
        if (!os)
            throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string utc_now()
{
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

// Timing and host details live only here so reports stay byte-identical.
class Run {
public:
    Run(std::string command, const Common& c) : command_(std::move(command)), common_(c) {}

    void artifact(const fs::path& path, const std::string& content)
    {
        write_atomic(path, content);
        artifacts_.push_back(path.string());
    }

    void finish(const fs::path& manifest_path, const std::string& hash, json params)
    {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const json m{{"command", command_},
                     {"config", common_.config},
                     {"config_hash", hash},
                     {"seed", common_.seed},
                     {"version", NF_VERSION},
                     {"threads", common_.threads > 0 ? common_.threads : nf::default_thread_count()},
                     {"parameters", std::move(params)},
                     {"artifacts", artifacts_},
                     {"finished_at", utc_now()},
                     {"wall_time_seconds", wall}};
        write_atomic(manifest_path, m.dump(2) + "\n");
    }

private:
    std::string command_;
    Common common_;
    std::vector<std::string> artifacts_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void add_common(CLI::App* sub, Common& c, const std::string& default_out)
{
    sub->add_option("--config", c.config, "model configuration JSON")->required();
    sub->add_option("--seed", c.seed, "base seed")->capture_default_str();
    c.out = default_out;
    sub->add_option("--out", c.out, "output location")->capture_default_str();
    sub->add_option("--threads", c.threads, "worker threads (0 = NF_THREADS or all cores)");
}

double parse_eps(const std::string& s, const nf::ModelConfig& cfg)
{
    if (s == "auto") {
        auto grid = nf::make_uniform_partition(cfg.macro.domain, cfg.n);
        const Eigen::VectorXi l = cfg.policy.sizes(cfg.n, grid->size());
        return std::sqrt(grid->v_plus() / l.minCoeff());
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && v >= 0.0)
            return v;
    } catch (const std::exception&) {
    }
    throw nf::invalid_argument("--eps must be 'auto' or a non-negative number, got '" + s + "'");
}

std::vector<nf::TestFunction> standard_tests()
{
    return {{"constant", nf::Profile::constant(1.0)},
            {"cos_pi_x", nf::Profile::cosine(1.0, 1.0)},
            {"cos_2pi_x", nf::Profile::cosine(1.0, 2.0)}};
}

std::string cell_header(int dim)
{
    return dim == 1 ? "x" : "x,y";
}

std::string cell_coords(const nf::Partition& grid, int k)
{
    const nf::Box& b = grid.cell(k);
    std::string s;
    for (Eigen::Index a = 0; a < b.lower.size(); ++a) {
        if (a)
            s += ',';
        s += fmt(0.5 * (b.lower[a] + b.upper[a]));
    }
    return s;
}

fs::path sibling_manifest(const fs::path& file)
{
    fs::path m = file;
    m += ".manifest.json";
    return m;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    double T = 2.0;
    int replicates = 1;
    bool bounded = false;
};

void run_simulate(const Common& c, const SimulateArgs& a)
{
    const Loaded ld = load(c);
    const auto model = nf::build_micro_model(ld.cfg.macro, ld.cfg.n, ld.cfg.policy, ld.cfg.quadrature_order);
    const Eigen::VectorXi theta0 = nf::discrete_initial_condition(ld.cfg.initial, model->partition(), model->l());
    if (a.bounded && (theta0.array() > model->l().array()).any())
        throw nf::invalid_argument("initial state exceeds population sizes in the bounded state space");
    std::vector<std::string> chunks(static_cast<std::size_t>(a.replicates));
    std::vector<std::size_t> counts(chunks.size());
    nf::parallel_for(
        chunks.size(),
        [&](std::size_t r) {
            const nf::JumpPath p = a.bounded ? nf::simulate_path_bounded(model, theta0, a.T, c.seed, r)
                                             : nf::simulate_path(model, theta0, a.T, c.seed, r);
            std::string s;
            for (const nf::JumpEvent& e : p.events())
                s += std::to_string(r) + ',' + fmt(e.time) + ',' + std::to_string(e.population) + ',' +
                     std::to_string(e.direction) + '\n';
            chunks[r] = std::move(s);
            counts[r] = p.events().size();
        },
        c.threads);

    std::string paths = "replicate,time,population,direction\n";
    std::size_t events = 0;
    for (std::size_t r = 0; r < chunks.size(); ++r) {
        paths += chunks[r];
        events += counts[r];
    }
    std::string init = "population,l,theta0\n";
    for (int k = 0; k < model->populations(); ++k)
        init += std::to_string(k) + ',' + std::to_string(model->l(k)) + ',' + std::to_string(theta0[k]) + '\n';

    Run run("simulate", c);
    const fs::path dir(c.out);
    run.artifact(dir / "paths.csv", paths);
    run.artifact(dir / "initial.csv", init);
    run.finish(dir / "manifest.json", ld.hash,
               {{"T", a.T}, {"replicates", a.replicates}, {"bounded", a.bounded}, {"n", ld.cfg.n}});
    std::cout << "simulate: " << a.replicates << " paths, " << events << " events -> " << (dir / "paths.csv").string()
              << "\n";
}

// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string model = "wilson-cowan";
    double T = 2.0;
    double dt = 1e-3;
    int cells = 0;
    std::string scheme = "exponential";
    int record_every = 1;
};

nf::FieldEquation parse_equation(const std::string& s)
{
    if (s == "wilson-cowan")
        return nf::FieldEquation::wilson_cowan;
    if (s == "amari")
        return nf::FieldEquation::amari;
    return nf::FieldEquation::bounded;
}

nf::Scheme parse_scheme(const std::string& s)
{
    if (s == "rk4")
        return nf::Scheme::rk4;
    if (s == "euler")
        return nf::Scheme::euler;
    return nf::Scheme::exponential;
}

void run_solve(const Common& c, const SolveArgs& a)
{
    const Loaded ld = load(c);
    const int cells = a.cells > 0 ? a.cells : ld.cfg.n;
    auto grid = nf::make_uniform_partition(ld.cfg.macro.domain, cells);
    const nf::GridModel gm(ld.cfg.macro, grid, ld.cfg.quadrature_order);
    const nf::Field nu0 = nf::project(ld.cfg.initial, grid, ld.cfg.quadrature_order);
    const nf::Trajectory tr = nf::solve_field(parse_equation(a.model), nu0, gm, a.T,
                                              {cells, a.dt, parse_scheme(a.scheme), ld.cfg.quadrature_order,
                                               a.record_every});
    std::string csv = "time," + cell_header(grid->dim()) + ",value\n";
    std::vector<std::string> coords(static_cast<std::size_t>(grid->size()));
    for (int k = 0; k < grid->size(); ++k)
        coords[k] = cell_coords(*grid, k);
    for (std::size_t i = 0; i < tr.size(); ++i)
        for (int k = 0; k < grid->size(); ++k)
            csv += fmt(tr.times()[i]) + ',' + coords[k] + ',' + fmt(tr.values()[i][k]) + '\n';

    Run run("solve", c);
    const fs::path out(c.out);
    run.artifact(out, csv);
    run.finish(sibling_manifest(out), ld.hash,
               {{"model", a.model}, {"T", a.T}, {"dt", a.dt}, {"cells", cells}, {"scheme", a.scheme}});
    std::cout << "solve: " << tr.size() << " records on " << grid->size() << " cells -> " << out.string() << "\n";
}

// ---------------------------------------------------------------------------

struct SpdeArgs {
    std::string variant = "langevin";
    std::string eps = "auto";
    double T = 2.0;
    double dt = 0.0;
    int replicates = 1;
    int cells = 0;
    int record_every = 0;
};

void run_spde(const Common& c, const SpdeArgs& a)
{
    const Loaded ld = load(c);
    const double eps = parse_eps(a.eps, ld.cfg);
    const int cells = a.cells > 0 ? a.cells : ld.cfg.n;
    auto grid = nf::make_uniform_partition(ld.cfg.macro.domain, cells);
    const nf::GridModel gm(ld.cfg.macro, grid, ld.cfg.quadrature_order);
    const nf::Field nu0 = nf::project(ld.cfg.initial, grid, ld.cfg.quadrature_order);
    nf::SpdeOptions opts;
    opts.T = a.T;
    opts.dt = a.dt;
    opts.record_every = a.record_every;
    const bool linear = a.variant == "linear-noise";
    nf::Trajectory reference;
    if (linear) {
        const double dt = a.dt > 0.0 ? a.dt : a.T / 2048.0;
        reference = nf::solve_wilson_cowan(nu0, gm, a.T,
                                           {cells, std::min(dt, 1e-3), nf::Scheme::exponential,
                                            ld.cfg.quadrature_order, 1});
    }
    std::vector<std::string> coords(static_cast<std::size_t>(grid->size()));
    for (int k = 0; k < grid->size(); ++k)
        coords[k] = cell_coords(*grid, k);
    std::vector<std::string> chunks(static_cast<std::size_t>(a.replicates));
    const nf::NoiseSpec noise{eps, c.seed};
    nf::parallel_for(
        chunks.size(),
        [&](std::size_t r) {
            const nf::SpdeTrajectory tr = linear ? nf::simulate_linear_noise(nu0, gm, reference, noise, opts, r)
                                                 : nf::simulate_langevin(nu0, gm, noise, opts, r);
            std::string s;
            for (std::size_t i = 0; i < tr.times.size(); ++i)
                for (int k = 0; k < grid->size(); ++k)
                    s += std::to_string(r) + ',' + fmt(tr.times[i]) + ',' + coords[k] + ',' +
                         fmt(tr.states[i][k]) + '\n';
            chunks[r] = std::move(s);
        },
        c.threads);
    std::string csv = "replicate,time," + cell_header(grid->dim()) + ",value\n";
    for (const std::string& s : chunks)
        csv += s;

    Run run("spde", c);
    const fs::path out(c.out);
    run.artifact(out, csv);
    run.finish(sibling_manifest(out), ld.hash,
               {{"variant", a.variant}, {"epsilon", eps}, {"T", a.T}, {"dt", a.dt > 0.0 ? a.dt : a.T / 2048.0},
                {"replicates", a.replicates}, {"cells", cells}});
    std::cout << "spde: " << a.variant << " eps=" << eps << ", " << a.replicates << " replicates -> " << out.string()
              << "\n";
}

// ---------------------------------------------------------------------------

struct ReferenceArgs {
    int cells = 512;
    double dt = 1e-3;
};

void add_reference(CLI::App* sub, ReferenceArgs& r)
{
    sub->add_option("--ref-cells", r.cells, "minimum reference grid cells")->capture_default_str();
    sub->add_option("--ref-dt", r.dt, "reference time step")->capture_default_str();
}

void fill_base(nf::ExperimentBase& b, const Common& c, const nf::ModelConfig& cfg, int replicates,
               const ReferenceArgs& ref)
{
    b.replicates = replicates;
    b.seed = c.seed;
    b.threads = c.threads;
    b.policy = cfg.policy;
    b.nu0 = cfg.initial;
    b.quadrature_order = cfg.quadrature_order;
    b.reference.m = ref.cells;
    b.reference.dt = ref.dt;
    b.reference.quadrature_order = cfg.quadrature_order;
}

void write_report(const Common& c, const std::string& command, const Loaded& ld, const json& report,
                  const std::string& csv, json params)
{
    Run run(command, c);
    const fs::path dir(c.out);
    run.artifact(dir / "report.json", report.dump(2) + "\n");
    if (!csv.empty())
        run.artifact(dir / "report.csv", csv);
    run.finish(dir / "manifest.json", ld.hash, std::move(params));
}

struct LlnArgs {
    std::vector<int> ladder{4, 8, 16, 32};
    double T = 2.0;
    int replicates = 200;
    double alpha = 0.0;
    int modes = 256;
    bool bounded = false;
    ReferenceArgs ref;
};

void run_lln(const Common& c, const LlnArgs& a)
{
    const Loaded ld = load(c);
    for (std::size_t i = 0; i < a.ladder.size(); ++i)
        if (a.ladder[i] < 1 || (i > 0 && a.ladder[i] <= a.ladder[i - 1]))
            throw nf::invalid_argument("--ladder must be strictly increasing positive integers");
    nf::LlnOptions o;
    fill_base(o, c, ld.cfg, a.replicates, a.ref);
    o.ladder = a.ladder;
    o.T = a.T;
    o.norm = {a.alpha, a.modes};
    o.space = a.bounded ? nf::StateSpace::bounded : nf::StateSpace::unbounded;
    const nf::LlnReport rep = nf::lln_experiment(ld.cfg.macro, o);
    write_report(c, "lln", ld, rep.to_json(), rep.to_csv(),
                 {{"ladder", a.ladder}, {"T", a.T}, {"replicates", a.replicates}, {"alpha", a.alpha},
                  {"bounded", a.bounded}});
    std::cout << "n,err_mean,err_se\n";
    for (const nf::LadderRow& r : rep.rows)
        std::cout << r.n << ',' << r.err_mean << ',' << r.err_se << "\n";
    std::cout << "slope " << rep.fit.slope << " [" << rep.fit.ci_low << ", " << rep.fit.ci_high << "]"
              << (rep.strictly_decreasing ? ", strictly decreasing" : ", not strictly decreasing") << "\n";
}

struct CltArgs {
    int n = 0;
    double T = 1.0;
    int replicates = 2000;
    ReferenceArgs ref;
};

void run_clt(const Common& c, const CltArgs& a)
{
    const Loaded ld = load(c);
    nf::CltOptions o;
    fill_base(o, c, ld.cfg, a.replicates, a.ref);
    o.n = a.n > 0 ? a.n : ld.cfg.n;
    o.T = a.T;
    o.tests = standard_tests();
    const nf::CltReport rep = nf::clt_experiment(ld.cfg.macro, o);
    write_report(c, "clt", ld, rep.to_json(), rep.to_csv(),
                 {{"n", o.n}, {"T", a.T}, {"replicates", a.replicates}});
    for (const nf::CltRow& r : rep.rows)
        std::cout << r.name << ": variance ratio " << r.variance_ratio << " +- " << r.variance_ratio_se
                  << ", kurtosis " << r.excess_kurtosis << "\n";
}

struct InfiniteArgs {
    int n = 0;
    double T = 50.0;
    double every = 1.0;
    double alpha = 1.0;
    int modes = 256;
    int replicates = 200;
    ReferenceArgs ref;
};

void run_infinite(const Common& c, const InfiniteArgs& a)
{
    const Loaded ld = load(c);
    nf::InfiniteTimeOptions o;
    fill_base(o, c, ld.cfg, a.replicates, a.ref);
    o.n = a.n > 0 ? a.n : ld.cfg.n;
    o.T = a.T;
    o.checkpoint_every = a.every;
    o.norm = {a.alpha, a.modes};
    const nf::InfiniteTimeReport rep = nf::infinite_time_experiment(ld.cfg.macro, o);
    write_report(c, "infinite-time", ld, rep.to_json(), rep.to_csv(),
                 {{"n", o.n}, {"T", a.T}, {"every", a.every}, {"alpha", a.alpha}, {"replicates", a.replicates}});
    std::cout << "early sup " << rep.early_sup << ", late sup " << rep.late_sup
              << (rep.no_growth ? ", no growth" : ", growth detected") << "\n";
}

struct MomentsArgs {
    std::string variant = "markov";
    std::string eps = "auto";
    double T = 1.0;
    double dt = 1e-3;
    int record_every = 10;
    bool allow_closure = false;
    int cells = 0;
};

void run_moments(const Common& c, const MomentsArgs& a)
{
    const Loaded ld = load(c);
    const std::vector<nf::TestFunction> tests = standard_tests();
    std::vector<nf::Profile> profiles;
    for (const auto& t : tests)
        profiles.push_back(t.phi);
    nf::MomentOptions mo;
    mo.dt = a.dt;
    mo.record_every = a.record_every;
    mo.allow_closure = a.allow_closure;

    nf::MomentTrajectory traj;
    json params{{"variant", a.variant}, {"T", a.T}, {"dt", a.dt}, {"allow_closure", a.allow_closure}};
    if (a.variant == "markov") {
        const auto model = nf::build_micro_model(ld.cfg.macro, ld.cfg.n, ld.cfg.policy, ld.cfg.quadrature_order);
        const Eigen::VectorXi theta0 = nf::discrete_initial_condition(ld.cfg.initial, model->partition(), model->l());
        traj = nf::moment_odes_markov(*model, theta0.cast<double>(), a.T, profiles, mo);
        params["n"] = ld.cfg.n;
    } else {
        const double eps = parse_eps(a.eps, ld.cfg);
        const int cells = a.cells > 0 ? a.cells : ld.cfg.n;
        auto grid = nf::make_uniform_partition(ld.cfg.macro.domain, cells);
        const nf::GridModel gm(ld.cfg.macro, grid, ld.cfg.quadrature_order);
        traj = nf::moment_odes_langevin(gm, nf::project(ld.cfg.initial, grid, ld.cfg.quadrature_order), a.T,
                                        profiles, eps,
                                        a.variant == "linear-noise" ? nf::NoiseVariant::linear_noise
                                                                    : nf::NoiseVariant::langevin,
                                        mo);
        params["epsilon"] = eps;
        params["cells"] = cells;
    }

    std::string csv = "time,quantity,index,value\n";
    json states = json::array();
    for (const nf::MomentState& st : traj.states) {
        const std::string t = fmt(st.t);
        for (Eigen::Index k = 0; k < st.mean.size(); ++k)
            csv += t + ",mean," + std::to_string(k) + ',' + fmt(st.mean[k]) + '\n';
        for (std::size_t i = 0; i < tests.size(); ++i) {
            csv += t + ",projected_mean," + tests[i].name + ',' + fmt(st.projected_mean[i]) + '\n';
            csv += t + ",projected_second," + tests[i].name + ',' + fmt(st.projected_second[i]) + '\n';
        }
        states.push_back({{"t", st.t},
                          {"mean", std::vector<double>(st.mean.data(), st.mean.data() + st.mean.size())},
                          {"projected_mean", std::vector<double>(st.projected_mean.data(),
                                                                 st.projected_mean.data() + st.projected_mean.size())},
                          {"projected_second",
                           std::vector<double>(st.projected_second.data(),
                                               st.projected_second.data() + st.projected_second.size())}});
    }
    json names = json::array();
    for (const auto& t : tests)
        names.push_back(t.name);
    const json report{{"experiment", "moments"},
                      {"variant", a.variant},
                      {"approximate", traj.approximate},
                      {"tests", names},
                      {"states", states}};
    Run run("moments", c);
    const fs::path dir(c.out);
    run.artifact(dir / "report.json", report.dump(2) + "\n");
    run.artifact(dir / "moments.csv", csv);
    run.finish(dir / "manifest.json", ld.hash, params);
    std::cout << "moments: " << traj.states.size() << " records" << (traj.approximate ? " (approximate)" : "")
              << "\n";
}

struct OracleArgs {
    double T = 1.0;
    int replicates = 100000;
    double max_tail = 1e-8;
    double threshold = 0.02;
    bool bounded = false;
};

void run_oracle(const Common& c, const OracleArgs& a)
{
    const Loaded ld = load(c);
    const auto model = nf::build_micro_model(ld.cfg.macro, ld.cfg.n, ld.cfg.policy, ld.cfg.quadrature_order);
    const Eigen::VectorXi theta0 = nf::discrete_initial_condition(ld.cfg.initial, model->partition(), model->l());
    nf::OracleOptions oo;
    oo.max_tail = a.max_tail;
    oo.space = a.bounded ? nf::StateSpace::bounded : nf::StateSpace::unbounded;
    const nf::OracleResult res = nf::master_equation_oracle(*model, theta0, a.T, oo);

    std::vector<Eigen::VectorXi> finals(static_cast<std::size_t>(a.replicates));
    nf::parallel_for(
        finals.size(),
        [&](std::size_t r) {
            finals[r] = (a.bounded ? nf::simulate_path_bounded(model, theta0, a.T, c.seed, r)
                                   : nf::simulate_path(model, theta0, a.T, c.seed, r))
                            .final_state();
        },
        c.threads);
    const std::vector<std::int64_t> counts = nf::empirical_counts(res, finals);
    std::vector<double> freq(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        freq[i] = static_cast<double>(counts[i]) / a.replicates;
    const double tv = nf::total_variation(freq, res.probabilities);

    std::string csv = "index";
    for (int k = 0; k < model->populations(); ++k)
        csv += ",theta" + std::to_string(k);
    csv += ",oracle,empirical\n";
    for (std::size_t i = 0; i < res.probabilities.size(); ++i) {
        const Eigen::VectorXi s = res.state(i);
        csv += std::to_string(i);
        for (int k = 0; k < s.size(); ++k)
            csv += ',' + std::to_string(s[k]);
        csv += ',' + fmt(res.probabilities[i]) + ',' + fmt(freq[i]) + '\n';
    }
    const json report{{"experiment", "oracle-check"},
                      {"T", a.T},
                      {"replicates", a.replicates},
                      {"states", res.probabilities.size()},
                      {"tail", res.tail},
                      {"tail_bound", res.tail_bound},
                      {"outside_box", counts.back()},
                      {"total_variation", tv},
                      {"threshold", a.threshold},
                      {"pass", tv < a.threshold}};
    Run run("oracle-check", c);
    const fs::path dir(c.out);
    run.artifact(dir / "report.json", report.dump(2) + "\n");
    run.artifact(dir / "distribution.csv", csv);
    run.finish(dir / "manifest.json", ld.hash,
               {{"T", a.T}, {"replicates", a.replicates}, {"max_tail", a.max_tail}, {"bounded", a.bounded}});
    std::cout << "oracle-check: TV " << tv << (tv < a.threshold ? " < " : " >= ") << a.threshold << " over "
              << res.probabilities.size() << " states\n";
}

int exit_code(nf::ErrorKind k)
{
    switch (k) {
    case nf::ErrorKind::schema:
    case nf::ErrorKind::invalid_argument:
    case nf::ErrorKind::unsupported:
    case nf::ErrorKind::closure_required:
        return 2;
    case nf::ErrorKind::numeric:
        return 3;
    case nf::ErrorKind::capacity:
    case nf::ErrorKind::truncation:
        return 4;
    default:
        return 1;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic neural field simulation and verification"};
    app.set_version_flag("--version", std::string(NF_VERSION));
    app.require_subcommand(1);

    Common common;
    std::function<void()> action;

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "sample jump-process paths");
    add_common(s, common, "paths");
    s->add_option("--T", sim.T, "horizon")->capture_default_str();
    s->add_option("--replicates", sim.replicates)->capture_default_str()->check(CLI::PositiveNumber);
    s->add_flag("--bounded", sim.bounded, "bounded state space variant");
    s->callback([&] { action = [&] { run_simulate(common, sim); }; });

    SolveArgs solve;
    auto* so = app.add_subcommand("solve", "integrate a deterministic field equation");
    add_common(so, common, "trajectory.csv");
    so->add_option("--model", solve.model)
        ->capture_default_str()
        ->check(CLI::IsMember({"wilson-cowan", "amari", "bounded"}));
    so->add_option("--T", solve.T)->capture_default_str();
    so->add_option("--dt", solve.dt)->capture_default_str()->check(CLI::PositiveNumber);
    so->add_option("--cells", solve.cells, "grid cells per axis (default: n from the config)");
    so->add_option("--scheme", solve.scheme)
        ->capture_default_str()
        ->check(CLI::IsMember({"exponential", "rk4", "euler"}));
    so->add_option("--record-every", solve.record_every)->capture_default_str()->check(CLI::PositiveNumber);
    so->callback([&] { action = [&] { run_solve(common, solve); }; });

    SpdeArgs sp;
    auto* spd = app.add_subcommand("spde", "Langevin or linear-noise SPDE paths");
    add_common(spd, common, "spde.csv");
    spd->add_option("--variant", sp.variant)
        ->capture_default_str()
        ->check(CLI::IsMember({"langevin", "linear-noise"}));
    spd->add_option("--eps", sp.eps, "noise amplitude or 'auto'")->capture_default_str();
    spd->add_option("--T", sp.T)->capture_default_str();
    spd->add_option("--dt", sp.dt, "time step (default T/2048)");
    spd->add_option("--replicates", sp.replicates)->capture_default_str()->check(CLI::PositiveNumber);
    spd->add_option("--cells", sp.cells, "grid cells per axis (default: n from the config)");
    spd->add_option("--record-every", sp.record_every, "record every k steps (0: endpoints only)");
    spd->callback([&] { action = [&] { run_spde(common, sp); }; });

    LlnArgs lln;
    auto* l = app.add_subcommand("lln", "law of large numbers ladder");
    add_common(l, common, "lln");
    l->add_option("--ladder", lln.ladder, "comma-separated n values")->delimiter(',')->capture_default_str();
    l->add_option("--T", lln.T)->capture_default_str();
    l->add_option("--replicates", lln.replicates)->capture_default_str()->check(CLI::PositiveNumber);
    l->add_option("--alpha", lln.alpha, "dual Sobolev exponent (0 = L2)")->capture_default_str();
    l->add_option("--modes", lln.modes)->capture_default_str();
    l->add_flag("--bounded", lln.bounded, "bounded state space against its limit equation");
    add_reference(l, lln.ref);
    l->callback([&] { action = [&] { run_lln(common, lln); }; });

    CltArgs clt;
    auto* cl = app.add_subcommand("clt", "rescaled martingale statistics");
    add_common(cl, common, "clt");
    cl->add_option("--n", clt.n, "partition level (default: n from the config)");
    cl->add_option("--T", clt.T)->capture_default_str();
    cl->add_option("--replicates", clt.replicates)->capture_default_str()->check(CLI::PositiveNumber);
    add_reference(cl, clt.ref);
    cl->callback([&] { action = [&] { run_clt(common, clt); }; });

    InfiniteArgs inf;
    auto* it = app.add_subcommand("infinite-time", "long-horizon error checkpoints");
    add_common(it, common, "infinite-time");
    it->add_option("--n", inf.n, "partition level (default: n from the config)");
    it->add_option("--T", inf.T)->capture_default_str();
    it->add_option("--every", inf.every, "checkpoint spacing")->capture_default_str();
    it->add_option("--alpha", inf.alpha)->capture_default_str();
    it->add_option("--modes", inf.modes)->capture_default_str();
    it->add_option("--replicates", inf.replicates)->capture_default_str()->check(CLI::PositiveNumber);
    add_reference(it, inf.ref);
    it->callback([&] { action = [&] { run_infinite(common, inf); }; });

    MomentsArgs mom;
    auto* mo = app.add_subcommand("moments", "moment equations");
    add_common(mo, common, "moments");
    mo->add_option("--variant", mom.variant)
        ->capture_default_str()
        ->check(CLI::IsMember({"markov", "langevin", "linear-noise"}));
    mo->add_option("--eps", mom.eps, "noise amplitude or 'auto' (SPDE variants)")->capture_default_str();
    mo->add_option("--T", mom.T)->capture_default_str();
    mo->add_option("--dt", mom.dt)->capture_default_str()->check(CLI::PositiveNumber);
    mo->add_option("--record-every", mom.record_every)->capture_default_str()->check(CLI::PositiveNumber);
    mo->add_option("--cells", mom.cells, "grid cells per axis for SPDE variants");
    mo->add_flag("--allow-closure", mom.allow_closure, "mean-field closure for non-affine gains");
    mo->callback([&] { action = [&] { run_moments(common, mom); }; });

    OracleArgs orc;
    auto* oc = app.add_subcommand("oracle-check", "simulated marginals against the master equation");
    add_common(oc, common, "oracle-check");
    oc->add_option("--T", orc.T)->capture_default_str();
    oc->add_option("--replicates", orc.replicates)->capture_default_str()->check(CLI::PositiveNumber);
    oc->add_option("--max-tail", orc.max_tail)->capture_default_str();
    oc->add_option("--threshold", orc.threshold, "total variation threshold")->capture_default_str();
    oc->add_flag("--bounded", orc.bounded);
    oc->callback([&] { action = [&] { run_oracle(common, orc); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        action();
    } catch (const nf::Error& e) {
        std::cerr << "nfield: error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "nfield: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
