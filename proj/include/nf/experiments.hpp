#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nf/jump.hpp"
#include "nf/model.hpp"
#include "nf/norms.hpp"
#include "nf/solver.hpp"
#include "nf/stats.hpp"

namespace nf {

/// Settings shared by the Monte Carlo experiments.
struct ExperimentBase {
    int replicates = 200;
    std::uint64_t seed = 0;
    int threads = 0;
    PopulationPolicy policy;
    Profile nu0 = Profile::zero();
    int quadrature_order = 8;
    /// Deterministic reference; its grid is refined to at least 4x the finest
    /// partition and at least reference.m cells.
    SolverConfig reference{512, 1e-3, Scheme::exponential, 8, 1};
};

struct LlnOptions : ExperimentBase {
    std::vector<int> ladder{4, 8, 16, 32};
    double T = 2.0;
    NormSpec norm;
    int time_grid = 256;
    int checkpoints = 8;
    StateSpace space = StateSpace::unbounded;
};

struct LadderRow {
    int n = 0;
    int populations = 0;
    double delta_plus = 0.0;
    double v_plus = 0.0;
    int ell_minus = 0;
    int replicates = 0;
    double err_mean = 0.0;
    double err_se = 0.0;
    /// Mean pathwise quadratic characteristic and its bound (T/tau)(1+2||f||)|D|/ell_-.
    double qc_mean = 0.0;
    double qc_se = 0.0;
    double qc_bound = 0.0;
    /// max over checkpoints and populations of E Theta_k - l(k)(1+||f||) - 3 SE.
    double mean_bound_margin = 0.0;
};

struct LlnReport {
    NormSpec norm;
    double T = 0.0;
    StateSpace space = StateSpace::unbounded;
    std::vector<LadderRow> rows;
    RateFit fit;
    /// err_mean decreases between consecutive rows by more than 2 combined SE.
    bool strictly_decreasing = false;
    bool quadratic_bound_holds = false; ///< qc_mean <= 1.05 qc_bound on every row
    bool mean_bound_holds = false;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// E sup_t ||nu^n_t - nu(t)|| along a ladder; sup over the jump skeleton and
/// a uniform time grid.
LlnReport lln_experiment(const MacroModel& macro, const LlnOptions& opts);

struct InfiniteTimeOptions : ExperimentBase {
    int n = 16;
    double T = 50.0;
    double checkpoint_every = 1.0;
    NormSpec norm{1.0, 256};
};

struct InfiniteTimeReport {
    int n = 0;
    NormSpec norm;
    std::vector<double> times;
    std::vector<double> err_mean;
    std::vector<double> err_se;
    double early_sup = 0.0, early_se = 0.0;
    double late_sup = 0.0, late_se = 0.0;
    double sup = 0.0;
    /// late_sup <= early_sup + 2 sqrt(early_se^2 + late_se^2), windows split at T/2
    bool no_growth = false;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// E ||nu^n_t - nu(t)||_{H^-alpha} at checkpoints over a long horizon.
InfiniteTimeReport infinite_time_experiment(const MacroModel& macro, const InfiniteTimeOptions& opts);

struct TestFunction {
    std::string name;
    Profile phi;
};

struct CltOptions : ExperimentBase {
    int n = 32;
    double T = 1.0;
    std::vector<TestFunction> tests;
};

struct CltRow {
    std::string name;
    double limit_variance = 0.0; ///< <C(T) phi, phi>
    double variance = 0.0;       ///< of (phi, sqrt(rho) M_T)
    double variance_ratio = 0.0;
    double variance_ratio_se = 0.0;
    double mean = 0.0;
    double mean_se = 0.0;
    double excess_kurtosis = 0.0;
    double increment_correlation = 0.0;
};

struct CltReport {
    int n = 0;
    int ell_minus = 0;
    int replicates = 0;
    double T = 0.0;
    double rho = 0.0;
    std::vector<CltRow> rows;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// Rescaled-martingale statistics against the limiting covariance form.
CltReport clt_experiment(const MacroModel& macro, const CltOptions& opts);

/// Smallest uniform grid resolution >= max(min_cells, 4 * max(ns)) divisible by every n.
int reference_resolution(const std::vector<int>& ns, int min_cells);

} // namespace nf
