#pragma once

#include <vector>

#include <Eigen/Dense>

#include "nf/jump.hpp"
#include "nf/model.hpp"

namespace nf {

/// Law of Theta_T on the truncated box prod_k {0..theta_max[k]}. States are
/// indexed with population 0 fastest.
struct OracleResult {
    Eigen::VectorXi theta_max;
    std::vector<double> probabilities;
    /// Mass that left the truncated box (1 - sum of probabilities).
    double tail = 0.0;
    /// A priori Poisson-domination bound on the truncation tail.
    double tail_bound = 0.0;

    std::size_t index(const Eigen::VectorXi& theta) const;
    Eigen::VectorXi state(std::size_t index) const;
};

struct OracleOptions {
    /// Per-population truncation; empty selects the smallest level whose
    /// Poisson tail bound is below `max_tail`.
    Eigen::VectorXi theta_max;
    double max_tail = 1e-8;
    std::size_t max_states = 2'000'000;
    StateSpace space = StateSpace::unbounded;
};

/// Uniformization of the truncated generator; requires time-independent input.
/// Throws ErrorKind::capacity when the box exceeds max_states and
/// ErrorKind::truncation when the tail bound exceeds max_tail.
OracleResult master_equation_oracle(const MicroModel& model, const Eigen::VectorXi& theta0, double T,
                                    const OracleOptions& opts = {});

/// Empirical law of final states on the oracle's index set; states outside
/// the box are counted in the last slot of the returned counts (size + 1).
std::vector<std::int64_t> empirical_counts(const OracleResult& oracle, const std::vector<Eigen::VectorXi>& finals);

} // namespace nf
