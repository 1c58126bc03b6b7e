#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nf {

/// Axis-aligned box [lower, upper) in R^d.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    int dim() const { return static_cast<int>(lower.size()); }
    double measure() const { return (upper - lower).prod(); }
    double diameter() const { return (upper - lower).norm(); }
    Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
    bool contains(const Box& other, double tol = 1e-12) const;
};

/// Bounded spatial domain; an axis-aligned box, [0,1]^d by default.
class Domain {
public:
    explicit Domain(int dim = 1);
    explicit Domain(Box bounds);

    int dim() const { return bounds_.dim(); }
    const Box& bounds() const { return bounds_; }
    double measure() const { return bounds_.measure(); }

private:
    Box bounds_;
};

/// Collection of pairwise disjoint convex cells D_k inside a domain.
class Partition {
public:
    Partition(Domain domain, std::vector<Box> cells, int cells_per_dim = 0);

    const Domain& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }
    int size() const { return static_cast<int>(cells_.size()); }
    const Box& cell(int k) const { return cells_[static_cast<std::size_t>(k)]; }
    const std::vector<Box>& cells() const { return cells_; }

    const Eigen::VectorXd& measures() const { return measures_; }
    const Eigen::VectorXd& diameters() const { return diameters_; }
    double v_minus() const { return measures_.minCoeff(); }
    double v_plus() const { return measures_.maxCoeff(); }
    double delta_plus() const { return diameters_.maxCoeff(); }

    /// Cells per axis for uniform tensor partitions, 0 otherwise.
    int cells_per_dim() const { return cells_per_dim_; }
    bool is_uniform() const { return cells_per_dim_ > 0; }

    /// True if every cell of `fine` lies inside exactly one cell of this
    /// partition and both are uniform with a dividing resolution.
    bool is_refined_by(const Partition& fine) const;

    /// For a uniform refinement, parent[j] is the cell of this partition
    /// containing fine cell j.
    std::vector<int> parent_map(const Partition& fine) const;

private:
    Domain domain_;
    std::vector<Box> cells_;
    Eigen::VectorXd measures_;
    Eigen::VectorXd diameters_;
    int cells_per_dim_ = 0;
};

using PartitionPtr = std::shared_ptr<const Partition>;

/// n^d congruent boxes tiling the domain, x-axis index fastest.
Partition build_uniform_partition(const Domain& domain, int n);
PartitionPtr make_uniform_partition(const Domain& domain, int n);

} // namespace nf
