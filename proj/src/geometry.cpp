#include "nf/geometry.hpp"

#include <cmath>

#include "nf/error.hpp"

namespace nf {

bool Box::contains(const Box& other, double tol) const
{
    return ((other.lower.array() >= lower.array() - tol) && (other.upper.array() <= upper.array() + tol)).all();
}

Domain::Domain(int dim)
    : Domain(Box{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)})
{
}

Domain::Domain(Box bounds) : bounds_(std::move(bounds))
{
    if (bounds_.dim() < 1)
        throw invalid_argument("domain dimension must be positive");
    if (bounds_.upper.size() != bounds_.lower.size())
        throw invalid_argument("domain bounds have mismatched dimensions");
    if (!(bounds_.upper.array() > bounds_.lower.array()).all() || !bounds_.upper.allFinite() ||
        !bounds_.lower.allFinite())
        throw invalid_argument("domain must be a bounded box with positive measure");
}

Partition::Partition(Domain domain, std::vector<Box> cells, int cells_per_dim)
    : domain_(std::move(domain)), cells_(std::move(cells)), cells_per_dim_(cells_per_dim)
{
    if (cells_.empty())
        throw invalid_argument("partition needs at least one cell");
    const auto p = static_cast<Eigen::Index>(cells_.size());
    measures_.resize(p);
    diameters_.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const Box& c = cells_[static_cast<std::size_t>(k)];
        if (c.dim() != domain_.dim())
            throw invalid_argument("cell dimension does not match the domain");
        if (!domain_.bounds().contains(c))
            throw invalid_argument("cell " + std::to_string(k) + " is not contained in the domain");
        measures_[k] = c.measure();
        diameters_[k] = c.diameter();
        if (!(measures_[k] > 0.0))
            throw invalid_argument("cell " + std::to_string(k) + " has zero measure");
    }
}

bool Partition::is_refined_by(const Partition& fine) const
{
    return is_uniform() && fine.is_uniform() && fine.dim() == dim() &&
           fine.cells_per_dim() % cells_per_dim() == 0 &&
           (fine.domain().bounds().lower - domain().bounds().lower).norm() < 1e-12 &&
           (fine.domain().bounds().upper - domain().bounds().upper).norm() < 1e-12;
}

std::vector<int> Partition::parent_map(const Partition& fine) const
{
    if (!is_refined_by(fine))
        throw invalid_argument("partition is not a uniform refinement");
    const int nc = cells_per_dim();
    const int nf = fine.cells_per_dim();
    const int ratio = nf / nc;
    std::vector<int> parent(static_cast<std::size_t>(fine.size()));
    for (int j = 0; j < fine.size(); ++j) {
        int rem = j;
        int stride = 1;
        int coarse = 0;
        for (int a = 0; a < dim(); ++a) {
            const int i = rem % nf;
            rem /= nf;
            coarse += (i / ratio) * stride;
            stride *= nc;
        }
        parent[static_cast<std::size_t>(j)] = coarse;
    }
    return parent;
}

Partition build_uniform_partition(const Domain& domain, int n)
{
    if (n < 1)
        throw invalid_argument("partition resolution n must be >= 1, got " + std::to_string(n));
    const int d = domain.dim();
    const Box& b = domain.bounds();
    const Eigen::VectorXd h = (b.upper - b.lower) / n;
    long total = 1;
    for (int a = 0; a < d; ++a)
        total *= n;
    std::vector<Box> cells;
    cells.reserve(static_cast<std::size_t>(total));
    for (long k = 0; k < total; ++k) {
        Box c{Eigen::VectorXd(d), Eigen::VectorXd(d)};
        long rem = k;
        for (int a = 0; a < d; ++a) {
            const long i = rem % n;
            rem /= n;
            c.lower[a] = b.lower[a] + h[a] * static_cast<double>(i);
            // Last cell ends exactly on the boundary.
            c.upper[a] = (i + 1 == n) ? b.upper[a] : b.lower[a] + h[a] * static_cast<double>(i + 1);
        }
        cells.push_back(std::move(c));
    }
    return Partition(domain, std::move(cells), n);
}

PartitionPtr make_uniform_partition(const Domain& domain, int n)
{
    return std::make_shared<const Partition>(build_uniform_partition(domain, n));
}

} // namespace nf
