#pragma once

#include <Eigen/Dense>

#include "nf/functions.hpp"
#include "nf/geometry.hpp"

namespace nf {

/// Spatial function on a partition: one value per cell. Piecewise-constant
/// fields carry cell averages; nodal fields carry cell-center samples.
struct Field {
    enum class Representation { piecewise_constant, nodal };

    PartitionPtr grid;
    Eigen::VectorXd values;
    Representation representation = Representation::piecewise_constant;

    Field() = default;
    Field(PartitionPtr g, Eigen::VectorXd v, Representation r = Representation::piecewise_constant)
        : grid(std::move(g)), values(std::move(v)), representation(r)
    {
    }

    int size() const { return static_cast<int>(values.size()); }
};

/// Cell averages of a profile.
Field project(const Profile& phi, PartitionPtr grid, int order = 8);
/// Cell-center samples of a profile.
Field sample(const Profile& phi, const PartitionPtr& grid);
/// Integrals of phi over each cell.
Eigen::VectorXd cell_integrals(const Profile& phi, const Partition& grid, int order = 8);

/// L2 norm of a piecewise-constant field.
double l2_norm(const Field& f);
/// (f, phi)_{L2} for a piecewise-constant field.
double inner(const Field& f, const Profile& phi, int order = 8);

/// Cell-averages a field onto a coarser uniform partition it refines.
Field restrict_to(const Field& fine, const PartitionPtr& coarse);

} // namespace nf
