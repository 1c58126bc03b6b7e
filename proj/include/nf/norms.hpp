#pragma once

#include <Eigen/Dense>

#include "nf/field.hpp"

namespace nf {

/// Spatial norm for error measurements: alpha = 0 is L2, alpha > 0 the
/// cosine-spectral surrogate of the dual Sobolev norm H^-alpha on a 1D interval.
struct NormSpec {
    double alpha = 0.0;
    int modes = 256;

    /// Kernel integrability exponent q(alpha, d): 2d / (d + 2 alpha) below
    /// d/2, 1 - 1e-3 at d/2, 1 above.
    double q(int d) const;
};

/// Exact L2 norm of the difference; when the grids differ, the finer field is
/// first cell-averaged onto the coarser one.
double l2_error(const Field& a, const Field& b);

/// Integrals of the L2-orthonormal Neumann cosine basis over each cell:
/// row j, column k holds int_{D_k} e_j(x) dx with e_0 = 1/sqrt(L),
/// e_j = sqrt(2/L) cos(j pi (x - a) / L). 1D uniform or nonuniform partitions.
Eigen::MatrixXd cosine_cell_integrals(const Partition& grid, int modes);

/// Weights (1 + (pi j / L)^2)^-alpha for j = 0..modes.
Eigen::VectorXd dual_sobolev_weights(const Partition& grid, const NormSpec& spec);

/// sqrt(sum_j w_j c_j^2) with c_j the exact cosine coefficients of a - b.
double dual_sobolev_error(const Field& a, const Field& b, const NormSpec& spec);

} // namespace nf
