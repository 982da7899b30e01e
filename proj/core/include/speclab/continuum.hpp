#pragma once

#include <array>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "speclab/eigensolver.hpp"
#include "speclab/geometry.hpp"
#include "speclab/kernels.hpp"
#include "speclab/kmeans.hpp"

namespace speclab {

/// Continuum limit operators: L u = -(1/rho) div(rho^2 grad u),
/// N^rw u = -(1/rho^2) div(rho^2 grad u), and N^sym (same eigenvalues as
/// N^rw through the w = sqrt(rho) u conjugation).
enum class ContinuumKind { L, Nsym, Nrw };

ContinuumKind continuum_kind_from_name(const std::string& name);

struct ContinuumOperator {
    ContinuumKind kind = ContinuumKind::L;
    DensityField density;
};

/// Closed-form Neumann eigenpairs on a box with constant density:
/// lambda = factor * pi^2 sum_i (m_i / l_i)^2 over multi-indices m, with
/// factor = mean density for L and 1 for the normalized kinds.
struct AnalyticEigenpairs {
    Spectrum spectrum;
    std::vector<std::array<int, 3>> indices;  // multi-index per eigenvalue
    Domain domain;

    /// Eigenfunction j at x, unit L^2(nu) norm: prod_i sqrt(2)^{[m_i>0]}
    /// cos(pi m_i (x_i - lo_i) / l_i).
    double evaluate(int j, const Eigen::VectorXd& x) const;
};

AnalyticEigenpairs analytic_neumann_box(const DensityField& density, ContinuumKind kind, int k);

/// Divergence-form second-order finite differences on the cell grid:
/// interface flux coefficients are arithmetic means of the adjacent rho^2
/// values, Neumann walls by mirrored ghost cells (zero boundary flux), and a
/// diagonal mass of rho * cellvol (L) or rho^2 * cellvol (N^rw).
struct FdSystem {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd mass;
    Eigen::VectorXd rho;  // density at cell centers
    GridMeasure grid;
};

FdSystem build_fd_system(const ContinuumOperator& op, const std::array<int, 3>& resolution);

struct ContinuumEigs {
    Spectrum spectrum;
    EigenBasis basis;  // grid functions column-wise, orthonormal under basis.weights
    GridMeasure grid;
};

ContinuumEigs fd_weighted_eigs(const ContinuumOperator& op, const std::array<int, 3>& resolution,
                               int k, const EigenSolveOptions& options = {});
ContinuumEigs fd_weighted_eigs(const ContinuumOperator& op, int resolution_per_axis, int k,
                               const EigenSolveOptions& options = {});

/// Nonlocal energy G_eps(u) = (1/eps^2) integral integral eta_eps(x-y)
/// |u(x)-u(y)|^2 rho(x) rho(y) dx dy on the grid quadrature.
double nonlocal_energy(const GridMeasure& grid, const Eigen::VectorXd& u,
                       const RadialKernel& kernel, double eps);

/// Continuum spectral clustering: push the grid measure through the first-k
/// spectral embedding, k-means there, pull the labels back to the grid.
struct ContinuumClustering {
    std::vector<int> labels;  // per grid cell; -1 for excluded cells
    Eigen::VectorXd cluster_mass;
    std::vector<WeightedPointSet> restricted;  // spatial measures nu restricted to G_i (unnormalized)
    KMeansResult kmeans;
    Eigen::MatrixXd embedding;  // rows kept in the k-means measure
    GridMeasure grid;
    double excluded_mass = 0.0;   // mass of near-zero rows dropped by the normalized variant
    bool excluded_warning = false;  // excluded_mass > 1e-3
};

ContinuumClustering continuum_spectral_clustering(const ContinuumOperator& op, int k,
                                                  const std::array<int, 3>& resolution,
                                                  bool normalized_rows,
                                                  const KMeansOptions& kmeans_options = {},
                                                  const EigenSolveOptions& eig_options = {});

/// Courant-Fischer check on the fd system: for random (k-1)-dimensional
/// constraint subspaces S, min over the mass-orthogonal complement of the
/// Rayleigh quotient never exceeds lambda_k beyond tolerance, with equality
/// when S spans the leading eigenvectors.
struct CourantFischerReport {
    double lambda_k = 0.0;
    double max_constrained_min = 0.0;  // over the random trials
    double max_violation = 0.0;        // max(0, constrained_min - lambda_k), relative
    double equality_gap = 0.0;         // |min - lambda_k| for S = leading eigenvectors, relative
    bool passed = false;
};

CourantFischerReport courant_fischer_check(const ContinuumOperator& op,
                                           const std::array<int, 3>& resolution, int k,
                                           int trials, std::uint64_t seed);

} // namespace speclab
