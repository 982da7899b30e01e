#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "speclab/errors.hpp"

namespace speclab {

/// Ascending eigenvalues with multiplicity grouping.
struct Spectrum {
    Eigen::VectorXd values;  // ascending, repeated by multiplicity

    struct Group {
        int offset = 0;  // index of the first member
        int size = 1;    // multiplicity
        double value = 0.0;  // representative (mean of members)
    };
    std::vector<Group> groups;
    double grouping_rtol = 1e-6;
};

/// k vectors orthonormal under the diagonal inner product <u,v> = sum_i w_i u_i v_i.
struct EigenBasis {
    Eigen::MatrixXd vectors;  // n x k, column j pairs with Spectrum.values[j]
    Eigen::VectorXd weights;  // inner-product weight vector
    Eigen::VectorXd residuals;  // per-pair relative residuals from the solver
};

struct EigenPairs {
    Spectrum spectrum;
    EigenBasis basis;
};

struct EigenSolveOptions {
    double residual_rtol = 1e-8;
    int max_iterations = 300;
    /// Problems at or below this size use a dense decomposition.
    int dense_threshold = 512;
    /// Extra subspace vectors carried by the iterative path.
    int subspace_margin = 15;
    std::uint64_t seed = 12345;  // start block for the iterative path
};

/// Smallest k eigenpairs of the generalized symmetric problem
/// A u = lambda diag(mass) u, eigenvectors orthonormal under mass.
/// Solved through the diag(1/sqrt(mass)) congruence so one symmetric solver
/// serves every inner product. Dense below the threshold, shift-inverted
/// subspace iteration above it.
EigenPairs smallest_k(const Eigen::SparseMatrix<double>& matrix, int k,
                      const Eigen::VectorXd& mass, const EigenSolveOptions& options = {});

/// Force the dense (oracle) path regardless of size; used for cross-checks.
EigenPairs smallest_k_dense(const Eigen::SparseMatrix<double>& matrix, int k,
                            const Eigen::VectorXd& mass);

/// Random-walk eigenvectors from the symmetric conjugate: u = w / sqrt(D),
/// renormalized to unit norm under the supplied inner-product weights.
EigenBasis rw_from_sym(const EigenBasis& sym_basis, const Eigen::VectorXd& degrees);

/// Merge consecutive eigenvalues whose gap is at most rtol * max(|lambda|, floor).
void group_eigenvalues(Spectrum& spectrum, double rtol);

/// Gap-based grouping for noisy discrete spectra: a boundary requires a gap
/// at least gap_factor times the running within-group spread.
void group_eigenvalues_adaptive(Spectrum& spectrum, double rtol, double gap_factor = 10.0);

/// Convergence-theorem rescalings: 2*lambda/(n*eps^2) for the unnormalized
/// Laplacian, 2*tau/eps^2 for the normalized ones.
double rescale_eigenvalue(double lambda, int n, double eps, bool normalized);

/// Projection of v onto the span of the group's eigenvectors, with respect
/// to the basis' weighted inner product.
Eigen::VectorXd spectral_projection(const EigenBasis& basis, const Spectrum::Group& group,
                                    const Eigen::VectorXd& v);

/// Frobenius distance between the weighted orthogonal projections onto two
/// equal-dimension groups: sqrt(2 g - 2 ||A^T W B||_F^2).
double subspace_distance(const Eigen::MatrixXd& basis_a, const Eigen::MatrixXd& basis_b,
                         const Eigen::VectorXd& weights);

/// Flip signs: column 0 gets nonnegative weighted mean, later columns get a
/// positive first coordinate of significant magnitude.
void fix_signs(EigenBasis& basis);

/// Flip each column of `basis` to maximize its weighted inner product with
/// the matching column of `reference`.
void align_signs(EigenBasis& basis, const Eigen::MatrixXd& reference);

} // namespace speclab
