#include "speclab/eigensolver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "speclab/rng.hpp"

namespace speclab {

namespace {

void validate_inputs(const Eigen::SparseMatrix<double>& matrix, int k,
                     const Eigen::VectorXd& mass) {
    const int n = static_cast<int>(matrix.rows());
    if (matrix.cols() != n) throw InvalidArgument("smallest_k: matrix must be square");
    if (k < 1 || k > n) throw InvalidArgument("smallest_k: require 1 <= k <= n");
    if (mass.size() != n) throw InvalidArgument("smallest_k: mass vector length mismatch");
    for (int i = 0; i < n; ++i) {
        if (!(mass[i] > 0.0)) throw InvalidArgument("smallest_k: mass must be strictly positive");
    }
}

/// diag(1/sqrt(mass)) * A * diag(1/sqrt(mass))
Eigen::SparseMatrix<double> congruence(const Eigen::SparseMatrix<double>& matrix,
                                       const Eigen::VectorXd& inv_sqrt_mass) {
    Eigen::SparseMatrix<double> scaled = matrix;
    for (int col = 0; col < scaled.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled, col); it; ++it) {
            it.valueRef() *= inv_sqrt_mass[it.row()] * inv_sqrt_mass[it.col()];
        }
    }
    return scaled;
}

double gershgorin_norm(const Eigen::SparseMatrix<double>& matrix) {
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(matrix.rows());
    for (int col = 0; col < matrix.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it) {
            row_sums[it.row()] += std::abs(it.value());
        }
    }
    return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

EigenPairs finish(const Eigen::VectorXd& values, const Eigen::MatrixXd& y_vectors,
                  const Eigen::VectorXd& inv_sqrt_mass, const Eigen::VectorXd& mass,
                  const Eigen::VectorXd& residuals) {
    EigenPairs out;
    out.spectrum.values = values;
    group_eigenvalues(out.spectrum, out.spectrum.grouping_rtol);
    out.basis.vectors = inv_sqrt_mass.asDiagonal() * y_vectors;
    out.basis.weights = mass;
    out.basis.residuals = residuals;
    fix_signs(out.basis);
    return out;
}

} // namespace

EigenPairs smallest_k_dense(const Eigen::SparseMatrix<double>& matrix, int k,
                            const Eigen::VectorXd& mass) {
    validate_inputs(matrix, k, mass);
    const int n = static_cast<int>(matrix.rows());
    Eigen::VectorXd inv_sqrt_mass = mass.array().rsqrt();
    Eigen::MatrixXd dense = Eigen::MatrixXd(matrix);
    dense = inv_sqrt_mass.asDiagonal() * dense * inv_sqrt_mass.asDiagonal();
    dense = 0.5 * (dense + dense.transpose().eval());  // scrub rounding asymmetry
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) throw SolverError("dense eigendecomposition failed");
    Eigen::VectorXd values = solver.eigenvalues().head(k);
    Eigen::MatrixXd y = solver.eigenvectors().leftCols(k);
    Eigen::VectorXd residuals = Eigen::VectorXd::Zero(k);
    const double scale = std::max(gershgorin_norm(matrix), 1e-300);
    for (int j = 0; j < k; ++j) {
        residuals[j] = (dense * y.col(j) - values[j] * y.col(j)).norm() / scale;
    }
    (void)n;
    return finish(values, y, inv_sqrt_mass, mass, residuals);
}

EigenPairs smallest_k(const Eigen::SparseMatrix<double>& matrix, int k,
                      const Eigen::VectorXd& mass, const EigenSolveOptions& options) {
    validate_inputs(matrix, k, mass);
    const int n = static_cast<int>(matrix.rows());
    if (n <= options.dense_threshold) {
        return smallest_k_dense(matrix, k, mass);
    }

    Eigen::VectorXd inv_sqrt_mass = mass.array().rsqrt();
    Eigen::SparseMatrix<double> sym = congruence(matrix, inv_sqrt_mass);
    const double norm_estimate = std::max(gershgorin_norm(sym), 1e-300);

    // Shift-inverted subspace iteration with Rayleigh-Ritz extraction. The
    // tiny positive shift keeps the PSD factorization well posed while the
    // inverse steeply amplifies the smallest end of the spectrum; multiple
    // vectors per eigenvalue make multiplicities unproblematic.
    const double shift = 1e-6 * norm_estimate;
    Eigen::SparseMatrix<double> shifted = sym;
    Eigen::SparseMatrix<double> identity(n, n);
    identity.setIdentity();
    shifted += shift * identity;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(shifted);
    if (factor.info() != Eigen::Success) {
        throw SolverError("shifted factorization failed; matrix may be indefinite");
    }

    const int q = std::min(n, k + options.subspace_margin);
    Rng rng(options.seed);
    Eigen::MatrixXd block(n, q);
    for (int j = 0; j < q; ++j) {
        for (int i = 0; i < n; ++i) block(i, j) = rng.normal();
    }

    Eigen::VectorXd values;
    Eigen::MatrixXd ritz;
    Eigen::VectorXd residuals = Eigen::VectorXd::Constant(k, 1.0);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        block = factor.solve(block);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
        Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, q);
        Eigen::MatrixXd projected = basis.transpose() * (sym * basis);
        projected = 0.5 * (projected + projected.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(projected);
        if (small.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz solve failed");
        values = small.eigenvalues();
        ritz = basis * small.eigenvectors();

        bool converged = true;
        for (int j = 0; j < k; ++j) {
            residuals[j] = (sym * ritz.col(j) - values[j] * ritz.col(j)).norm() / norm_estimate;
            if (residuals[j] > options.residual_rtol) converged = false;
        }
        if (converged) {
            return finish(values.head(k), ritz.leftCols(k), inv_sqrt_mass, mass,
                          residuals.head(k));
        }
        block = ritz;
    }
    throw SolverError("eigensolver did not converge; best residual " +
                      std::to_string(residuals.maxCoeff()));
}

EigenBasis rw_from_sym(const EigenBasis& sym_basis, const Eigen::VectorXd& degrees) {
    const int n = static_cast<int>(sym_basis.vectors.rows());
    if (degrees.size() != n) throw InvalidArgument("rw_from_sym: degree vector length mismatch");
    EigenBasis out = sym_basis;
    Eigen::VectorXd inv_sqrt = degrees.array().rsqrt();
    for (int j = 0; j < out.vectors.cols(); ++j) {
        Eigen::VectorXd u = sym_basis.vectors.col(j).cwiseProduct(inv_sqrt);
        const double norm = std::sqrt(u.array().square().matrix().dot(sym_basis.weights));
        out.vectors.col(j) = u / norm;
    }
    return out;
}

void group_eigenvalues(Spectrum& spectrum, double rtol) {
    if (rtol <= 0.0) throw InvalidArgument("group_eigenvalues: rtol must be positive");
    constexpr double kFloor = 1e-12;
    spectrum.grouping_rtol = rtol;
    spectrum.groups.clear();
    const int k = static_cast<int>(spectrum.values.size());
    int start = 0;
    for (int i = 1; i <= k; ++i) {
        const bool boundary =
            i == k || (spectrum.values[i] - spectrum.values[i - 1] >
                       rtol * std::max(std::abs(spectrum.values[i]), kFloor));
        if (boundary) {
            Spectrum::Group g;
            g.offset = start;
            g.size = i - start;
            g.value = spectrum.values.segment(start, g.size).mean();
            spectrum.groups.push_back(g);
            start = i;
        }
    }
}

void group_eigenvalues_adaptive(Spectrum& spectrum, double rtol, double gap_factor) {
    if (rtol <= 0.0) throw InvalidArgument("group_eigenvalues: rtol must be positive");
    constexpr double kFloor = 1e-12;
    spectrum.grouping_rtol = rtol;
    spectrum.groups.clear();
    const int k = static_cast<int>(spectrum.values.size());
    int start = 0;
    for (int i = 1; i <= k; ++i) {
        bool boundary = i == k;
        if (!boundary) {
            const double gap = spectrum.values[i] - spectrum.values[i - 1];
            const double spread = spectrum.values[i - 1] - spectrum.values[start];
            // a split needs a gap that is both non-trivial and much larger
            // than the spread accumulated inside the group so far
            boundary = gap > rtol * std::max(std::abs(spectrum.values[i]), kFloor) &&
                       gap >= gap_factor * std::max(spread, kFloor);
        }
        if (boundary) {
            Spectrum::Group g;
            g.offset = start;
            g.size = i - start;
            g.value = spectrum.values.segment(start, g.size).mean();
            spectrum.groups.push_back(g);
            start = i;
        }
    }
}

double rescale_eigenvalue(double lambda, int n, double eps, bool normalized) {
    if (n < 1) throw InvalidArgument("rescale: n must be at least 1");
    if (eps <= 0.0) throw InvalidArgument("rescale: eps must be positive");
    if (normalized) return 2.0 * lambda / (eps * eps);
    return 2.0 * lambda / (static_cast<double>(n) * eps * eps);
}

Eigen::VectorXd spectral_projection(const EigenBasis& basis, const Spectrum::Group& group,
                                    const Eigen::VectorXd& v) {
    if (v.size() != basis.vectors.rows()) {
        throw InvalidArgument("spectral_projection: vector length mismatch");
    }
    Eigen::VectorXd result = Eigen::VectorXd::Zero(v.size());
    for (int j = group.offset; j < group.offset + group.size; ++j) {
        const double coeff = basis.vectors.col(j).cwiseProduct(basis.weights).dot(v);
        result += coeff * basis.vectors.col(j);
    }
    return result;
}

double subspace_distance(const Eigen::MatrixXd& basis_a, const Eigen::MatrixXd& basis_b,
                         const Eigen::VectorXd& weights) {
    if (basis_a.cols() != basis_b.cols()) {
        throw InvalidArgument("subspace_distance: group dimensions differ");
    }
    if (basis_a.rows() != basis_b.rows() || basis_a.rows() != weights.size()) {
        throw InvalidArgument("subspace_distance: vector length mismatch");
    }
    const double g = static_cast<double>(basis_a.cols());
    Eigen::MatrixXd cross = basis_a.transpose() * weights.asDiagonal() * basis_b;
    const double value = 2.0 * g - 2.0 * cross.squaredNorm();
    return std::sqrt(std::max(value, 0.0));
}

void fix_signs(EigenBasis& basis) {
    for (int j = 0; j < basis.vectors.cols(); ++j) {
        auto col = basis.vectors.col(j);
        double marker = 0.0;
        if (j == 0) {
            marker = col.dot(basis.weights);
        }
        if (marker == 0.0) {
            const double top = col.cwiseAbs().maxCoeff();
            for (int i = 0; i < col.size(); ++i) {
                if (std::abs(col[i]) > 1e-8 * top) {
                    marker = col[i];
                    break;
                }
            }
        }
        if (marker < 0.0) basis.vectors.col(j) = -col;
    }
}

void align_signs(EigenBasis& basis, const Eigen::MatrixXd& reference) {
    if (reference.cols() < basis.vectors.cols() || reference.rows() != basis.vectors.rows()) {
        throw InvalidArgument("align_signs: reference shape mismatch");
    }
    for (int j = 0; j < basis.vectors.cols(); ++j) {
        const double inner =
            basis.vectors.col(j).cwiseProduct(basis.weights).dot(reference.col(j));
        if (inner < 0.0) basis.vectors.col(j) = -basis.vectors.col(j);
    }
}

} // namespace speclab
