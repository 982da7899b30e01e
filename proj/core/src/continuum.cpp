#include "speclab/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "speclab/rng.hpp"

namespace speclab {

ContinuumKind continuum_kind_from_name(const std::string& name) {
    if (name == "L" || name == "l" || name == "unnormalized") return ContinuumKind::L;
    if (name == "Nsym" || name == "nsym" || name == "sym") return ContinuumKind::Nsym;
    if (name == "Nrw" || name == "nrw" || name == "rw") return ContinuumKind::Nrw;
    throw ConfigError("unknown continuum operator: " + name);
}

namespace {

constexpr double kPi = 3.14159265358979323846;

int grid_dim(const GridMeasure& grid) { return grid.dim(); }

} // namespace

double AnalyticEigenpairs::evaluate(int j, const Eigen::VectorXd& x) const {
    if (j < 0 || j >= static_cast<int>(indices.size())) {
        throw InvalidArgument("analytic eigenfunction index out of range");
    }
    double value = 1.0;
    for (int i = 0; i < domain.dim; ++i) {
        const int m = indices[j][i];
        if (m == 0) continue;
        const double t = (x[i] - domain.lo[i]) / domain.side(i);
        value *= std::sqrt(2.0) * std::cos(kPi * m * t);
    }
    return value;
}

AnalyticEigenpairs analytic_neumann_box(const DensityField& density, ContinuumKind kind, int k) {
    if (density.kind() != DensityKind::Uniform) {
        throw InvalidArgument("analytic Neumann spectra need constant density; use the fd path");
    }
    if (k < 1) throw InvalidArgument("analytic spectrum: k must be positive");
    const Domain& dom = density.domain();
    // rho is constant 1/volume; L = -(1/rho) div(rho^2 grad) = -rho Delta
    const double factor = (kind == ContinuumKind::L) ? 1.0 / dom.volume() : 1.0;

    // every one of the k smallest eigenvalues has all multi-indices <= k
    struct Candidate {
        double value;
        std::array<int, 3> index;
    };
    std::vector<Candidate> candidates;
    std::array<int, 3> caps{0, 0, 0};
    for (int i = 0; i < dom.dim; ++i) caps[i] = k;
    for (int a = 0; a <= caps[0]; ++a) {
        for (int b = 0; b <= caps[1]; ++b) {
            for (int c = 0; c <= caps[2]; ++c) {
                const std::array<int, 3> m{a, b, c};
                double s = 0.0;
                for (int i = 0; i < dom.dim; ++i) {
                    const double q = m[i] / dom.side(i);
                    s += q * q;
                }
                candidates.push_back({factor * kPi * kPi * s, m});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
        if (x.value != y.value) return x.value < y.value;
        return x.index < y.index;
    });

    AnalyticEigenpairs out;
    out.domain = dom;
    out.spectrum.values.resize(k);
    out.indices.resize(k);
    for (int j = 0; j < k; ++j) {
        out.spectrum.values[j] = candidates[j].value;
        out.indices[j] = candidates[j].index;
    }
    group_eigenvalues(out.spectrum, 1e-9);
    return out;
}

FdSystem build_fd_system(const ContinuumOperator& op, const std::array<int, 3>& resolution) {
    const Domain& dom = op.density.domain();
    for (int i = 0; i < dom.dim; ++i) {
        if (resolution[i] < 8) throw InvalidArgument("fd resolution must be at least 8 per axis");
    }
    FdSystem sys;
    sys.grid = grid_discretize(op.density, resolution);
    const long total = sys.grid.size();
    sys.rho.resize(total);
    for (long c = 0; c < total; ++c) {
        sys.rho[c] = op.density(sys.grid.atoms.row(c).transpose());
    }
    double cellvol = 1.0;
    for (int i = 0; i < dom.dim; ++i) cellvol *= sys.grid.spacing[i];

    const std::array<int, 3>& counts = sys.grid.resolution;
    const long strides[3] = {static_cast<long>(counts[1]) * counts[2], counts[2], 1};

    // stiffness: a(u, v) = sum over interfaces rho^2_iface (du/dx)(dv/dx) vol,
    // rho^2 averaged arithmetically across the interface; missing neighbors
    // (mirrored ghosts) contribute nothing, which keeps row sums exactly zero
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(total) * (2 * dom.dim + 1));
    for (int a = 0; a < counts[0]; ++a) {
        for (int b = 0; b < counts[1]; ++b) {
            for (int c = 0; c < counts[2]; ++c) {
                const int idx[3] = {a, b, c};
                const long cell = (static_cast<long>(a) * counts[1] + b) * counts[2] + c;
                for (int axis = 0; axis < dom.dim; ++axis) {
                    if (idx[axis] + 1 >= counts[axis]) continue;
                    const long nb = cell + strides[axis];
                    const double h = sys.grid.spacing[axis];
                    const double flux =
                        0.5 * (sys.rho[cell] * sys.rho[cell] + sys.rho[nb] * sys.rho[nb]);
                    const double g = flux * cellvol / (h * h);
                    triplets.emplace_back(cell, cell, g);
                    triplets.emplace_back(nb, nb, g);
                    triplets.emplace_back(cell, nb, -g);
                    triplets.emplace_back(nb, cell, -g);
                }
            }
        }
    }
    sys.stiffness.resize(total, total);
    sys.stiffness.setFromTriplets(triplets.begin(), triplets.end());

    sys.mass.resize(total);
    for (long c = 0; c < total; ++c) {
        const double r = sys.rho[c];
        sys.mass[c] = (op.kind == ContinuumKind::L ? r : r * r) * cellvol;
    }
    return sys;
}

ContinuumEigs fd_weighted_eigs(const ContinuumOperator& op, const std::array<int, 3>& resolution,
                               int k, const EigenSolveOptions& options) {
    FdSystem sys = build_fd_system(op, resolution);
    EigenPairs pairs = smallest_k(sys.stiffness, k, sys.mass, options);

    ContinuumEigs out;
    out.spectrum = std::move(pairs.spectrum);
    out.basis = std::move(pairs.basis);
    out.grid = std::move(sys.grid);
    if (op.kind == ContinuumKind::Nsym) {
        // w = sqrt(rho) u shares the N^rw eigenvalues and is orthonormal
        // under the rho weight: <w_a, w_b>_rho = <u_a, u_b>_{rho^2}
        for (int j = 0; j < out.basis.vectors.cols(); ++j) {
            out.basis.vectors.col(j).array() *= sys.rho.array().sqrt();
        }
        out.basis.weights = out.basis.weights.cwiseQuotient(sys.rho);
    }
    group_eigenvalues_adaptive(out.spectrum, 1e-6);
    fix_signs(out.basis);
    return out;
}

ContinuumEigs fd_weighted_eigs(const ContinuumOperator& op, int resolution_per_axis, int k,
                               const EigenSolveOptions& options) {
    std::array<int, 3> res{1, 1, 1};
    for (int i = 0; i < op.density.domain().dim; ++i) res[i] = resolution_per_axis;
    return fd_weighted_eigs(op, res, k, options);
}

double nonlocal_energy(const GridMeasure& grid, const Eigen::VectorXd& u,
                       const RadialKernel& kernel, double eps) {
    if (grid.resolution[0] == 0) {
        throw InvalidArgument("nonlocal energy needs a grid-structured measure");
    }
    if (u.size() != grid.size()) {
        throw InvalidArgument("nonlocal energy: function/grid size mismatch");
    }
    const int dim = grid_dim(grid);
    double hmax = 0.0;
    for (int i = 0; i < dim; ++i) hmax = std::max(hmax, grid.spacing[i]);
    if (eps < 2.0 * hmax) {
        throw InvalidArgument("nonlocal energy: eps below twice the grid spacing");
    }
    const double radius = eps * kernel.support_radius();
    const std::array<int, 3>& counts = grid.resolution;
    int reach[3] = {0, 0, 0};
    for (int i = 0; i < dim; ++i) {
        reach[i] = static_cast<int>(std::floor(radius / grid.spacing[i])) + 1;
    }
    const long strides[3] = {static_cast<long>(counts[1]) * counts[2], counts[2], 1};

    double total = 0.0;
    for (int a = 0; a < counts[0]; ++a) {
        for (int b = 0; b < counts[1]; ++b) {
            for (int c = 0; c < counts[2]; ++c) {
                const int idx[3] = {a, b, c};
                const long cell = (static_cast<long>(a) * counts[1] + b) * counts[2] + c;
                for (int da = -reach[0]; da <= reach[0]; ++da) {
                    for (int db = -reach[1]; db <= reach[1]; ++db) {
                        for (int dc = -reach[2]; dc <= reach[2]; ++dc) {
                            const int d[3] = {da, db, dc};
                            bool inside = true;
                            double dist2 = 0.0;
                            for (int i = 0; i < 3; ++i) {
                                const int t = idx[i] + d[i];
                                if (t < 0 || t >= counts[i]) { inside = false; break; }
                                const double s = d[i] * grid.spacing[i];
                                dist2 += s * s;
                            }
                            if (!inside || (da == 0 && db == 0 && dc == 0)) continue;
                            const double dist = std::sqrt(dist2);
                            if (dist > radius) continue;
                            const double w = kernel.eval_scaled(dim, eps, dist);
                            if (w == 0.0) continue;
                            const long other =
                                cell + da * strides[0] + db * strides[1] + dc * strides[2];
                            const double du = u[cell] - u[other];
                            total += w * du * du * grid.weights[cell] * grid.weights[other];
                        }
                    }
                }
            }
        }
    }
    return total / (eps * eps);
}

ContinuumClustering continuum_spectral_clustering(const ContinuumOperator& op, int k,
                                                  const std::array<int, 3>& resolution,
                                                  bool normalized_rows,
                                                  const KMeansOptions& kmeans_options,
                                                  const EigenSolveOptions& eig_options) {
    if (k < 1) throw InvalidArgument("continuum clustering: k must be positive");
    ContinuumEigs eigs = fd_weighted_eigs(op, resolution, k, eig_options);
    const long total = eigs.grid.size();

    ContinuumClustering out;
    out.grid = eigs.grid;
    Eigen::MatrixXd embedding = eigs.basis.vectors.leftCols(k);

    std::vector<long> kept;
    kept.reserve(total);
    if (normalized_rows) {
        for (long c = 0; c < total; ++c) {
            const double norm = embedding.row(c).norm();
            if (norm < 1e-12) {
                out.excluded_mass += out.grid.weights[c];
            } else {
                embedding.row(c) /= norm;
                kept.push_back(c);
            }
        }
        out.excluded_warning = out.excluded_mass > 1e-3;
    } else {
        for (long c = 0; c < total; ++c) kept.push_back(c);
    }
    if (kept.empty()) throw SolverError("continuum clustering: every embedding row degenerate");

    WeightedPointSet pushed;
    pushed.points.resize(static_cast<int>(kept.size()), k);
    pushed.weights.resize(static_cast<int>(kept.size()));
    for (std::size_t r = 0; r < kept.size(); ++r) {
        pushed.points.row(static_cast<int>(r)) = embedding.row(kept[r]);
        pushed.weights[static_cast<int>(r)] = out.grid.weights[kept[r]];
    }
    pushed.weights /= pushed.weights.sum();

    out.kmeans = kmeans_minimize(pushed, k, kmeans_options);
    ClusterAssignment assignment = kmeans_assign(pushed, out.kmeans.centers);

    out.embedding = std::move(embedding);
    out.labels.assign(total, -1);
    for (std::size_t r = 0; r < kept.size(); ++r) {
        out.labels[kept[r]] = assignment.labels[r];
    }
    out.cluster_mass = Eigen::VectorXd::Zero(k);
    std::vector<std::vector<long>> members(k);
    for (long c = 0; c < total; ++c) {
        if (out.labels[c] < 0) continue;
        out.cluster_mass[out.labels[c]] += out.grid.weights[c];
        members[out.labels[c]].push_back(c);
    }
    out.restricted.resize(k);
    for (int j = 0; j < k; ++j) {
        auto& part = out.restricted[j];
        part.points.resize(static_cast<int>(members[j].size()), out.grid.dim());
        part.weights.resize(static_cast<int>(members[j].size()));
        for (std::size_t r = 0; r < members[j].size(); ++r) {
            part.points.row(static_cast<int>(r)) = out.grid.atoms.row(members[j][r]);
            part.weights[static_cast<int>(r)] = out.grid.weights[members[j][r]];
        }
    }
    return out;
}

CourantFischerReport courant_fischer_check(const ContinuumOperator& op,
                                           const std::array<int, 3>& resolution, int k,
                                           int trials, std::uint64_t seed) {
    if (k < 1) throw InvalidArgument("Courant-Fischer: k must be positive");
    FdSystem sys = build_fd_system(op, resolution);
    const long total = sys.grid.size();
    if (total > 4096) {
        throw InvalidArgument("Courant-Fischer check uses a dense oracle; keep the grid <= 4096 cells");
    }

    // standard form through the mass congruence: C = D^{-1/2} A D^{-1/2}
    Eigen::VectorXd inv_sqrt = sys.mass.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd dense = Eigen::MatrixXd(sys.stiffness);
    dense = inv_sqrt.asDiagonal() * dense * inv_sqrt.asDiagonal();
    dense = 0.5 * (dense + dense.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(dense);
    if (full.info() != Eigen::Success) throw SolverError("Courant-Fischer: dense solve failed");
    const double lambda_k = full.eigenvalues()[k - 1];
    const double scale = std::max(std::abs(lambda_k), 1.0);

    auto constrained_min = [&](const Eigen::MatrixXd& constraints) {
        const long m = constraints.cols();
        if (m == 0) return full.eigenvalues()[0];
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(constraints);
        Eigen::MatrixXd q = qr.householderQ();
        Eigen::MatrixXd complement = q.rightCols(total - m);
        Eigen::MatrixXd reduced = complement.transpose() * dense * complement;
        reduced = 0.5 * (reduced + reduced.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
        if (solver.info() != Eigen::Success) {
            throw SolverError("Courant-Fischer: deflated solve failed");
        }
        return solver.eigenvalues()[0];
    };

    CourantFischerReport report;
    report.lambda_k = lambda_k;
    report.max_constrained_min = -std::numeric_limits<double>::infinity();
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        Eigen::MatrixXd constraints(total, k - 1);
        for (long r = 0; r < total; ++r) {
            for (int c = 0; c < k - 1; ++c) constraints(r, c) = rng.normal();
        }
        const double value = constrained_min(constraints);
        report.max_constrained_min = std::max(report.max_constrained_min, value);
        report.max_violation =
            std::max(report.max_violation, std::max(0.0, (value - lambda_k) / scale));
    }
    // the supremum is attained at the leading eigenvectors
    const double attained = constrained_min(full.eigenvectors().leftCols(k - 1));
    report.equality_gap = std::abs(attained - lambda_k) / scale;
    report.passed = report.max_violation <= 1e-8 && report.equality_gap <= 1e-8;
    return report;
}

} // namespace speclab
