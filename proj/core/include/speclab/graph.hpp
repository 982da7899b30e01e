#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "speclab/geometry.hpp"
#include "speclab/kernels.hpp"

namespace speclab {

/// Sparse symmetric matrix in compressed form. Built symmetric by
/// construction; consumers may rely on exact symmetry.
using SparseSym = Eigen::SparseMatrix<double>;

enum class LaplacianKind { Unnormalized, Sym, Rw };

LaplacianKind laplacian_kind_from_name(const std::string& name);
std::string laplacian_kind_name(LaplacianKind kind);

/// Similarity graph on a point cloud: W_ij = eta_eps(x_i - x_j), diagonal
/// included, with degrees D_ii = sum_j W_ij.
struct WeightedGraph {
    PointCloud cloud;
    RadialKernel kernel{KernelKind::Indicator};
    double eps = 0.0;
    SparseSym weights;        // symmetric, includes the diagonal
    Eigen::VectorXd degrees;  // row sums of W, including the j = i term
    bool include_diagonal = true;

    int size() const { return static_cast<int>(degrees.size()); }
};

struct GraphBuildOptions {
    /// Refuse to assemble if the estimated weight storage exceeds this.
    std::size_t memory_budget_bytes = std::size_t(2) * 1024 * 1024 * 1024;
    /// Sensitivity flag: drop the W_ii = eta_eps(0) term from the degrees.
    bool include_diagonal = true;
};

/// Assemble the similarity graph with a uniform cell-grid fixed-radius search.
WeightedGraph build_graph(const PointCloud& cloud, const RadialKernel& kernel, double eps,
                          const GraphBuildOptions& options = {});

/// Brute-force O(n^2) assembly; the oracle the cell-grid path is tested against.
WeightedGraph build_graph_bruteforce(const PointCloud& cloud, const RadialKernel& kernel,
                                     double eps, const GraphBuildOptions& options = {});

/// One of the three Laplacians. The random-walk kind is never stored
/// unsymmetrically: it is represented by the symmetric matrix together with
/// the degrees, and eigenvectors are recovered through the D^{1/2} conjugation.
struct Laplacian {
    LaplacianKind kind = LaplacianKind::Unnormalized;
    SparseSym matrix;         // L for Unnormalized; N^sym for Sym and Rw
    Eigen::VectorXd degrees;
};

Laplacian laplacian(const WeightedGraph& graph, LaplacianKind kind);

/// G_{n,eps}(u) = (1 / (eps^2 n^2)) sum_{i,j} W_ij (u_i - u_j)^2.
double dirichlet_energy(const WeightedGraph& graph, const Eigen::VectorXd& u);

/// (1 / (n eps^2)) sum_{i,j} W_ij (u_i / sqrt(D_ii) - u_j / sqrt(D_jj))^2.
double normalized_dirichlet_energy(const WeightedGraph& graph, const Eigen::VectorXd& u);

struct ComponentLabels {
    int count = 0;
    std::vector<int> labels;  // component id per node, 0-based
};

ComponentLabels connected_components(const WeightedGraph& graph);

/// Triplet text export: "i j w" per line, 0-based, i <= j, off-diagonal upper
/// triangle plus the diagonal.
void write_graph_triplets(const WeightedGraph& graph, const std::string& path);

} // namespace speclab
