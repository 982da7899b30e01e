#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "speclab/config.hpp"
#include "speclab/continuum.hpp"
#include "speclab/eigensolver.hpp"
#include "speclab/geometry.hpp"
#include "speclab/graph.hpp"
#include "speclab/kernels.hpp"
#include "speclab/kmeans.hpp"
#include "speclab/transport.hpp"

namespace speclab {

/// eps_n = c * r(n)^theta where r(n) is the critical connectivity rate:
/// log(n)/n for d=1, (log n)^{3/4}/sqrt(n) for d=2, (log n / n)^{1/d} for
/// d >= 3. theta < 1 makes eps_n/r(n) -> infinity (admissible); theta >= 1
/// is flagged sub-critical and is only meaningful for the connectivity runs.
struct ScheduleResult {
    double eps = 0.0;
    bool admissible = false;
};

ScheduleResult epsilon_schedule(int n, int dim, double prefactor, double exponent);

/// Laplacian eigenpairs with eigenvectors normalized in L^2(nu_n): the
/// returned eigenvalues are those of L / N^sym / N^rw themselves.
EigenPairs laplacian_eigs(const WeightedGraph& graph, LaplacianKind kind, int k,
                          const EigenSolveOptions& options = {});

/// Algorithms 1-3: spectral embedding + weighted k-means on the empirical
/// measure, labels pulled back to the sample.
struct DiscreteClustering {
    Spectrum spectrum;
    EigenBasis basis;       // embedding-generating eigenvectors (rw vectors for kind Rw)
    Eigen::MatrixXd embedding;  // n x k rows actually clustered
    std::vector<int> labels;    // per sample; -1 for rows excluded by the sym variant
    Eigen::VectorXd cluster_mass;
    std::vector<WeightedPointSet> restricted;  // nu_n restricted to each cluster (unnormalized)
    KMeansResult kmeans;
    int components = 1;
    double excluded_mass = 0.0;
};

DiscreteClustering spectral_cluster_discrete(const PointCloud& cloud, const RadialKernel& kernel,
                                             double eps, LaplacianKind kind, int k,
                                             const KMeansOptions& kmeans_options = {},
                                             const EigenSolveOptions& eig_options = {});

/// Everything a sweep needs, parsed from a Config.
struct ExperimentConfig {
    std::string name = "sweep";
    Domain domain = Domain::unit_box(2);
    DensityField density = DensityField::uniform(Domain::unit_box(2));
    RadialKernel kernel{KernelKind::Indicator};
    LaplacianKind laplacian = LaplacianKind::Unnormalized;
    int k = 2;
    std::vector<int> n_values{1000, 2000};
    double prefactor = 1.0;
    double exponent = 0.9;
    std::vector<std::uint64_t> seeds{1};
    std::array<int, 3> grid_resolution{128, 128, 1};

    bool compare_subspace = false;  // TL2 eigenvector comparison per trial
    bool compare_clusters = false;  // cluster-consistency W2 per trial
    int transport_budget = 3000;    // exact-OT support cap
    std::array<int, 3> cluster_resolution{40, 40, 1};  // grid for cluster W2 comparisons

    std::vector<double> connectivity_prefactors{0.3, 2.0};
    double connectivity_exponent = 1.0;

    int threads = 1;
    bool deterministic_output = true;  // zero the wall_ms column
    std::string out_dir = ".";

    KMeansOptions kmeans;
    EigenSolveOptions eig;
};

ExperimentConfig parse_experiment_config(const Config& config);

/// One (n, seed) trial, flattened to per-eigenvalue rows by the report module.
struct TrialRecord {
    int n = 0;
    std::uint64_t seed = 0;
    double eps = 0.0;
    std::string kind;  // laplacian kind name
    std::vector<double> eigenvalues;
    std::vector<double> rescaled;
    std::vector<double> references;    // sigma_eta lambda_k or (sigma/beta) tau_k
    std::vector<double> rel_errors;
    std::vector<double> subspace_tl2;  // per index, the value of its continuum group; NaN if skipped
    double cluster_w2_total = std::numeric_limits<double>::quiet_NaN();
    int components = 0;
    double wall_ms = 0.0;
    std::string error;  // non-empty when the trial failed; other fields empty
};

struct SweepResult {
    ExperimentConfig config;
    KernelConstants constants;
    std::vector<TrialRecord> records;  // sorted by (n, seed)
    bool continuum_clustering_unique = true;
};

SweepResult convergence_sweep(const ExperimentConfig& config);

struct ConnectivityRow {
    int n = 0;
    double prefactor = 0.0;
    double exponent = 0.0;
    double eps = 0.0;
    int seeds = 0;
    int disconnected = 0;
    double frequency = 0.0;
};

std::vector<ConnectivityRow> connectivity_experiment(const ExperimentConfig& config);

/// Sum over matched labels of W2 between the normalized restricted measures,
/// minimized over label permutations (exhaustive, k <= 8).
double matched_cluster_distance(const std::vector<WeightedPointSet>& discrete,
                                const std::vector<WeightedPointSet>& continuum,
                                const TransportOptions& options = {});

} // namespace speclab
