#include "speclab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

namespace speclab {

ScheduleResult epsilon_schedule(int n, int dim, double prefactor, double exponent) {
    if (n < 2) throw InvalidArgument("epsilon schedule: n must be at least 2");
    if (!(prefactor > 0.0)) throw InvalidArgument("epsilon schedule: prefactor must be positive");
    if (!(exponent > 0.0)) throw InvalidArgument("epsilon schedule: exponent must be positive");
    const double logn = std::log(static_cast<double>(n));
    double rate = 0.0;
    switch (dim) {
        case 1: rate = logn / n; break;
        case 2: rate = std::pow(logn, 0.75) / std::sqrt(static_cast<double>(n)); break;
        case 3: rate = std::pow(logn / n, 1.0 / 3.0); break;
        default: throw InvalidArgument("epsilon schedule: dim must be 1, 2, or 3");
    }
    ScheduleResult out;
    out.eps = prefactor * std::pow(rate, exponent);
    out.admissible = exponent < 1.0;
    return out;
}

EigenPairs laplacian_eigs(const WeightedGraph& graph, LaplacianKind kind, int k,
                          const EigenSolveOptions& options) {
    const int n = graph.size();
    if (k > n) throw InvalidArgument("laplacian eigs: k exceeds the graph size");
    const Laplacian lap = laplacian(graph, kind);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    EigenPairs pairs = smallest_k(lap.matrix, k, ones, options);
    // rescale to unit L^2(nu_n) norm: weights 1/n, vectors * sqrt(n)
    pairs.basis.vectors *= std::sqrt(static_cast<double>(n));
    pairs.basis.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
    if (kind == LaplacianKind::Rw) {
        pairs.basis = rw_from_sym(pairs.basis, lap.degrees);
    }
    fix_signs(pairs.basis);
    return pairs;
}

namespace {

/// Embedding + k-means + pullback shared by the discrete clustering entry
/// point and the sweep (which already holds the eigenpairs).
DiscreteClustering cluster_from_pairs(const PointCloud& cloud, EigenPairs pairs,
                                      LaplacianKind kind, int k,
                                      const KMeansOptions& kmeans_options) {
    const int n = cloud.size();
    DiscreteClustering out;
    out.spectrum = std::move(pairs.spectrum);
    out.basis = std::move(pairs.basis);

    Eigen::MatrixXd embedding = out.basis.vectors.leftCols(k);
    std::vector<int> kept;
    kept.reserve(n);
    if (kind == LaplacianKind::Sym) {
        // Algorithm 2 normalizes the embedding rows; near-zero rows are
        // excluded and their mass reported
        for (int i = 0; i < n; ++i) {
            const double norm = embedding.row(i).norm();
            if (norm < 1e-12) {
                out.excluded_mass += 1.0 / n;
            } else {
                embedding.row(i) /= norm;
                kept.push_back(i);
            }
        }
    } else {
        for (int i = 0; i < n; ++i) kept.push_back(i);
    }
    if (kept.empty()) throw SolverError("spectral clustering: every embedding row degenerate");

    WeightedPointSet embedded;
    embedded.points.resize(static_cast<int>(kept.size()), k);
    embedded.weights =
        Eigen::VectorXd::Constant(static_cast<int>(kept.size()), 1.0 / kept.size());
    for (std::size_t r = 0; r < kept.size(); ++r) {
        embedded.points.row(static_cast<int>(r)) = embedding.row(kept[r]);
    }

    out.kmeans = kmeans_minimize(embedded, k, kmeans_options);
    const ClusterAssignment assignment = kmeans_assign(embedded, out.kmeans.centers);

    out.embedding = std::move(embedding);
    out.labels.assign(n, -1);
    for (std::size_t r = 0; r < kept.size(); ++r) out.labels[kept[r]] = assignment.labels[r];

    out.cluster_mass = Eigen::VectorXd::Zero(k);
    std::vector<std::vector<int>> members(k);
    for (int i = 0; i < n; ++i) {
        if (out.labels[i] < 0) continue;
        out.cluster_mass[out.labels[i]] += 1.0 / n;
        members[out.labels[i]].push_back(i);
    }
    out.restricted.resize(k);
    for (int j = 0; j < k; ++j) {
        auto& part = out.restricted[j];
        part.points.resize(static_cast<int>(members[j].size()), cloud.dim());
        part.weights =
            Eigen::VectorXd::Constant(static_cast<int>(members[j].size()), 1.0 / n);
        for (std::size_t r = 0; r < members[j].size(); ++r) {
            part.points.row(static_cast<int>(r)) = cloud.points.row(members[j][r]);
        }
    }
    return out;
}

} // namespace

DiscreteClustering spectral_cluster_discrete(const PointCloud& cloud, const RadialKernel& kernel,
                                             double eps, LaplacianKind kind, int k,
                                             const KMeansOptions& kmeans_options,
                                             const EigenSolveOptions& eig_options) {
    if (k < 1) throw InvalidArgument("spectral clustering: k must be positive");
    if (k > cloud.size()) throw InvalidArgument("spectral clustering: k exceeds n");
    const WeightedGraph graph = build_graph(cloud, kernel, eps);
    EigenPairs pairs = laplacian_eigs(graph, kind, k, eig_options);
    DiscreteClustering out = cluster_from_pairs(cloud, std::move(pairs), kind, k, kmeans_options);
    out.components = connected_components(graph).count;
    return out;
}

namespace {

Domain parse_domain(const Config& config) {
    const int dim = config.get_int("domain.dim", 2);
    if (dim < 1 || dim > 3) throw ConfigError("domain.dim must be 1, 2, or 3");
    Domain dom = Domain::unit_box(dim);
    for (int i = 0; i < dim; ++i) {
        const std::string axis = std::to_string(i);
        dom.lo[i] = config.get_double("domain.lo." + axis, dom.lo[i]);
        dom.hi[i] = config.get_double("domain.hi." + axis, dom.hi[i]);
        if (!(dom.hi[i] > dom.lo[i])) throw ConfigError("domain: hi must exceed lo on axis " + axis);
    }
    return dom;
}

Eigen::VectorXd parse_vector(const Config& config, const std::string& key, int dim) {
    const std::vector<double> values = config.get_double_list(key);
    if (static_cast<int>(values.size()) != dim) {
        throw ConfigError("config: key '" + key + "' needs " + std::to_string(dim) + " entries");
    }
    Eigen::VectorXd out(dim);
    for (int i = 0; i < dim; ++i) out[i] = values[i];
    return out;
}

DensityField parse_density(const Config& config, const Domain& domain) {
    const std::string kind = config.get_string("density.kind", "uniform");
    try {
        if (kind == "uniform") return DensityField::uniform(domain);
        if (kind == "affine") {
            return DensityField::affine(domain, config.get_double("density.c0", 1.0),
                                        parse_vector(config, "density.c", domain.dim));
        }
        if (kind == "gaussian_bump") {
            return DensityField::gaussian_bump(domain,
                                               parse_vector(config, "density.center", domain.dim),
                                               config.get_double("density.width", 0.15),
                                               config.get_double("density.amplitude", 4.0),
                                               config.get_double("density.floor", 1.0));
        }
        if (kind == "two_blob") {
            return DensityField::two_blob(domain,
                                          parse_vector(config, "density.center_a", domain.dim),
                                          parse_vector(config, "density.center_b", domain.dim),
                                          config.get_double("density.width", 0.12),
                                          config.get_double("density.amplitude", 8.0),
                                          config.get_double("density.floor", 0.25));
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("density: ") + e.what());
    }
    throw ConfigError("unknown density.kind: " + kind);
}

std::array<int, 3> parse_resolution(const Config& config, const std::string& key, int dim,
                                    std::array<int, 3> fallback) {
    if (!config.has(key)) {
        std::array<int, 3> out{1, 1, 1};
        for (int i = 0; i < dim; ++i) out[i] = fallback[i];
        return out;
    }
    const std::vector<int> values = config.get_int_list(key);
    std::array<int, 3> out{1, 1, 1};
    if (static_cast<int>(values.size()) == 1) {
        for (int i = 0; i < dim; ++i) out[i] = values[0];
    } else if (static_cast<int>(values.size()) == dim) {
        for (int i = 0; i < dim; ++i) out[i] = values[i];
    } else {
        throw ConfigError("config: key '" + key + "' needs 1 or dim entries");
    }
    return out;
}

} // namespace

ExperimentConfig parse_experiment_config(const Config& config) {
    ExperimentConfig out;
    out.name = config.get_string("experiment.name", "sweep");
    out.domain = parse_domain(config);
    out.density = parse_density(config, out.domain);
    try {
        out.kernel = RadialKernel(kernel_kind_from_name(config.get_string("kernel.kind", "indicator")));
        out.laplacian = laplacian_kind_from_name(config.get_string("laplacian.kind", "unnormalized"));
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    out.k = config.get_int("sweep.k", 2);
    if (out.k < 1) throw ConfigError("sweep.k must be positive");
    if (config.has("sweep.n")) out.n_values = config.get_int_list("sweep.n");
    if (out.n_values.empty()) throw ConfigError("sweep.n must be non-empty");
    if (!std::is_sorted(out.n_values.begin(), out.n_values.end())) {
        throw ConfigError("sweep.n must be ascending");
    }
    for (int n : out.n_values) {
        if (n < 2) throw ConfigError("sweep.n entries must be at least 2");
    }
    out.prefactor = config.get_double("sweep.prefactor", 1.0);
    out.exponent = config.get_double("sweep.exponent", 0.9);
    if (!(out.prefactor > 0.0)) throw ConfigError("sweep.prefactor must be positive");
    if (!(out.exponent > 0.0)) throw ConfigError("sweep.exponent must be positive");
    if (config.has("sweep.seeds")) out.seeds = config.get_uint64_list("sweep.seeds");
    if (out.seeds.empty()) throw ConfigError("sweep.seeds must be non-empty");

    const std::array<int, 3> grid_default{out.domain.dim == 1 ? 256 : (out.domain.dim == 2 ? 128 : 48),
                                          128, 48};
    std::array<int, 3> fallback{grid_default[0], grid_default[0], grid_default[0]};
    out.grid_resolution = parse_resolution(config, "grid.resolution", out.domain.dim, fallback);

    out.compare_subspace = config.get_bool("compare.subspace", false);
    out.compare_clusters = config.get_bool("compare.clusters", false);
    out.transport_budget = config.get_int("compare.transport_budget", 3000);
    out.cluster_resolution = parse_resolution(config, "compare.cluster_resolution", out.domain.dim,
                                              {40, 40, 12});

    if (config.has("connectivity.prefactors")) {
        out.connectivity_prefactors = config.get_double_list("connectivity.prefactors");
    }
    out.connectivity_exponent = config.get_double("connectivity.exponent", 1.0);

    out.threads = config.get_int("run.threads", 1);
    if (out.threads < 1) throw ConfigError("run.threads must be positive");
    out.deterministic_output = config.get_bool("report.deterministic", true);
    out.out_dir = config.get_string("run.out_dir", ".");

    out.kmeans.restarts = config.get_int("kmeans.restarts", 20);
    out.kmeans.seed = config.get_uint64("kmeans.seed", 0);
    out.eig.dense_threshold = config.get_int("eig.dense_threshold", 512);
    out.eig.residual_rtol = config.get_double("eig.residual_rtol", 1e-8);

    for (int n : out.n_values) {
        const ScheduleResult s = epsilon_schedule(n, out.domain.dim, out.prefactor, out.exponent);
        if (!(s.eps > 0.0)) throw ConfigError("schedule produced a non-positive eps");
    }
    return out;
}

namespace {

/// Deterministic stride subsample keeping the total mass, used to stay inside
/// the exact-transport budget when a cluster is large.
WeightedPointSet cap_support(const WeightedPointSet& set, int budget) {
    if (set.size() <= budget) return set;
    WeightedPointSet out;
    out.points.resize(budget, set.ambient_dim());
    out.weights.resize(budget);
    const double total = set.weights.sum();
    for (int r = 0; r < budget; ++r) {
        const int i = static_cast<int>((static_cast<long>(r) * set.size()) / budget);
        out.points.row(r) = set.points.row(i);
        out.weights[r] = set.weights[i];
    }
    out.weights *= total / out.weights.sum();
    return out;
}

WeightedPointSet normalized(const WeightedPointSet& set) {
    WeightedPointSet out = set;
    out.weights /= out.weights.sum();
    return out;
}

/// Columns orthonormalized under the uniform 1/n inner product.
Eigen::MatrixXd orthonormalize_uniform(const Eigen::MatrixXd& columns) {
    const double n = static_cast<double>(columns.rows());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(columns / std::sqrt(n));
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(columns.rows(), columns.cols());
    return q * std::sqrt(n);
}

struct ContinuumReference {
    Spectrum spectrum;             // first k continuum eigenvalues (lambda or tau)
    Eigen::VectorXd references;    // sigma lambda or (sigma/beta) tau
    GridMeasure grid;              // comparison grid (only when subspaces compared)
    Eigen::MatrixXd grid_basis;    // continuum eigenfunctions on the grid cells
};

ContinuumKind continuum_kind_for(LaplacianKind kind) {
    switch (kind) {
        case LaplacianKind::Unnormalized: return ContinuumKind::L;
        case LaplacianKind::Sym: return ContinuumKind::Nsym;
        case LaplacianKind::Rw: return ContinuumKind::Nrw;
    }
    throw InternalError("unreachable laplacian kind");
}

ContinuumReference build_reference(const ExperimentConfig& config,
                                   const KernelConstants& constants) {
    ContinuumReference ref;
    // spectra of N^sym and N^rw coincide; the rw eigenfunctions are the ones
    // the TL2 comparison uses
    const ContinuumKind kind = config.laplacian == LaplacianKind::Unnormalized
                                   ? ContinuumKind::L
                                   : ContinuumKind::Nrw;
    const bool need_basis = config.compare_subspace;
    // a few extra reference eigenvalues so the multiplicity group containing
    // index k-1 is known in full, never clipped at k
    const int k_ref = config.k + 8;
    if (config.density.kind() == DensityKind::Uniform) {
        const AnalyticEigenpairs analytic = analytic_neumann_box(config.density, kind, k_ref);
        ref.spectrum = analytic.spectrum;
        if (need_basis) {
            ref.grid = grid_discretize(config.density, config.grid_resolution);
            ref.grid_basis.resize(ref.grid.size(), k_ref);
            for (long c = 0; c < ref.grid.size(); ++c) {
                const Eigen::VectorXd x = ref.grid.atoms.row(c).transpose();
                for (int j = 0; j < k_ref; ++j) ref.grid_basis(c, j) = analytic.evaluate(j, x);
            }
        }
    } else {
        const ContinuumOperator op{kind, config.density};
        ContinuumEigs eigs = fd_weighted_eigs(op, config.grid_resolution, k_ref);
        ref.spectrum = eigs.spectrum;
        if (need_basis) {
            ref.grid = std::move(eigs.grid);
            ref.grid_basis = eigs.basis.vectors.leftCols(k_ref);
        }
    }
    const double factor = config.laplacian == LaplacianKind::Unnormalized
                              ? constants.surface_tension
                              : constants.surface_tension / constants.total_mass;
    ref.references = factor * ref.spectrum.values.head(config.k);
    return ref;
}

double relative_error(double value, double reference) {
    if (std::abs(reference) < 1e-9) return std::abs(value - reference);
    return std::abs(value - reference) / std::abs(reference);
}

} // namespace

double matched_cluster_distance(const std::vector<WeightedPointSet>& discrete,
                                const std::vector<WeightedPointSet>& continuum,
                                const TransportOptions& options) {
    const int k = static_cast<int>(discrete.size());
    if (k == 0 || continuum.size() != discrete.size()) {
        throw InvalidArgument("cluster matching: need the same positive number of clusters");
    }
    if (k > 8) throw InvalidArgument("cluster matching: exhaustive matching capped at k = 8");

    // bounding-box diagonal as the penalty for empty-vs-nonempty pairs
    double diag2 = 0.0;
    {
        Eigen::VectorXd mins, maxs;
        bool first = true;
        for (const auto& group : {&discrete, &continuum}) {
            for (const auto& set : *group) {
                if (set.size() == 0) continue;
                if (first) {
                    mins = set.points.colwise().minCoeff();
                    maxs = set.points.colwise().maxCoeff();
                    first = false;
                } else {
                    mins = mins.cwiseMin(set.points.colwise().minCoeff().transpose());
                    maxs = maxs.cwiseMax(set.points.colwise().maxCoeff().transpose());
                }
            }
        }
        if (!first) diag2 = (maxs - mins).squaredNorm();
    }
    const double penalty = std::sqrt(diag2);

    Eigen::MatrixXd pairwise(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const bool empty_i = discrete[i].size() == 0;
            const bool empty_j = continuum[j].size() == 0;
            if (empty_i && empty_j) {
                pairwise(i, j) = 0.0;
            } else if (empty_i || empty_j) {
                pairwise(i, j) = penalty;
            } else {
                pairwise(i, j) = wasserstein2(normalized(cap_support(discrete[i], options.max_support)),
                                              normalized(cap_support(continuum[j], options.max_support)),
                                              options)
                                     .distance;
            }
        }
    }
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < k; ++i) total += pairwise(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

namespace {

void run_trial(const ExperimentConfig& config, const KernelConstants& constants,
               const ContinuumReference& reference,
               const std::vector<WeightedPointSet>* continuum_clusters, int n,
               std::uint64_t seed, TrialRecord& record) {
    const auto t0 = std::chrono::steady_clock::now();
    record.n = n;
    record.seed = seed;
    record.kind = laplacian_kind_name(config.laplacian);
    const ScheduleResult schedule =
        epsilon_schedule(n, config.domain.dim, config.prefactor, config.exponent);
    record.eps = schedule.eps;

    const PointCloud cloud = sample(config.density, n, seed);
    const WeightedGraph graph = build_graph(cloud, config.kernel, schedule.eps);
    record.components = connected_components(graph).count;

    // solve to the end of the continuum group containing index k-1 so
    // degenerate subspaces are compared whole, never truncated
    int k_solve = config.k;
    if (config.compare_subspace) {
        for (const Spectrum::Group& group : reference.spectrum.groups) {
            if (config.k - 1 >= group.offset && config.k - 1 < group.offset + group.size) {
                k_solve = std::max(k_solve, group.offset + group.size);
            }
        }
    }
    k_solve = std::min(k_solve, n);
    EigenPairs pairs = laplacian_eigs(graph, config.laplacian, k_solve, config.eig);
    const bool normalized_kind = config.laplacian != LaplacianKind::Unnormalized;
    record.eigenvalues.resize(config.k);
    record.rescaled.resize(config.k);
    record.references.resize(config.k);
    record.rel_errors.resize(config.k);
    record.subspace_tl2.assign(config.k, std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j < config.k; ++j) {
        record.eigenvalues[j] = pairs.spectrum.values[j];
        record.rescaled[j] =
            rescale_eigenvalue(pairs.spectrum.values[j], n, schedule.eps, normalized_kind);
        record.references[j] = reference.references[j];
        record.rel_errors[j] = relative_error(record.rescaled[j], record.references[j]);
    }

    if (config.compare_subspace) {
        // restrict the continuum basis to the sample through the bottleneck
        // matching map, then compare group by group
        const TransportMap map = infinity_matching(reference.grid, cloud);
        Eigen::MatrixXd restricted(n, reference.grid_basis.cols());
        for (int u = 0; u < n; ++u) {
            restricted.row(map.target[u]) = reference.grid_basis.row(map.source_cell[u]);
        }
        const Eigen::VectorXd uniform_weights = Eigen::VectorXd::Constant(n, 1.0 / n);
        for (const Spectrum::Group& group : reference.spectrum.groups) {
            if (group.offset >= config.k) break;
            const int width = std::min(group.size, k_solve - group.offset);
            double value;
            if (width == 1) {
                const int j = group.offset;
                const Eigen::VectorXd disc = pairs.basis.vectors.col(j);
                const Eigen::VectorXd cont = reference.grid_basis.col(j);
                if (n <= config.transport_budget &&
                    reference.grid.size() <= config.transport_budget) {
                    WeightedPointSet sample_set{cloud.points, uniform_weights};
                    WeightedPointSet grid_set{reference.grid.atoms, reference.grid.weights};
                    TransportOptions topts;
                    topts.max_support = config.transport_budget;
                    const double plus =
                        tl2_distance(sample_set, disc, grid_set, cont, topts).distance;
                    const double minus =
                        tl2_distance(sample_set, -disc, grid_set, cont, topts).distance;
                    value = std::min(plus, minus);
                } else {
                    const Tl2ViaMap plus = tl2_via_map(map, reference.grid, cont, cloud, disc);
                    const Tl2ViaMap minus = tl2_via_map(map, reference.grid, cont, cloud, -disc);
                    value = std::min(plus.total, minus.total);
                }
            } else {
                const Eigen::MatrixXd disc =
                    pairs.basis.vectors.middleCols(group.offset, width);
                const Eigen::MatrixXd cont = orthonormalize_uniform(
                    restricted.middleCols(group.offset, width));
                value = subspace_distance(disc, cont, uniform_weights);
            }
            for (int j = group.offset; j < std::min(group.offset + width, config.k); ++j) {
                record.subspace_tl2[j] = value;
            }
        }
    }

    if (config.compare_clusters && continuum_clusters) {
        DiscreteClustering clustering =
            cluster_from_pairs(cloud, std::move(pairs), config.laplacian, config.k, config.kmeans);
        TransportOptions topts;
        topts.max_support = config.transport_budget;
        record.cluster_w2_total =
            matched_cluster_distance(clustering.restricted, *continuum_clusters, topts);
    }

    (void)constants;
    const auto t1 = std::chrono::steady_clock::now();
    record.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
}

} // namespace

SweepResult convergence_sweep(const ExperimentConfig& config) {
    if (config.exponent >= 1.0) {
        throw ConfigError("convergence sweep needs an admissible schedule (exponent < 1)");
    }
    SweepResult result;
    result.config = config;
    result.constants = kernel_constants(config.kernel, config.domain.dim);
    const ContinuumReference reference = build_reference(config, result.constants);

    std::vector<WeightedPointSet> continuum_clusters;
    if (config.compare_clusters) {
        const ContinuumOperator op{continuum_kind_for(config.laplacian), config.density};
        const bool normalized_rows = config.laplacian == LaplacianKind::Sym;
        const ContinuumClustering clustering = continuum_spectral_clustering(
            op, config.k, config.cluster_resolution, normalized_rows, config.kmeans);
        continuum_clusters = clustering.restricted;
        // uniqueness probe: an independent restart schedule must land on the
        // same partition up to relabeling
        KMeansOptions alternate = config.kmeans;
        alternate.seed = config.kmeans.seed + 7919;
        const ContinuumClustering probe = continuum_spectral_clustering(
            op, config.k, config.cluster_resolution, normalized_rows, alternate);
        TransportOptions topts;
        topts.max_support = config.transport_budget;
        // cells on the Voronoi boundary may flip between restarts; only a
        // macroscopically different partition counts as non-unique
        result.continuum_clustering_unique =
            matched_cluster_distance(clustering.restricted, probe.restricted, topts) < 1e-2;
    }

    struct Trial {
        int n;
        std::uint64_t seed;
    };
    std::vector<Trial> trials;
    for (int n : config.n_values) {
        for (std::uint64_t seed : config.seeds) trials.push_back({n, seed});
    }
    result.records.resize(trials.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= trials.size()) return;
            TrialRecord& record = result.records[i];
            try {
                run_trial(config, result.constants, reference,
                          config.compare_clusters ? &continuum_clusters : nullptr, trials[i].n,
                          trials[i].seed, record);
            } catch (const std::exception& e) {
                record.n = trials[i].n;
                record.seed = trials[i].seed;
                record.kind = laplacian_kind_name(config.laplacian);
                record.error = e.what();
            }
        }
    };
    const int thread_count = std::min<int>(config.threads, static_cast<int>(trials.size()));
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::sort(result.records.begin(), result.records.end(),
              [](const TrialRecord& a, const TrialRecord& b) {
                  if (a.n != b.n) return a.n < b.n;
                  return a.seed < b.seed;
              });
    return result;
}

std::vector<ConnectivityRow> connectivity_experiment(const ExperimentConfig& config) {
    if (config.kernel.support_radius() == std::numeric_limits<double>::infinity()) {
        throw InvalidArgument("connectivity experiment needs a compactly supported kernel");
    }
    std::vector<ConnectivityRow> rows;
    for (double c : config.connectivity_prefactors) {
        for (int n : config.n_values) {
            ConnectivityRow row;
            row.n = n;
            row.prefactor = c;
            row.exponent = config.connectivity_exponent;
            row.eps = epsilon_schedule(n, config.domain.dim, c, config.connectivity_exponent).eps;
            row.seeds = static_cast<int>(config.seeds.size());
            for (std::uint64_t seed : config.seeds) {
                const PointCloud cloud = sample(config.density, n, seed);
                const WeightedGraph graph = build_graph(cloud, config.kernel, row.eps);
                if (connected_components(graph).count > 1) ++row.disconnected;
            }
            row.frequency = static_cast<double>(row.disconnected) / row.seeds;
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace speclab
