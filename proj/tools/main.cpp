// speclab command-line harness: samples, graphs, spectra, clusterings,
// TL2 comparisons, convergence sweeps, connectivity experiments, and
// continuum references, driven by a flat key=value config file.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "speclab/config.hpp"
#include "speclab/continuum.hpp"
#include "speclab/pipeline.hpp"
#include "speclab/report.hpp"

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

speclab::ExperimentConfig load_config(const GlobalArgs& args) {
    if (args.config_path.empty()) {
        throw speclab::ConfigError("--config is required");
    }
    speclab::Config config = speclab::Config::from_file(args.config_path);
    speclab::ExperimentConfig experiment = speclab::parse_experiment_config(config);
    if (!args.out_dir.empty()) experiment.out_dir = args.out_dir;
    if (args.seed) experiment.seeds = {*args.seed};
    if (args.threads) experiment.threads = *args.threads;
    std::filesystem::create_directories(experiment.out_dir);
    return experiment;
}

std::string out_path(const speclab::ExperimentConfig& config, const std::string& name) {
    return (std::filesystem::path(config.out_dir) / name).string();
}

void write_vector_csv(const std::string& path, const std::string& header,
                      const Eigen::VectorXd& values) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw speclab::ResourceError("cannot write " + path);
    std::fprintf(out, "%s\n", header.c_str());
    for (int i = 0; i < values.size(); ++i) {
        std::fprintf(out, "%d,%.17g\n", i, values[i]);
    }
    std::fclose(out);
}

int run_sample(const speclab::ExperimentConfig& config, int n) {
    const speclab::PointCloud cloud = speclab::sample(config.density, n, config.seeds.front());
    const std::string path = out_path(config, "sample.csv");
    speclab::write_cloud_csv(cloud, path);
    std::cout << "wrote " << path << " (n=" << n << ", seed=" << config.seeds.front() << ")\n";
    return 0;
}

int run_graph(const speclab::ExperimentConfig& config, int n) {
    const auto schedule =
        speclab::epsilon_schedule(n, config.domain.dim, config.prefactor, config.exponent);
    const speclab::PointCloud cloud = speclab::sample(config.density, n, config.seeds.front());
    const speclab::WeightedGraph graph = speclab::build_graph(cloud, config.kernel, schedule.eps);
    const std::string path = out_path(config, "graph.txt");
    speclab::write_graph_triplets(graph, path);
    const auto components = speclab::connected_components(graph);
    std::cout << "wrote " << path << " (eps=" << schedule.eps
              << ", nnz=" << graph.weights.nonZeros() << ", components=" << components.count
              << ")\n";
    return 0;
}

int run_eigen(const speclab::ExperimentConfig& config, int n) {
    const auto schedule =
        speclab::epsilon_schedule(n, config.domain.dim, config.prefactor, config.exponent);
    const speclab::PointCloud cloud = speclab::sample(config.density, n, config.seeds.front());
    const speclab::WeightedGraph graph = speclab::build_graph(cloud, config.kernel, schedule.eps);
    const speclab::EigenPairs pairs =
        speclab::laplacian_eigs(graph, config.laplacian, config.k, config.eig);
    Eigen::VectorXd rescaled(config.k);
    const bool normalized = config.laplacian != speclab::LaplacianKind::Unnormalized;
    for (int j = 0; j < config.k; ++j) {
        rescaled[j] =
            speclab::rescale_eigenvalue(pairs.spectrum.values[j], n, schedule.eps, normalized);
    }
    write_vector_csv(out_path(config, "eigenvalues.csv"), "k_index,eigenvalue",
                     pairs.spectrum.values);
    write_vector_csv(out_path(config, "eigenvalues_rescaled.csv"), "k_index,rescaled", rescaled);
    std::cout << "wrote eigenvalues.csv and eigenvalues_rescaled.csv (n=" << n
              << ", eps=" << schedule.eps << ")\n";
    return 0;
}

int run_cluster(const speclab::ExperimentConfig& config, int n) {
    const auto schedule =
        speclab::epsilon_schedule(n, config.domain.dim, config.prefactor, config.exponent);
    const speclab::PointCloud cloud = speclab::sample(config.density, n, config.seeds.front());
    speclab::KMeansOptions kmeans = config.kmeans;
    kmeans.seed = config.seeds.front();
    const speclab::DiscreteClustering clustering = speclab::spectral_cluster_discrete(
        cloud, config.kernel, schedule.eps, config.laplacian, config.k, kmeans, config.eig);
    const std::string path = out_path(config, "clusters.csv");
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw speclab::ResourceError("cannot write " + path);
    std::fprintf(out, "index");
    for (int d = 0; d < cloud.dim(); ++d) std::fprintf(out, ",x%d", d + 1);
    std::fprintf(out, ",label\n");
    for (int i = 0; i < cloud.size(); ++i) {
        std::fprintf(out, "%d", i);
        for (int d = 0; d < cloud.dim(); ++d) std::fprintf(out, ",%.17g", cloud.points(i, d));
        std::fprintf(out, ",%d\n", clustering.labels[i]);
    }
    std::fclose(out);
    std::cout << "wrote " << path << " (components=" << clustering.components
              << ", objective=" << clustering.kmeans.objective << ")\n";
    return 0;
}

int run_tl2(const speclab::ExperimentConfig& config, int n) {
    speclab::ExperimentConfig sweep = config;
    sweep.n_values = {n};
    sweep.compare_subspace = true;
    const speclab::SweepResult result = speclab::convergence_sweep(sweep);
    const auto rows = speclab::flatten_records(result.records, sweep.deterministic_output);
    speclab::write_report_csv(rows, out_path(config, "tl2.csv"));
    for (const auto& row : rows) {
        std::cout << "k_index=" << row.k_index << " subspace_tl2=" << row.subspace_tl2 << "\n";
    }
    return 0;
}

int run_sweep(const speclab::ExperimentConfig& config) {
    const speclab::SweepResult result = speclab::convergence_sweep(config);
    const auto rows = speclab::flatten_records(result.records, config.deterministic_output);
    speclab::write_report_csv(rows, out_path(config, "sweep.csv"));
    speclab::write_summary_json(result, rows, out_path(config, "summary.json"));
    if (config.k > 1) {
        speclab::write_loglog_svg(rows, 1, "rel_error", out_path(config, "rel_error.svg"));
        if (config.compare_subspace) {
            speclab::write_loglog_svg(rows, 1, "subspace_tl2", out_path(config, "subspace_tl2.svg"));
        }
    }
    int failed = 0;
    for (const auto& record : result.records) {
        if (!record.error.empty()) ++failed;
    }
    std::cout << "wrote sweep.csv, summary.json (" << rows.size() << " rows, " << failed
              << " failed trials)\n";
    return 0;
}

int run_connectivity(const speclab::ExperimentConfig& config) {
    const auto rows = speclab::connectivity_experiment(config);
    speclab::write_connectivity_csv(rows, out_path(config, "connectivity.csv"));
    for (const auto& row : rows) {
        std::cout << "n=" << row.n << " c=" << row.prefactor << " eps=" << row.eps
                  << " disconnected=" << row.disconnected << "/" << row.seeds << "\n";
    }
    return 0;
}

int run_continuum(const speclab::ExperimentConfig& config) {
    const speclab::ContinuumOperator op{config.laplacian == speclab::LaplacianKind::Unnormalized
                                            ? speclab::ContinuumKind::L
                                            : speclab::ContinuumKind::Nrw,
                                        config.density};
    const speclab::ContinuumEigs eigs =
        speclab::fd_weighted_eigs(op, config.grid_resolution, config.k, config.eig);
    write_vector_csv(out_path(config, "continuum_spectrum.csv"), "k_index,eigenvalue",
                     eigs.spectrum.values);
    const std::string path = out_path(config, "continuum_basis.csv");
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw speclab::ResourceError("cannot write " + path);
    std::fprintf(out, "cell");
    for (int d = 0; d < eigs.grid.dim(); ++d) std::fprintf(out, ",x%d", d + 1);
    for (int j = 0; j < config.k; ++j) std::fprintf(out, ",u%d", j + 1);
    std::fprintf(out, "\n");
    for (long c = 0; c < eigs.grid.size(); ++c) {
        std::fprintf(out, "%ld", c);
        for (int d = 0; d < eigs.grid.dim(); ++d) {
            std::fprintf(out, ",%.17g", eigs.grid.atoms(c, d));
        }
        for (int j = 0; j < config.k; ++j) {
            std::fprintf(out, ",%.17g", eigs.basis.vectors(c, j));
        }
        std::fprintf(out, "\n");
    }
    std::fclose(out);
    std::cout << "wrote continuum_spectrum.csv and continuum_basis.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for graph-based spectral clustering consistency"};
    app.require_subcommand(1);
    app.fallthrough();  // allow global flags after the subcommand name

    GlobalArgs globals;
    std::uint64_t seed_value = 0;
    int threads_value = 0;
    app.add_option("--config", globals.config_path, "path to the key=value config file");
    app.add_option("--out", globals.out_dir, "output directory (overrides run.out_dir)");
    auto* seed_opt = app.add_option("--seed", seed_value, "override: run a single seed");
    auto* threads_opt = app.add_option("--threads", threads_value, "override: worker threads");

    int n_override = 0;
    auto add_n = [&](CLI::App* cmd) {
        cmd->add_option("--n", n_override, "sample size (default: first entry of sweep.n)");
    };

    CLI::App* cmd_sample = app.add_subcommand("sample", "draw a point cloud and write it as CSV");
    CLI::App* cmd_graph = app.add_subcommand("graph", "build the similarity graph, write triplets");
    CLI::App* cmd_eigen = app.add_subcommand("eigen", "smallest-k Laplacian eigenvalues");
    CLI::App* cmd_cluster = app.add_subcommand("cluster", "discrete spectral clustering labels");
    CLI::App* cmd_tl2 = app.add_subcommand("tl2", "TL2 comparison against the continuum basis");
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "full convergence sweep with reports");
    CLI::App* cmd_connectivity =
        app.add_subcommand("connectivity", "disconnection frequencies on sub-critical schedules");
    CLI::App* cmd_continuum = app.add_subcommand("continuum", "fd continuum reference eigenpairs");
    for (CLI::App* cmd : {cmd_sample, cmd_graph, cmd_eigen, cmd_cluster, cmd_tl2}) add_n(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (seed_opt->count()) globals.seed = seed_value;
        if (threads_opt->count()) globals.threads = threads_value;
        const speclab::ExperimentConfig config = load_config(globals);
        const int n = n_override > 0 ? n_override : config.n_values.front();

        if (app.got_subcommand(cmd_sample)) return run_sample(config, n);
        if (app.got_subcommand(cmd_graph)) return run_graph(config, n);
        if (app.got_subcommand(cmd_eigen)) return run_eigen(config, n);
        if (app.got_subcommand(cmd_cluster)) return run_cluster(config, n);
        if (app.got_subcommand(cmd_tl2)) return run_tl2(config, n);
        if (app.got_subcommand(cmd_sweep)) return run_sweep(config);
        if (app.got_subcommand(cmd_connectivity)) return run_connectivity(config);
        if (app.got_subcommand(cmd_continuum)) return run_continuum(config);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const speclab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const speclab::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    }
}
