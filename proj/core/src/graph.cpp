#include "speclab/graph.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace speclab {

LaplacianKind laplacian_kind_from_name(const std::string& name) {
    if (name == "unnormalized" || name == "l") return LaplacianKind::Unnormalized;
    if (name == "sym" || name == "nsym") return LaplacianKind::Sym;
    if (name == "rw" || name == "nrw") return LaplacianKind::Rw;
    throw InvalidArgument("unknown laplacian kind: " + name);
}

std::string laplacian_kind_name(LaplacianKind kind) {
    switch (kind) {
        case LaplacianKind::Unnormalized: return "unnormalized";
        case LaplacianKind::Sym: return "sym";
        case LaplacianKind::Rw: return "rw";
    }
    throw InternalError("unreachable laplacian kind");
}

namespace {

WeightedGraph assemble(const PointCloud& cloud, const RadialKernel& kernel, double eps,
                       const GraphBuildOptions& options,
                       std::vector<Eigen::Triplet<double>>&& triplets) {
    const int n = cloud.size();
    // diagonal entries
    if (options.include_diagonal) {
        const double self = kernel.eval_scaled(cloud.dim(), eps, 0.0);
        for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, self);
    }
    WeightedGraph graph;
    graph.cloud = cloud;
    graph.kernel = kernel;
    graph.eps = eps;
    graph.include_diagonal = options.include_diagonal;
    graph.weights.resize(n, n);
    graph.weights.setFromTriplets(triplets.begin(), triplets.end());
    graph.degrees = graph.weights * Eigen::VectorXd::Ones(n);
    if (options.include_diagonal) {
        for (int i = 0; i < n; ++i) {
            if (!(graph.degrees[i] > 0.0)) {
                throw InternalError("zero degree despite positive diagonal weight");
            }
        }
    }
    return graph;
}

void check_budget(std::size_t pair_count, const GraphBuildOptions& options) {
    // triplets + CSC storage, roughly 3 * 16 bytes per stored entry
    const std::size_t bytes = pair_count * 2 * 48;
    if (bytes > options.memory_budget_bytes) {
        throw ResourceError("graph weight storage would exceed the memory budget; "
                            "reduce eps or raise the budget");
    }
}

} // namespace

WeightedGraph build_graph(const PointCloud& cloud, const RadialKernel& kernel, double eps,
                          const GraphBuildOptions& options) {
    if (eps <= 0.0) throw InvalidArgument("build_graph: eps must be positive");
    const int n = cloud.size();
    const int d = cloud.dim();
    const double cutoff = eps * kernel.support_radius();

    // uniform cells of side = cutoff
    Eigen::VectorXd lo = cloud.points.colwise().minCoeff();
    Eigen::VectorXd hi = cloud.points.colwise().maxCoeff();
    std::array<int, 3> cells{1, 1, 1};
    for (int k = 0; k < d; ++k) {
        cells[k] = std::max(1, static_cast<int>(std::floor((hi[k] - lo[k]) / cutoff)) + 1);
        cells[k] = std::min(cells[k], 1 << 16);
    }
    auto cell_of = [&](int i) {
        long id = 0;
        for (int k = 0; k < d; ++k) {
            int c = static_cast<int>(std::floor((cloud.points(i, k) - lo[k]) / cutoff));
            c = std::min(std::max(c, 0), cells[k] - 1);
            id = id * cells[k] + c;
        }
        return id;
    };
    std::unordered_map<long, std::vector<int>> buckets;
    buckets.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) buckets[cell_of(i)].push_back(i);

    const double cutoff2 = cutoff * cutoff;
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<long> strides(d);
    // enumerate neighbor cell offsets once
    std::vector<std::array<int, 3>> offsets;
    for (int a = -1; a <= 1; ++a) {
        for (int b = (d >= 2 ? -1 : 0); b <= (d >= 2 ? 1 : 0); ++b) {
            for (int c = (d >= 3 ? -1 : 0); c <= (d >= 3 ? 1 : 0); ++c) {
                offsets.push_back({a, b, c});
            }
        }
    }
    auto cell_coords = [&](int i, std::array<int, 3>& coord) {
        for (int k = 0; k < d; ++k) {
            int c = static_cast<int>(std::floor((cloud.points(i, k) - lo[k]) / cutoff));
            coord[k] = std::min(std::max(c, 0), cells[k] - 1);
        }
    };
    auto coord_id = [&](const std::array<int, 3>& coord) {
        long id = 0;
        for (int k = 0; k < d; ++k) id = id * cells[k] + coord[k];
        return id;
    };

    std::size_t pair_count = 0;
    std::array<int, 3> coord{0, 0, 0};
    for (int i = 0; i < n; ++i) {
        cell_coords(i, coord);
        for (const auto& off : offsets) {
            std::array<int, 3> nb = coord;
            bool ok = true;
            for (int k = 0; k < d; ++k) {
                nb[k] += off[k];
                if (nb[k] < 0 || nb[k] >= cells[k]) { ok = false; break; }
            }
            if (!ok) continue;
            auto it = buckets.find(coord_id(nb));
            if (it == buckets.end()) continue;
            for (int j : it->second) {
                if (j <= i) continue;
                const double dist2 = (cloud.points.row(i) - cloud.points.row(j)).squaredNorm();
                if (dist2 > cutoff2) continue;
                const double w = kernel.eval_scaled(d, eps, std::sqrt(dist2));
                if (w == 0.0) continue;
                triplets.emplace_back(i, j, w);
                triplets.emplace_back(j, i, w);
                if (((++pair_count) & 0xFFFFF) == 0) check_budget(pair_count, options);
            }
        }
    }
    check_budget(pair_count, options);
    return assemble(cloud, kernel, eps, options, std::move(triplets));
}

WeightedGraph build_graph_bruteforce(const PointCloud& cloud, const RadialKernel& kernel,
                                     double eps, const GraphBuildOptions& options) {
    if (eps <= 0.0) throw InvalidArgument("build_graph: eps must be positive");
    const int n = cloud.size();
    const int d = cloud.dim();
    std::vector<Eigen::Triplet<double>> triplets;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dist = (cloud.points.row(i) - cloud.points.row(j)).norm();
            const double w = kernel.eval_scaled(d, eps, dist);
            if (w == 0.0) continue;
            triplets.emplace_back(i, j, w);
            triplets.emplace_back(j, i, w);
        }
    }
    return assemble(cloud, kernel, eps, options, std::move(triplets));
}

Laplacian laplacian(const WeightedGraph& graph, LaplacianKind kind) {
    const int n = graph.size();
    for (int i = 0; i < n; ++i) {
        if (!(graph.degrees[i] > 0.0)) {
            throw InternalError("laplacian requires strictly positive degrees");
        }
    }
    Laplacian result;
    result.kind = kind;
    result.degrees = graph.degrees;
    SparseSym deg(n, n);
    if (kind == LaplacianKind::Unnormalized) {
        std::vector<Eigen::Triplet<double>> dt;
        dt.reserve(n);
        for (int i = 0; i < n; ++i) dt.emplace_back(i, i, graph.degrees[i]);
        deg.setFromTriplets(dt.begin(), dt.end());
        result.matrix = deg - graph.weights;
    } else {
        // N^sym = I - D^{-1/2} W D^{-1/2}; Rw shares the matrix and carries degrees.
        Eigen::VectorXd inv_sqrt = graph.degrees.array().rsqrt();
        SparseSym scaled = graph.weights;
        for (int col = 0; col < scaled.outerSize(); ++col) {
            for (SparseSym::InnerIterator it(scaled, col); it; ++it) {
                it.valueRef() *= inv_sqrt[it.row()] * inv_sqrt[it.col()];
            }
        }
        SparseSym identity(n, n);
        identity.setIdentity();
        result.matrix = identity - scaled;
    }
    return result;
}

double dirichlet_energy(const WeightedGraph& graph, const Eigen::VectorXd& u) {
    const int n = graph.size();
    if (u.size() != n) throw InvalidArgument("dirichlet_energy: vector length mismatch");
    double sum = 0.0;
    for (int col = 0; col < graph.weights.outerSize(); ++col) {
        for (SparseSym::InnerIterator it(graph.weights, col); it; ++it) {
            const double diff = u[it.row()] - u[it.col()];
            sum += it.value() * diff * diff;
        }
    }
    const double eps = graph.eps;
    return sum / (eps * eps * static_cast<double>(n) * static_cast<double>(n));
}

double normalized_dirichlet_energy(const WeightedGraph& graph, const Eigen::VectorXd& u) {
    const int n = graph.size();
    if (u.size() != n) throw InvalidArgument("normalized_dirichlet_energy: vector length mismatch");
    Eigen::VectorXd scaled = u.array() * graph.degrees.array().rsqrt();
    double sum = 0.0;
    for (int col = 0; col < graph.weights.outerSize(); ++col) {
        for (SparseSym::InnerIterator it(graph.weights, col); it; ++it) {
            const double diff = scaled[it.row()] - scaled[it.col()];
            sum += it.value() * diff * diff;
        }
    }
    return sum / (static_cast<double>(n) * graph.eps * graph.eps);
}

namespace {
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};
} // namespace

ComponentLabels connected_components(const WeightedGraph& graph) {
    const int n = graph.size();
    UnionFind uf(n);
    for (int col = 0; col < graph.weights.outerSize(); ++col) {
        for (SparseSym::InnerIterator it(graph.weights, col); it; ++it) {
            if (it.row() != it.col() && it.value() != 0.0) {
                uf.unite(static_cast<int>(it.row()), static_cast<int>(it.col()));
            }
        }
    }
    ComponentLabels result;
    result.labels.resize(n);
    std::unordered_map<int, int> remap;
    for (int i = 0; i < n; ++i) {
        const int root = uf.find(i);
        auto [it, inserted] = remap.emplace(root, result.count);
        if (inserted) ++result.count;
        result.labels[i] = it->second;
    }
    return result;
}

void write_graph_triplets(const WeightedGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot open for writing: " + path);
    char buf[64];
    for (int col = 0; col < graph.weights.outerSize(); ++col) {
        for (SparseSym::InnerIterator it(graph.weights, col); it; ++it) {
            if (it.row() > it.col()) continue;
            std::snprintf(buf, sizeof(buf), "%.17g", it.value());
            out << it.row() << " " << it.col() << " " << buf << "\n";
        }
    }
}

} // namespace speclab
