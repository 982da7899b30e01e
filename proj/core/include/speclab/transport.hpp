#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "speclab/geometry.hpp"
#include "speclab/kmeans.hpp"

namespace speclab {

/// Sparse coupling between two finitely supported measures.
struct TransportPlan {
    struct Entry {
        int source = 0;
        int target = 0;
        double mass = 0.0;
    };
    std::vector<Entry> entries;
    double cost = 0.0;  // sum of mass * squared ground cost

    Eigen::VectorXd source_marginals(int source_size) const;
    Eigen::VectorXd target_marginals(int target_size) const;
};

struct TransportOptions {
    /// Exact-solver budget: refuse problems with more support points per side.
    int max_support = 3000;
};

/// Exact quadratic-cost optimal transport between weighted point sets via
/// network simplex on the bipartite cost matrix. Returns the distance
/// (sqrt of optimal cost) and the optimal plan.
struct TransportResult {
    double distance = 0.0;
    TransportPlan plan;
};

TransportResult wasserstein2(const WeightedPointSet& mu, const WeightedPointSet& nu,
                             const TransportOptions& options = {});

/// TL2 distance between (mu, f) and (nu, g): exact transport under the
/// lifted cost |x - y|^2 + |f(x) - g(y)|^2.
TransportResult tl2_distance(const WeightedPointSet& mu, const Eigen::VectorXd& f,
                             const WeightedPointSet& nu, const Eigen::VectorXd& g,
                             const TransportOptions& options = {});

/// Exact min-cost solution of the transportation problem with an arbitrary
/// dense cost matrix; building block for the distances above and for the
/// cluster label matching.
TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                              const Eigen::VectorXd& demand);

/// Push-forward of a measure through per-atom image points; coincident
/// images are merged with weights summed.
WeightedPointSet pushforward(const WeightedPointSet& measure, const Eigen::MatrixXd& images);

/// Transportation map between the 1/n-quantized grid measure and an n-point
/// empirical measure: one unit of mass 1/n per row.
struct TransportMap {
    std::vector<int> source_cell;  // grid cell index per unit
    std::vector<int> target;       // sample index per unit
    double sup_displacement = 0.0;
};

/// Bottleneck-optimal matching (minimize the maximum displacement) between
/// the grid measure quantized to atoms of mass 1/n and the n sample points.
/// The reported sup-displacement is a diagnostic estimate of ||Id - T_n||_inf.
TransportMap infinity_matching(const GridMeasure& grid, const PointCloud& cloud);

/// TL2 upper bound through a fixed transportation map: the function part
/// ||f - g o T|| and the full lifted cost of the induced coupling, both under
/// the quantized (uniform 1/n) weights.
struct Tl2ViaMap {
    double function_part = 0.0;  // sqrt of mean |f - g o T|^2
    double total = 0.0;          // sqrt of mean (|x - T x|^2 + |f - g o T|^2)
};

Tl2ViaMap tl2_via_map(const TransportMap& map, const GridMeasure& grid,
                      const Eigen::VectorXd& grid_values, const PointCloud& cloud,
                      const Eigen::VectorXd& node_values);

/// Remainder rounding of grid weights to multiples of 1/n with prefix
/// balancing along the scan order; returns the number of units per cell
/// (summing to n).
std::vector<int> quantize_to_units(const Eigen::VectorXd& weights, int n);

} // namespace speclab
