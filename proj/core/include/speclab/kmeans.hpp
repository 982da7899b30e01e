#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "speclab/errors.hpp"

namespace speclab {

/// Finitely supported probability measure in R^N: atoms row-wise, positive
/// weights summing to 1.
struct WeightedPointSet {
    Eigen::MatrixXd points;  // m x N
    Eigen::VectorXd weights;

    int size() const { return static_cast<int>(points.rows()); }
    int ambient_dim() const { return static_cast<int>(points.cols()); }

    void validate() const;
};

struct CenterSet {
    Eigen::MatrixXd centers;  // k x N
    int count() const { return static_cast<int>(centers.rows()); }
};

/// Voronoi labels (nearest center, ties to the lowest index), per-cluster
/// mass, and the restricted measures the consistency checks compare.
struct ClusterAssignment {
    std::vector<int> labels;
    Eigen::VectorXd cluster_mass;
    std::vector<WeightedPointSet> restricted;  // measure restricted to each cluster (unnormalized weights)
    double tied_mass = 0.0;  // mass of atoms equidistant to two or more centers
};

/// F(z) = sum_i w_i min_j |x_i - z_j|^2.
double kmeans_objective(const WeightedPointSet& measure, const CenterSet& centers);

struct KMeansResult {
    CenterSet centers;
    double objective = 0.0;
    /// Set when the support had fewer than k points, making the zero-cost
    /// solution trivial.
    bool degenerate_support = false;
};

struct KMeansOptions {
    int restarts = 20;
    int max_iterations = 300;
    double rel_tolerance = 1e-12;
    std::uint64_t seed = 0;
};

/// Weighted k-means++ seeding followed by Lloyd iterations; best of restarts.
KMeansResult kmeans_minimize(const WeightedPointSet& measure, int k,
                             const KMeansOptions& options = {});

ClusterAssignment kmeans_assign(const WeightedPointSet& measure, const CenterSet& centers);

/// |z_i - centroid(mu restricted to cell i)| per center; NaN for empty cells.
Eigen::VectorXd centroid_residuals(const WeightedPointSet& measure, const CenterSet& centers);

/// Both sides of |F_mu(z) - F_nu(z)| <= d2 (2 min{sqrt F} + d2).
struct StabilityBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

StabilityBound stability_check(const WeightedPointSet& mu, const WeightedPointSet& nu,
                               const CenterSet& centers, double wasserstein2_distance);

} // namespace speclab
