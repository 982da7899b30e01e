#include "speclab/kmeans.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "speclab/rng.hpp"

namespace speclab {

void WeightedPointSet::validate() const {
    if (points.rows() != weights.size()) {
        throw InvalidArgument("weighted point set: atom/weight count mismatch");
    }
    if (points.rows() == 0) throw InvalidArgument("weighted point set: empty support");
    for (int i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0)) throw InvalidArgument("weighted point set: weights must be positive");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-9) {
        throw InvalidArgument("weighted point set: weights must sum to 1");
    }
}

namespace {

int nearest_center(const WeightedPointSet& measure, const CenterSet& centers, int i,
                   double* best_dist2 = nullptr, bool* tie = nullptr) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    bool tied = false;
    for (int j = 0; j < centers.count(); ++j) {
        const double d = (measure.points.row(i) - centers.centers.row(j)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = j;
            tied = false;
        } else if (d == best_d) {
            tied = true;
        }
    }
    if (best_dist2) *best_dist2 = best_d;
    if (tie) *tie = tied;
    return best;
}

/// Weighted k-means++ seeding.
CenterSet seed_centers(const WeightedPointSet& measure, int k, Rng& rng) {
    const int m = measure.size();
    CenterSet centers;
    centers.centers.resize(k, measure.ambient_dim());

    // first center: weight-proportional draw
    auto draw_by_mass = [&](const Eigen::VectorXd& mass) {
        const double total = mass.sum();
        double target = rng.uniform() * total;
        for (int i = 0; i < m; ++i) {
            target -= mass[i];
            if (target <= 0.0) return i;
        }
        return m - 1;
    };
    centers.centers.row(0) = measure.points.row(draw_by_mass(measure.weights));

    Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
    for (int j = 1; j < k; ++j) {
        for (int i = 0; i < m; ++i) {
            const double d = (measure.points.row(i) - centers.centers.row(j - 1)).squaredNorm();
            dist2[i] = std::min(dist2[i], d);
        }
        Eigen::VectorXd mass = dist2.cwiseProduct(measure.weights);
        if (mass.sum() <= 0.0) {
            // all remaining mass already covered; duplicate an atom
            centers.centers.row(j) = measure.points.row(draw_by_mass(measure.weights));
        } else {
            centers.centers.row(j) = measure.points.row(draw_by_mass(mass));
        }
    }
    return centers;
}

struct LloydOutcome {
    CenterSet centers;
    double objective;
};

LloydOutcome lloyd(const WeightedPointSet& measure, CenterSet centers,
                   const KMeansOptions& options) {
    const int m = measure.size();
    const int k = centers.count();
    const int dim = measure.ambient_dim();
    double prev = std::numeric_limits<double>::infinity();
    std::vector<int> labels(m);
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        double objective = 0.0;
        for (int i = 0; i < m; ++i) {
            double d;
            labels[i] = nearest_center(measure, centers, i, &d);
            objective += measure.weights[i] * d;
        }
        if (objective > prev * (1.0 + 1e-12)) {
            throw InternalError("Lloyd iteration increased the k-means objective");
        }
        if (prev - objective <= options.rel_tolerance * std::max(prev, 1e-300)) {
            return {centers, objective};
        }
        prev = objective;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
        Eigen::VectorXd mass = Eigen::VectorXd::Zero(k);
        for (int i = 0; i < m; ++i) {
            sums.row(labels[i]) += measure.weights[i] * measure.points.row(i);
            mass[labels[i]] += measure.weights[i];
        }
        for (int j = 0; j < k; ++j) {
            if (mass[j] > 0.0) {
                centers.centers.row(j) = sums.row(j) / mass[j];
            } else {
                // empty-cluster repair: reseed at the atom with the largest
                // contribution to the objective
                int worst = 0;
                double worst_cost = -1.0;
                for (int i = 0; i < m; ++i) {
                    double d;
                    nearest_center(measure, centers, i, &d);
                    const double cost = measure.weights[i] * d;
                    if (cost > worst_cost) {
                        worst_cost = cost;
                        worst = i;
                    }
                }
                centers.centers.row(j) = measure.points.row(worst);
            }
        }
    }
    double objective = 0.0;
    for (int i = 0; i < m; ++i) {
        double d;
        nearest_center(measure, centers, i, &d);
        objective += measure.weights[i] * d;
    }
    return {centers, objective};
}

} // namespace

double kmeans_objective(const WeightedPointSet& measure, const CenterSet& centers) {
    measure.validate();
    if (centers.count() < 1) throw InvalidArgument("objective: need at least one center");
    double total = 0.0;
    for (int i = 0; i < measure.size(); ++i) {
        double d;
        nearest_center(measure, centers, i, &d);
        total += measure.weights[i] * d;
    }
    return total;
}

KMeansResult kmeans_minimize(const WeightedPointSet& measure, int k,
                             const KMeansOptions& options) {
    measure.validate();
    if (k < 1) throw InvalidArgument("k-means: k must be at least 1");
    if (options.restarts < 1) throw InvalidArgument("k-means: restarts must be at least 1");

    // count distinct support points
    std::set<std::vector<double>> distinct;
    for (int i = 0; i < measure.size() && static_cast<int>(distinct.size()) < k; ++i) {
        std::vector<double> row(measure.points.row(i).begin(), measure.points.row(i).end());
        distinct.insert(row);
    }
    if (static_cast<int>(distinct.size()) < k) {
        // support fits inside the centers: exact zero-cost solution
        KMeansResult result;
        result.degenerate_support = true;
        result.centers.centers.resize(k, measure.ambient_dim());
        int j = 0;
        for (const auto& row : distinct) {
            for (int c = 0; c < measure.ambient_dim(); ++c) result.centers.centers(j, c) = row[c];
            ++j;
        }
        for (; j < k; ++j) result.centers.centers.row(j) = result.centers.centers.row(0);
        result.objective = 0.0;
        return result;
    }

    KMeansResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.restarts; ++r) {
        Rng rng(trial_seed(options.seed, static_cast<std::uint64_t>(r)));
        CenterSet init = seed_centers(measure, k, rng);
        LloydOutcome outcome = lloyd(measure, std::move(init), options);
        if (outcome.objective < best.objective) {
            best.objective = outcome.objective;
            best.centers = outcome.centers;
        }
    }
    return best;
}

ClusterAssignment kmeans_assign(const WeightedPointSet& measure, const CenterSet& centers) {
    measure.validate();
    const int m = measure.size();
    const int k = centers.count();
    ClusterAssignment out;
    out.labels.resize(m);
    out.cluster_mass = Eigen::VectorXd::Zero(k);
    std::vector<std::vector<int>> members(k);
    for (int i = 0; i < m; ++i) {
        bool tie = false;
        out.labels[i] = nearest_center(measure, centers, i, nullptr, &tie);
        if (tie) out.tied_mass += measure.weights[i];
        out.cluster_mass[out.labels[i]] += measure.weights[i];
        members[out.labels[i]].push_back(i);
    }
    out.restricted.resize(k);
    for (int j = 0; j < k; ++j) {
        auto& part = out.restricted[j];
        part.points.resize(members[j].size(), measure.ambient_dim());
        part.weights.resize(members[j].size());
        for (std::size_t r = 0; r < members[j].size(); ++r) {
            part.points.row(r) = measure.points.row(members[j][r]);
            part.weights[r] = measure.weights[members[j][r]];
        }
    }
    return out;
}

Eigen::VectorXd centroid_residuals(const WeightedPointSet& measure, const CenterSet& centers) {
    measure.validate();
    const int k = centers.count();
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, measure.ambient_dim());
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < measure.size(); ++i) {
        const int j = nearest_center(measure, centers, i);
        sums.row(j) += measure.weights[i] * measure.points.row(i);
        mass[j] += measure.weights[i];
    }
    Eigen::VectorXd residuals(k);
    for (int j = 0; j < k; ++j) {
        if (mass[j] > 0.0) {
            residuals[j] = (centers.centers.row(j) - sums.row(j) / mass[j]).norm();
        } else {
            residuals[j] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return residuals;
}

StabilityBound stability_check(const WeightedPointSet& mu, const WeightedPointSet& nu,
                               const CenterSet& centers, double wasserstein2_distance) {
    StabilityBound bound;
    const double f_mu = kmeans_objective(mu, centers);
    const double f_nu = kmeans_objective(nu, centers);
    bound.lhs = std::abs(f_mu - f_nu);
    bound.rhs = wasserstein2_distance *
                (2.0 * std::min(std::sqrt(f_mu), std::sqrt(f_nu)) + wasserstein2_distance);
    bound.holds = bound.lhs <= bound.rhs * (1.0 + 1e-9) + 1e-15;
    return bound;
}

} // namespace speclab
