#include "speclab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>

#include "speclab/errors.hpp"

namespace speclab {

Eigen::VectorXd TransportPlan::source_marginals(int source_size) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(source_size);
    for (const Entry& e : entries) out[e.source] += e.mass;
    return out;
}

Eigen::VectorXd TransportPlan::target_marginals(int target_size) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(target_size);
    for (const Entry& e : entries) out[e.target] += e.mass;
    return out;
}

namespace {

/// Primal network simplex for the dense, uncapacitated transportation
/// problem. Costs are scaled to int64 so reduced-cost comparisons are exact
/// and the pivot loop terminates; flows stay in double. The spanning tree is
/// kept as parent/pred arrays with explicit children lists; subtree sizes
/// (succ_num) drive the join search, and potentials are updated by a subtree
/// walk after each pivot.
class TransportSimplex {
public:
    TransportSimplex(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                     const Eigen::VectorXd& demand)
        : n1_(static_cast<int>(supply.size())),
          n2_(static_cast<int>(demand.size())),
          node_count_(n1_ + n2_),
          root_(n1_ + n2_),
          arc_count_(static_cast<long>(n1_) * n2_) {
        if (cost.rows() != n1_ || cost.cols() != n2_) {
            throw InvalidArgument("transport: cost matrix shape mismatch");
        }
        // integer cost scaling: top of the range ~2^44 keeps the relative
        // quantization near 6e-14 while sums of O(n) potentials fit in int64
        double cmax = 0.0;
        for (int i = 0; i < n1_; ++i) {
            for (int j = 0; j < n2_; ++j) {
                const double c = cost(i, j);
                if (!(c >= 0.0) || !std::isfinite(c)) {
                    throw InvalidArgument("transport: costs must be finite and nonnegative");
                }
                cmax = std::max(cmax, c);
            }
        }
        scale_ = cmax > 0.0 ? static_cast<double>(std::int64_t(1) << 44) / cmax : 1.0;
        cost_.resize(arc_count_);
        std::int64_t scaled_max = 0;
        for (int i = 0; i < n1_; ++i) {
            for (int j = 0; j < n2_; ++j) {
                const std::int64_t c = llround(cost(i, j) * scale_);
                cost_[static_cast<long>(i) * n2_ + j] = c;
                scaled_max = std::max(scaled_max, c);
            }
        }
        art_cost_ = (scaled_max + 1) * static_cast<std::int64_t>(node_count_ + 1);

        supply_.resize(node_count_);
        for (int i = 0; i < n1_; ++i) supply_[i] = supply[i];
        for (int j = 0; j < n2_; ++j) supply_[n1_ + j] = -demand[j];

        flow_.assign(arc_count_, 0.0);
        art_flow_.assign(node_count_, 0.0);
        in_tree_.assign(arc_count_, false);

        // initial star tree through the root via the artificial arcs
        parent_.assign(node_count_ + 1, root_);
        pred_arc_.assign(node_count_ + 1, -1);
        pred_to_parent_.assign(node_count_ + 1, false);
        pi_.assign(node_count_ + 1, 0);
        succ_num_.assign(node_count_ + 1, 1);
        children_.assign(node_count_ + 1, {});
        parent_[root_] = -1;
        succ_num_[root_] = node_count_ + 1;
        children_[root_].reserve(node_count_);
        for (int v = 0; v < node_count_; ++v) {
            pred_arc_[v] = arc_count_ + v;
            children_[root_].push_back(v);
            art_flow_[v] = std::abs(supply_[v]);
            if (supply_[v] >= 0.0) {
                pred_to_parent_[v] = true;  // arc v -> root
                pi_[v] = -art_cost_;
            } else {
                pred_to_parent_[v] = false;  // arc root -> v
                pi_[v] = art_cost_;
            }
        }
    }

    void run() {
        const long pivot_limit = 200L * (node_count_ + 16) * 64L;
        long pivots = 0;
        while (find_entering()) {
            pivot();
            if (++pivots > pivot_limit) {
                throw SolverError("transport: pivot limit exceeded");
            }
        }
        verify_optimality();
    }

    TransportPlan extract(const Eigen::MatrixXd& original_cost) const {
        TransportPlan plan;
        for (long e = 0; e < arc_count_; ++e) {
            if (flow_[e] > 0.0) {
                const int i = static_cast<int>(e / n2_);
                const int j = static_cast<int>(e % n2_);
                plan.entries.push_back({i, j, flow_[e]});
                plan.cost += flow_[e] * original_cost(i, j);
            }
        }
        return plan;
    }

private:
    int src(long e) const { return static_cast<int>(e / n2_); }
    int tgt(long e) const { return n1_ + static_cast<int>(e % n2_); }

    double& flow_of(long e) {
        return e < arc_count_ ? flow_[e] : art_flow_[e - arc_count_];
    }

    bool find_entering() {
        const long block =
            std::max<long>(64, static_cast<long>(std::sqrt(static_cast<double>(arc_count_))));
        long countdown = block;
        std::int64_t best_rc = 0;
        long candidate = -1;
        for (long scanned = 0; scanned < arc_count_; ++scanned) {
            const long e = next_arc_;
            next_arc_ = next_arc_ + 1 == arc_count_ ? 0 : next_arc_ + 1;
            if (!in_tree_[e]) {
                const std::int64_t rc = cost_[e] + pi_[src(e)] - pi_[tgt(e)];
                if (rc < best_rc) {
                    best_rc = rc;
                    candidate = e;
                }
            }
            if (--countdown == 0) {
                if (candidate >= 0) break;
                countdown = block;
            }
        }
        in_arc_ = candidate;
        return candidate >= 0;
    }

    void pivot() {
        const long e = in_arc_;
        const int u = src(e);
        const int v = tgt(e);
        const std::int64_t rc = cost_[e] + pi_[u] - pi_[v];

        // join = lowest common ancestor; the node with the smaller subtree
        // cannot be an ancestor of the other
        int a = u, b = v;
        while (a != b) {
            if (succ_num_[a] < succ_num_[b]) a = parent_[a]; else b = parent_[b];
        }
        const int join = a;

        // leaving arc: smallest flow among the cycle arcs that lose flow.
        // Orientation: +delta travels u -> v across the entering arc, closes
        // v -> join -> u through the tree.
        double delta = std::numeric_limits<double>::infinity();
        int leaving_node = -1;
        bool leaving_on_u_side = true;
        for (int z = u; z != join; z = parent_[z]) {
            if (pred_to_parent_[z]) {
                const double f = flow_of(pred_arc_[z]);
                if (f < delta) { delta = f; leaving_node = z; leaving_on_u_side = true; }
            }
        }
        for (int z = v; z != join; z = parent_[z]) {
            if (!pred_to_parent_[z]) {
                const double f = flow_of(pred_arc_[z]);
                if (f <= delta) { delta = f; leaving_node = z; leaving_on_u_side = false; }
            }
        }
        if (leaving_node < 0) {
            throw InternalError("transport: unbounded pivot in a balanced problem");
        }

        if (delta > 0.0) {
            flow_[e] += delta;
            for (int z = u; z != join; z = parent_[z]) {
                flow_of(pred_arc_[z]) += pred_to_parent_[z] ? -delta : delta;
            }
            for (int z = v; z != join; z = parent_[z]) {
                flow_of(pred_arc_[z]) += pred_to_parent_[z] ? delta : -delta;
            }
        }
        flow_of(pred_arc_[leaving_node]) = 0.0;  // clear pivot round-off

        // restructure: detach the subtree under leaving_node, re-root it at
        // the entering arc's endpoint inside it, reattach across the arc
        const long leaving_arc = pred_arc_[leaving_node];
        if (leaving_arc < arc_count_) in_tree_[leaving_arc] = false;
        in_tree_[e] = true;

        const int inside = leaving_on_u_side ? u : v;
        const int outside = leaving_on_u_side ? v : u;
        const int moved = succ_num_[leaving_node];

        for (int z = parent_[leaving_node]; z != -1; z = parent_[z]) succ_num_[z] -= moved;
        drop_child(parent_[leaving_node], leaving_node);

        // reverse the chain inside -> ... -> leaving_node
        int node = inside;
        int prev_parent = parent_[node];
        long prev_arc = pred_arc_[node];
        bool prev_dir = pred_to_parent_[node];
        parent_[node] = outside;
        pred_arc_[node] = e;
        pred_to_parent_[node] = (node == u);  // entering arc points u -> v
        while (node != leaving_node) {
            const int next = prev_parent;
            const int next_parent = parent_[next];
            const long next_arc = pred_arc_[next];
            const bool next_dir = pred_to_parent_[next];
            drop_child(next, node);
            parent_[next] = node;
            pred_arc_[next] = prev_arc;
            pred_to_parent_[next] = !prev_dir;
            children_[node].push_back(next);
            node = next;
            prev_parent = next_parent;
            prev_arc = next_arc;
            prev_dir = next_dir;
        }
        children_[outside].push_back(inside);
        for (int z = outside; z != -1; z = parent_[z]) succ_num_[z] += moved;

        // one walk over the moved subtree: shift potentials so the entering
        // arc's reduced cost becomes zero, and rebuild subtree sizes changed
        // by the re-rooting
        const std::int64_t shift = (inside == v) ? rc : -rc;
        dfs_order_.clear();
        dfs_order_.push_back(inside);
        for (std::size_t head = 0; head < dfs_order_.size(); ++head) {
            const int z = dfs_order_[head];
            pi_[z] += shift;
            for (int c : children_[z]) dfs_order_.push_back(c);
        }
        for (std::size_t idx = dfs_order_.size(); idx-- > 0;) {
            const int z = dfs_order_[idx];
            int count = 1;
            for (int c : children_[z]) count += succ_num_[c];
            succ_num_[z] = count;
        }
    }

    void drop_child(int parent, int child) {
        auto& kids = children_[parent];
        for (std::size_t i = 0; i < kids.size(); ++i) {
            if (kids[i] == child) {
                kids[i] = kids.back();
                kids.pop_back();
                return;
            }
        }
        throw InternalError("transport: spanning tree child list corrupted");
    }

    void verify_optimality() const {
        for (long e = 0; e < arc_count_; ++e) {
            if (!in_tree_[e] && cost_[e] + pi_[src(e)] - pi_[tgt(e)] < 0) {
                throw InternalError("transport: negative reduced cost after convergence");
            }
        }
        double residual = 0.0;
        for (int v = 0; v < node_count_; ++v) residual += art_flow_[v];
        if (residual > 1e-7) {
            throw SolverError("transport: unabsorbed artificial flow (unbalanced problem?)");
        }
    }

    int n1_, n2_, node_count_, root_;
    long arc_count_;
    double scale_ = 1.0;
    std::int64_t art_cost_ = 0;
    std::vector<std::int64_t> cost_;
    std::vector<double> supply_;
    std::vector<double> flow_;
    std::vector<double> art_flow_;
    std::vector<bool> in_tree_;

    std::vector<int> parent_;
    std::vector<long> pred_arc_;  // >= arc_count_ means the node's artificial arc
    std::vector<char> pred_to_parent_;
    std::vector<std::int64_t> pi_;
    std::vector<int> succ_num_;
    std::vector<std::vector<int>> children_;
    std::vector<int> dfs_order_;

    long next_arc_ = 0;
    long in_arc_ = -1;
};

Eigen::MatrixXd squared_distance_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd cost(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.rows(); ++j) {
            cost(i, j) = (a.row(i) - b.row(j)).squaredNorm();
        }
    }
    return cost;
}

void check_budget(int m1, int m2, const TransportOptions& options) {
    if (m1 > options.max_support || m2 > options.max_support) {
        throw ResourceError("transport: support exceeds the exact-solver budget of " +
                            std::to_string(options.max_support) + " points per side");
    }
}

} // namespace

TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                              const Eigen::VectorXd& demand) {
    if (supply.size() == 0 || demand.size() == 0) {
        throw InvalidArgument("transport: empty marginal");
    }
    for (int i = 0; i < supply.size(); ++i) {
        if (!(supply[i] > 0.0)) throw InvalidArgument("transport: supplies must be positive");
    }
    for (int j = 0; j < demand.size(); ++j) {
        if (!(demand[j] > 0.0)) throw InvalidArgument("transport: demands must be positive");
    }
    const double total_supply = supply.sum();
    const double total_demand = demand.sum();
    if (std::abs(total_supply - total_demand) > 1e-6 * std::max(total_supply, total_demand)) {
        throw InvalidArgument("transport: marginals carry different total mass");
    }
    // make the totals match exactly so no artificial flow survives
    Eigen::VectorXd balanced = demand;
    int largest = 0;
    balanced.maxCoeff(&largest);
    balanced[largest] += total_supply - total_demand;

    TransportSimplex simplex(cost, supply, balanced);
    simplex.run();
    return simplex.extract(cost);
}

TransportResult wasserstein2(const WeightedPointSet& mu, const WeightedPointSet& nu,
                             const TransportOptions& options) {
    mu.validate();
    nu.validate();
    if (mu.ambient_dim() != nu.ambient_dim()) {
        throw InvalidArgument("transport: ambient dimension mismatch");
    }
    check_budget(mu.size(), nu.size(), options);
    TransportResult result;
    result.plan = solve_transport(squared_distance_matrix(mu.points, nu.points),
                                  mu.weights, nu.weights);
    result.distance = std::sqrt(std::max(0.0, result.plan.cost));
    return result;
}

TransportResult tl2_distance(const WeightedPointSet& mu, const Eigen::VectorXd& f,
                             const WeightedPointSet& nu, const Eigen::VectorXd& g,
                             const TransportOptions& options) {
    if (f.size() != mu.size() || g.size() != nu.size()) {
        throw InvalidArgument("tl2: function values must match the supports");
    }
    // TL2 is the Wasserstein distance between the graph measures (x, f(x))
    WeightedPointSet lifted_mu{Eigen::MatrixXd(mu.size(), mu.ambient_dim() + 1), mu.weights};
    lifted_mu.points.leftCols(mu.ambient_dim()) = mu.points;
    lifted_mu.points.rightCols(1) = f;
    WeightedPointSet lifted_nu{Eigen::MatrixXd(nu.size(), nu.ambient_dim() + 1), nu.weights};
    lifted_nu.points.leftCols(nu.ambient_dim()) = nu.points;
    lifted_nu.points.rightCols(1) = g;
    return wasserstein2(lifted_mu, lifted_nu, options);
}

WeightedPointSet pushforward(const WeightedPointSet& measure, const Eigen::MatrixXd& images) {
    measure.validate();
    if (images.rows() != measure.size()) {
        throw InvalidArgument("pushforward: one image per atom required");
    }
    std::map<std::vector<double>, double> merged;
    for (int i = 0; i < measure.size(); ++i) {
        std::vector<double> key(images.row(i).begin(), images.row(i).end());
        merged[key] += measure.weights[i];
    }
    WeightedPointSet out;
    out.points.resize(static_cast<int>(merged.size()), images.cols());
    out.weights.resize(static_cast<int>(merged.size()));
    int r = 0;
    for (const auto& [key, mass] : merged) {
        for (int c = 0; c < images.cols(); ++c) out.points(r, c) = key[c];
        out.weights[r] = mass;
        ++r;
    }
    return out;
}

std::vector<int> quantize_to_units(const Eigen::VectorXd& weights, int n) {
    if (n < 1) throw InvalidArgument("quantize: need at least one unit");
    const int m = static_cast<int>(weights.size());
    // remainder rounding with prefix balancing: cell i receives
    // round(n cum_i) - round(n cum_{i-1}) units, so every prefix of the scan
    // order carries its fair share to within half a unit. A global
    // largest-remainder pass would concentrate the rounded-up cells wherever
    // the tie-break points when many weights tie exactly (uniform density),
    // which wrecks the matching; prefix balancing keeps the quantization
    // spatially even in that case.
    const double total = weights.sum();
    if (!(total > 0.0)) throw InvalidArgument("quantize: weights must have positive mass");
    std::vector<int> units(m, 0);
    double cum = 0.0;
    long prev = 0;
    for (int i = 0; i < m; ++i) {
        if (weights[i] < 0.0) throw InvalidArgument("quantize: negative weight");
        cum += weights[i];
        const long cur = llround(cum / total * n);
        units[i] = static_cast<int>(cur - prev);
        prev = cur;
    }
    if (prev != n) throw InternalError("quantize: unit bookkeeping failed");
    return units;
}

namespace {

/// Hopcroft-Karp maximum matching on the bipartite graph of unit/sample pairs
/// within a distance threshold; adjacency passed as per-unit candidate lists.
class BipartiteMatcher {
public:
    explicit BipartiteMatcher(int left, int right) : left_(left), right_(right) {}

    bool perfect_matching(const std::vector<std::vector<int>>& adjacency,
                          std::vector<int>* match_left) {
        match_left_.assign(left_, -1);
        match_right_.assign(right_, -1);
        int matched = 0;
        while (bfs(adjacency)) {
            for (int u = 0; u < left_; ++u) {
                if (match_left_[u] == -1 && dfs(adjacency, u)) ++matched;
            }
        }
        if (matched == left_ && left_ == right_) {
            *match_left = match_left_;
            return true;
        }
        return false;
    }

private:
    static constexpr int kInf = std::numeric_limits<int>::max();

    bool bfs(const std::vector<std::vector<int>>& adjacency) {
        std::queue<int> frontier;
        dist_.assign(left_, kInf);
        for (int u = 0; u < left_; ++u) {
            if (match_left_[u] == -1) {
                dist_[u] = 0;
                frontier.push(u);
            }
        }
        bool reachable = false;
        while (!frontier.empty()) {
            const int u = frontier.front();
            frontier.pop();
            for (int v : adjacency[u]) {
                const int w = match_right_[v];
                if (w == -1) {
                    reachable = true;
                } else if (dist_[w] == kInf) {
                    dist_[w] = dist_[u] + 1;
                    frontier.push(w);
                }
            }
        }
        return reachable;
    }

    bool dfs(const std::vector<std::vector<int>>& adjacency, int u) {
        for (int v : adjacency[u]) {
            const int w = match_right_[v];
            if (w == -1 || (dist_[w] == dist_[u] + 1 && dfs(adjacency, w))) {
                match_left_[u] = v;
                match_right_[v] = u;
                return true;
            }
        }
        dist_[u] = kInf;
        return false;
    }

    int left_, right_;
    std::vector<int> match_left_, match_right_, dist_;
};

} // namespace

TransportMap infinity_matching(const GridMeasure& grid, const PointCloud& cloud) {
    const int n = static_cast<int>(cloud.points.rows());
    if (n < 1) throw InvalidArgument("matching: empty sample");
    if (grid.atoms.cols() != cloud.points.cols()) {
        throw InvalidArgument("matching: dimension mismatch");
    }
    const std::vector<int> units = quantize_to_units(grid.weights, n);

    std::vector<int> unit_cell;
    unit_cell.reserve(n);
    for (int c = 0; c < static_cast<int>(units.size()); ++c) {
        for (int r = 0; r < units[c]; ++r) unit_cell.push_back(c);
    }

    // distinct occupied cells; units in the same cell share candidate lists
    std::vector<int> occupied;
    for (int c = 0; c < static_cast<int>(units.size()); ++c) {
        if (units[c] > 0) occupied.push_back(c);
    }
    const int oc = static_cast<int>(occupied.size());
    Eigen::MatrixXd dist(oc, n);
    std::vector<double> all;
    all.reserve(static_cast<std::size_t>(oc) * n);
    for (int a = 0; a < oc; ++a) {
        for (int j = 0; j < n; ++j) {
            dist(a, j) = (grid.atoms.row(occupied[a]) - cloud.points.row(j)).norm();
            all.push_back(dist(a, j));
        }
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    std::vector<int> cell_of_occupied(units.size(), -1);
    for (int a = 0; a < oc; ++a) cell_of_occupied[occupied[a]] = a;

    auto feasible = [&](double radius, std::vector<int>* match) {
        std::vector<std::vector<int>> adjacency(n);
        for (int u = 0; u < n; ++u) {
            const int a = cell_of_occupied[unit_cell[u]];
            for (int j = 0; j < n; ++j) {
                if (dist(a, j) <= radius) adjacency[u].push_back(j);
            }
        }
        BipartiteMatcher matcher(n, n);
        return matcher.perfect_matching(adjacency, match);
    };

    // binary search the smallest feasible threshold over the candidate radii
    std::vector<int> match;
    std::size_t lo = 0, hi = all.size() - 1;
    if (!feasible(all[hi], &match)) {
        throw InternalError("matching: complete threshold infeasible");
    }
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        std::vector<int> trial;
        if (feasible(all[mid], &trial)) {
            hi = mid;
            match = std::move(trial);
        } else {
            lo = mid + 1;
        }
    }

    TransportMap out;
    out.source_cell = unit_cell;
    out.target = match;
    out.sup_displacement = all[hi];
    return out;
}

Tl2ViaMap tl2_via_map(const TransportMap& map, const GridMeasure& grid,
                      const Eigen::VectorXd& grid_values, const PointCloud& cloud,
                      const Eigen::VectorXd& node_values) {
    const int n = static_cast<int>(map.source_cell.size());
    if (n < 1 || map.target.size() != map.source_cell.size()) {
        throw InvalidArgument("tl2_via_map: empty or inconsistent map");
    }
    if (grid_values.size() != grid.atoms.rows() || node_values.size() != cloud.points.rows()) {
        throw InvalidArgument("tl2_via_map: value vectors must match the supports");
    }
    double fn = 0.0;
    double total = 0.0;
    for (int u = 0; u < n; ++u) {
        const int c = map.source_cell[u];
        const int j = map.target[u];
        const double df = grid_values[c] - node_values[j];
        const double dx = (grid.atoms.row(c) - cloud.points.row(j)).squaredNorm();
        fn += df * df;
        total += df * df + dx;
    }
    Tl2ViaMap out;
    out.function_part = std::sqrt(fn / n);
    out.total = std::sqrt(total / n);
    return out;
}

} // namespace speclab
