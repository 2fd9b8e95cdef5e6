#include "topicpipe/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "topicpipe/kernels.hpp"

namespace topicpipe::cluster {

namespace {

// Type-7 quantile (linear interpolation between order statistics), the
// convention used by numpy's default. values must be sorted ascending.
double quantile_sorted(const std::vector<double>& values, double q) {
    const std::size_t n = values.size();
    if (n == 1) return values[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n) return values[n - 1];
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace

ClusterAssignment density_cluster(const std::vector<std::vector<double>>& points,
                                  const ClusterParams& params) {
    if (params.min_cluster_size < 2) {
        throw std::invalid_argument("density_cluster: min_cluster_size must be >= 2");
    }
    if (!(params.neighborhood_quantile > 0.0 && params.neighborhood_quantile < 1.0)) {
        throw std::invalid_argument("density_cluster: neighborhood_quantile must be in (0,1)");
    }
    if (params.min_core_neighbors < 1) {
        throw std::invalid_argument("density_cluster: min_core_neighbors must be >= 1");
    }

    ClusterAssignment result;
    const std::size_t n = points.size();
    if (n == 0) throw std::invalid_argument("density_cluster: need at least one point");
    const std::size_t dim = points[0].size();
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw std::invalid_argument("density_cluster: inconsistent point dimensions");
        }
    }

    result.labels.assign(n, -1);
    if (n < params.min_core_neighbors) {
        result.warnings.push_back("fewer points (" + std::to_string(n) +
                                  ") than min_core_neighbors (" +
                                  std::to_string(params.min_core_neighbors) +
                                  "); all points marked outliers");
        return result;
    }
    const std::size_t k = std::min(params.min_core_neighbors, n - 1);

    // Full pairwise squared distances; the quadratic table keeps every later
    // stage a simple scan.
    std::vector<double> dist_sq(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = kernels::squared_distance(points[i].data(), points[j].data(), dim);
            dist_sq[i * n + j] = d;
            dist_sq[j * n + i] = d;
        }
    }

    // eps from the quantile of k-th nearest neighbor distances.
    std::vector<double> knn_dist(n);
    {
        std::vector<double> row;
        row.reserve(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            row.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) row.push_back(dist_sq[i * n + j]);
            }
            std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1),
                             row.end());
            knn_dist[i] = std::sqrt(row[k - 1]);
        }
    }
    std::vector<double> sorted_knn = knn_dist;
    std::sort(sorted_knn.begin(), sorted_knn.end());
    const double eps = quantile_sorted(sorted_knn, params.neighborhood_quantile);
    const double eps_sq = eps * eps;

    // Core points: at least k neighbors within eps. Equivalent to the k-th
    // NN distance being <= eps, but counted directly for clarity.
    std::vector<bool> core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t within = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && dist_sq[i * n + j] <= eps_sq) ++within;
        }
        core[i] = within >= k;
    }

    // Connected components of core points under eps-reachability.
    std::vector<int> provisional(n, -1);
    int component_count = 0;
    {
        std::queue<std::size_t> frontier;
        for (std::size_t i = 0; i < n; ++i) {
            if (!core[i] || provisional[i] != -1) continue;
            const int comp = component_count++;
            provisional[i] = comp;
            frontier.push(i);
            while (!frontier.empty()) {
                const std::size_t p = frontier.front();
                frontier.pop();
                for (std::size_t j = 0; j < n; ++j) {
                    if (core[j] && provisional[j] == -1 && dist_sq[p * n + j] <= eps_sq) {
                        provisional[j] = comp;
                        frontier.push(j);
                    }
                }
            }
        }
    }

    // Non-core points attach to the nearest core point within eps; distance
    // ties resolve to the lowest provisional cluster id.
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        double best = std::numeric_limits<double>::infinity();
        int best_cluster = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (!core[j]) continue;
            const double d = dist_sq[i * n + j];
            if (d > eps_sq) continue;
            if (d < best || (d == best && provisional[j] < best_cluster)) {
                best = d;
                best_cluster = provisional[j];
            }
        }
        provisional[i] = best_cluster;  // stays -1 when no core point is in range
    }

    // Dissolve undersized clusters, then renumber survivors by size
    // (descending), ties by smallest member index.
    std::vector<std::size_t> size(static_cast<std::size_t>(component_count), 0);
    std::vector<std::size_t> first_member(static_cast<std::size_t>(component_count), n);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = provisional[i];
        if (c < 0) continue;
        ++size[static_cast<std::size_t>(c)];
        first_member[static_cast<std::size_t>(c)] =
            std::min(first_member[static_cast<std::size_t>(c)], i);
    }
    std::vector<int> survivors;
    for (int c = 0; c < component_count; ++c) {
        if (size[static_cast<std::size_t>(c)] >= params.min_cluster_size) survivors.push_back(c);
    }
    std::sort(survivors.begin(), survivors.end(), [&](int a, int b) {
        const std::size_t sa = size[static_cast<std::size_t>(a)];
        const std::size_t sb = size[static_cast<std::size_t>(b)];
        if (sa != sb) return sa > sb;
        return first_member[static_cast<std::size_t>(a)] < first_member[static_cast<std::size_t>(b)];
    });
    std::vector<int> renumbered(static_cast<std::size_t>(component_count), -1);
    for (std::size_t rank = 0; rank < survivors.size(); ++rank) {
        renumbered[static_cast<std::size_t>(survivors[rank])] = static_cast<int>(rank);
    }
    for (std::size_t i = 0; i < n; ++i) {
        result.labels[i] = provisional[i] < 0 ? -1 : renumbered[static_cast<std::size_t>(provisional[i])];
    }
    result.cluster_count = static_cast<int>(survivors.size());
    return result;
}

}  // namespace topicpipe::cluster
