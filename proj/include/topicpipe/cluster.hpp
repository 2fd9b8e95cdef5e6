#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace topicpipe::cluster {

struct ClusterParams {
    std::size_t min_cluster_size = 100;
    double neighborhood_quantile = 0.9;
    std::size_t min_core_neighbors = 5;
    int64_t seed = 0;  // recorded in the run manifest; the algorithm is deterministic
};

/// labels[i] in {-1, 0, .., K-1}; -1 marks outliers. Every cluster has at
/// least min_cluster_size members and ids run in decreasing cluster-size
/// order (ties broken by smallest member index).
struct ClusterAssignment {
    std::vector<int> labels;
    int cluster_count = 0;
    std::vector<std::string> warnings;
};

/// Density clustering on Euclidean distance:
///   1. eps = neighborhood_quantile quantile (linear interpolation on the
///      sorted values) of each point's distance to its
///      min_core_neighbors-th nearest neighbor,
///   2. core points have >= min_core_neighbors neighbors within eps,
///   3. clusters = connected components of core points under eps-reach,
///   4. non-core points join the cluster of the nearest core point within
///      eps (distance ties -> lowest provisional cluster id), else outlier,
///   5. clusters smaller than min_cluster_size dissolve into outliers,
///   6. surviving clusters renumber by size (desc), then smallest member
///      index.
/// Fewer points than min_core_neighbors yields all outliers plus a warning.
/// min_core_neighbors is clamped to n-1 when only n-1 neighbors exist.
ClusterAssignment density_cluster(const std::vector<std::vector<double>>& points,
                                  const ClusterParams& params);

}  // namespace topicpipe::cluster
