#pragma once

#include <cstdint>
#include <string>

#include "voxflow/ml/matrix.hpp"

namespace voxflow::ml {

enum class ClusterAlgo { KMeans, KMedoids, Gmm, Agglomerative };
ClusterAlgo cluster_algo_from_string(const std::string &s);
const char *to_string(ClusterAlgo a);

struct ClusterResult {
  std::vector<int> labels; // 0..k-1, numbered by first appearance
  Matrix centers;          // kmeans / kmedoids / gmm means, in label order
  double inertia = 0;      // sum of squared distances to the assigned centre
  std::vector<double> inertia_history; // kmeans: per Lloyd step of the kept restart
};

ClusterResult cluster(const Matrix &x, ClusterAlgo algo, std::size_t k, std::uint64_t seed);

} // namespace voxflow::ml
