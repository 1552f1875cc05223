#pragma once

#include <string>
#include <vector>

#include "lvnf/sim3.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct Partition {
  int k = 1;
  std::vector<int> labels;     // per frame, in [0, k)
  std::vector<Vec3> centroids; // per cluster, camera-position centroid

  Sim3 local_frame(int cluster) const { return Sim3::translation(centroids[cluster]); }
};

struct SpectralOptions {
  double bandwidth = 10.0;  // affinity length scale, metres
  int kmeans_restarts = 10;
  int kmeans_iters = 100;
  uint64_t seed = 0;
};

// Gaussian affinity on camera positions, normalized symmetric Laplacian,
// k smallest eigenvectors, row normalization, seeded k-means.
Partition spectral_partition(const std::vector<Vec3>& positions, int k,
                             const SpectralOptions& opt = {});

// Submap count from the XY bounding-box area at ~50x50 m per submap.
int auto_k(const std::vector<Vec3>& positions);

// Partition file: JSON mapping frame id -> cluster plus per-cluster centroids.
void write_partition(const std::string& path, const Partition& p,
                     const std::vector<int>& frame_ids);
Partition read_partition(const std::string& path, const std::vector<int>& frame_ids);

// Sum of within-cluster squared distances to the centroid (clustering quality,
// invariant to label permutation).
double partition_cost(const std::vector<Vec3>& positions, const std::vector<int>& labels, int k);

}  // namespace lvnf
