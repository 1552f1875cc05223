#include "lvnf/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "lvnf/rng.hpp"

namespace lvnf {

namespace {

// Lloyd's algorithm with k-means++ style seeding, one run.
double kmeans_once(const MatX& rows, int k, Rng& rng, std::vector<int>& labels, int iters) {
  const int n = int(rows.rows());
  MatX centers(k, rows.cols());

  // k-means++ seeding
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  int first = int(rng.uniform_int(uint64_t(n)));
  centers.row(0) = rows.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = (rows.row(i) - centers.row(c - 1)).squaredNorm();
      d2[i] = std::min(d2[i], d);
      total += d2[i];
    }
    double u = rng.uniform() * total;
    int pick = n - 1;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc >= u) {
        pick = i;
        break;
      }
    }
    centers.row(c) = rows.row(pick);
  }

  labels.assign(n, 0);
  double cost = 0.0;
  for (int it = 0; it < iters; ++it) {
    bool changed = false;
    cost = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = (rows.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
      cost += best_d;
    }
    MatX sums = MatX::Zero(k, rows.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(labels[i]) += rows.row(i);
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        // Re-seed an empty cluster at the farthest point.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          double d = (rows.row(i) - centers.row(labels[i])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centers.row(c) = rows.row(far);
        changed = true;
      }
    }
    if (!changed && it > 0) break;
  }
  return cost;
}

}  // namespace

Partition spectral_partition(const std::vector<Vec3>& positions, int k,
                             const SpectralOptions& opt) {
  const int n = int(positions.size());
  if (k < 1) throw std::invalid_argument("spectral_partition: k must be >= 1");
  if (k > n) throw std::invalid_argument("spectral_partition: k exceeds frame count");

  Partition part;
  part.k = k;
  part.labels.assign(n, 0);

  if (k > 1) {
    // Affinity and normalized symmetric Laplacian.
    MatX W(n, n);
    const double inv = 1.0 / (2.0 * opt.bandwidth * opt.bandwidth);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        W(i, j) = std::exp(-(positions[i] - positions[j]).squaredNorm() * inv);
    VecX dinv_sqrt = W.rowwise().sum().array().max(1e-300).rsqrt();
    MatX L = MatX::Identity(n, n) - dinv_sqrt.asDiagonal() * W * dinv_sqrt.asDiagonal();

    Eigen::SelfAdjointEigenSolver<MatX> eig(L);
    MatX U = eig.eigenvectors().leftCols(k);
    for (int i = 0; i < n; ++i) {
      double norm = U.row(i).norm();
      if (norm > 1e-12) U.row(i) /= norm;
    }

    Rng rng(opt.seed);
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<int> labels;
    for (int r = 0; r < opt.kmeans_restarts; ++r) {
      std::vector<int> trial;
      double cost = kmeans_once(U, k, rng, trial, opt.kmeans_iters);
      if (cost < best_cost) {
        best_cost = cost;
        part.labels = trial;
      }
      (void)labels;
    }
  }

  part.centroids.assign(k, Vec3::Zero());
  std::vector<int> counts(k, 0);
  for (int i = 0; i < n; ++i) {
    part.centroids[part.labels[i]] += positions[i];
    ++counts[part.labels[i]];
  }
  for (int c = 0; c < k; ++c)
    if (counts[c] > 0) part.centroids[c] /= counts[c];
  return part;
}

int auto_k(const std::vector<Vec3>& positions) {
  if (positions.empty()) throw std::invalid_argument("auto_k: empty trajectory");
  Vec2 lo(positions[0].x(), positions[0].y());
  Vec2 hi = lo;
  for (const auto& p : positions) {
    lo = lo.cwiseMin(Vec2(p.x(), p.y()));
    hi = hi.cwiseMax(Vec2(p.x(), p.y()));
  }
  double area = (hi.x() - lo.x()) * (hi.y() - lo.y());
  return std::max(1, int(std::ceil(area / 2500.0)));
}

double partition_cost(const std::vector<Vec3>& positions, const std::vector<int>& labels, int k) {
  std::vector<Vec3> centroids(k, Vec3::Zero());
  std::vector<int> counts(k, 0);
  for (size_t i = 0; i < positions.size(); ++i) {
    centroids[labels[i]] += positions[i];
    ++counts[labels[i]];
  }
  for (int c = 0; c < k; ++c)
    if (counts[c] > 0) centroids[c] /= counts[c];
  double cost = 0.0;
  for (size_t i = 0; i < positions.size(); ++i)
    cost += (positions[i] - centroids[labels[i]]).squaredNorm();
  return cost;
}

void write_partition(const std::string& path, const Partition& p,
                     const std::vector<int>& frame_ids) {
  nlohmann::json j;
  j["k"] = p.k;
  nlohmann::json labels = nlohmann::json::object();
  for (size_t i = 0; i < p.labels.size(); ++i)
    labels[std::to_string(frame_ids[i])] = p.labels[i];
  j["labels"] = labels;
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& c : p.centroids) cents.push_back({c.x(), c.y(), c.z()});
  j["centroids"] = cents;
  std::ofstream os(path);
  if (!os) throw DataError("cannot write partition: " + path);
  os << j.dump(2) << "\n";
}

Partition read_partition(const std::string& path, const std::vector<int>& frame_ids) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open partition: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed partition json " + path + ": " + e.what());
  }
  Partition p;
  p.k = j.at("k").get<int>();
  p.labels.resize(frame_ids.size());
  for (size_t i = 0; i < frame_ids.size(); ++i) {
    std::string key = std::to_string(frame_ids[i]);
    if (!j.at("labels").contains(key))
      throw DataError("partition " + path + " missing frame id " + key);
    p.labels[i] = j.at("labels").at(key).get<int>();
    if (p.labels[i] < 0 || p.labels[i] >= p.k)
      throw DataError("partition " + path + " has out-of-range label for frame " + key);
  }
  for (const auto& c : j.at("centroids"))
    p.centroids.emplace_back(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
  if (int(p.centroids.size()) != p.k) throw DataError("partition " + path + " centroid count mismatch");
  return p;
}

}  // namespace lvnf
