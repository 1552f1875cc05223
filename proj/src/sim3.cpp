#include "lvnf/sim3.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lvnf {

Sim3 umeyama_sim3(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size())
    throw std::invalid_argument("umeyama_sim3: point lists differ in length");
  const int n = int(src.size());
  if (n < 3) throw std::invalid_argument("umeyama_sim3: need at least 3 correspondences");

  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    mu_s += src[i];
    mu_d += dst[i];
  }
  mu_s /= n;
  mu_d /= n;

  Mat3 cov = Mat3::Zero();  // dst x src cross-covariance
  double var_s = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec3 xs = src[i] - mu_s;
    Vec3 xd = dst[i] - mu_d;
    cov += xd * xs.transpose();
    var_s += xs.squaredNorm();
  }
  cov /= n;
  var_s /= n;

  if (var_s < 1e-18) throw std::invalid_argument("umeyama_sim3: source points are coincident");

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 d = svd.singularValues();
  if (d[1] < 1e-12 * std::max(d[0], 1e-300))
    throw std::invalid_argument("umeyama_sim3: source points are collinear (rank-deficient)");

  Vec3 sign_fix(1.0, 1.0, 1.0);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) sign_fix[2] = -1.0;

  Mat3 R = svd.matrixU() * sign_fix.asDiagonal() * svd.matrixV().transpose();
  double scale = d.dot(sign_fix) / var_s;

  Sim3 out;
  out.s = scale;
  out.q = Quat(R).normalized();
  out.t = mu_d - scale * (R * mu_s);
  return out;
}

RescaleResult rescale_trajectory(const Trajectory& up_to_scale, const Trajectory& metric,
                                 double max_dt) {
  std::vector<Vec3> src, dst;
  size_t j = 0;
  for (const auto& pose : up_to_scale.poses) {
    while (j + 1 < metric.poses.size() &&
           std::abs(metric.poses[j + 1].timestamp - pose.timestamp) <=
               std::abs(metric.poses[j].timestamp - pose.timestamp))
      ++j;
    if (j < metric.poses.size() && std::abs(metric.poses[j].timestamp - pose.timestamp) <= max_dt) {
      src.push_back(pose.t);
      dst.push_back(metric.poses[j].t);
    }
  }
  if (src.size() < 3)
    throw std::invalid_argument("rescale_trajectory: fewer than 3 timestamp associations");

  RescaleResult out;
  out.transform = umeyama_sim3(src, dst);
  out.associations = int(src.size());
  out.trajectory = up_to_scale;
  for (auto& pose : out.trajectory.poses) {
    pose.t = out.transform.apply(pose.t);
    pose.q = (out.transform.q * pose.q).normalized();
  }
  return out;
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trajectory: " + path);
  Trajectory traj;
  std::string line;
  int id = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    PoseStamped p;
    double qx, qy, qz, qw;
    if (!(ss >> p.timestamp >> p.t.x() >> p.t.y() >> p.t.z() >> qx >> qy >> qz >> qw))
      throw DataError("malformed trajectory line in " + path + ": " + line);
    p.q = Quat(qw, qx, qy, qz);
    if (std::abs(p.q.norm() - 1.0) > 1e-3)
      throw DataError("non-unit quaternion in " + path + ": " + line);
    p.q.normalize();
    p.frame_id = id++;
    traj.poses.push_back(p);
  }
  return traj;
}

void write_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trajectory: " + path);
  char buf[256];
  for (const auto& p : traj.poses) {
    std::snprintf(buf, sizeof(buf), "%.9f %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  p.timestamp, p.t.x(), p.t.y(), p.t.z(), p.q.x(), p.q.y(), p.q.z(), p.q.w());
    out << buf;
  }
}

}  // namespace lvnf
