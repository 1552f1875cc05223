#include "lvnf/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace lvnf {

namespace {

void fill_deltas(SampleSet& s, double far) {
  const int n = int(s.ts.size());
  s.deltas.resize(n);
  for (int i = 0; i + 1 < n; ++i) s.deltas[i] = s.ts[i + 1] - s.ts[i];
  if (n > 0) s.deltas[n - 1] = std::max(far - s.ts[n - 1], 1e-12);
}

}  // namespace

SampleSet sample_stratified(double near, double far, int n, Rng* rng) {
  if (n < 2) throw std::invalid_argument("sample_stratified: need n >= 2");
  SampleSet out;
  out.ts.resize(n);
  out.deltas.resize(n);
  const double width = (far - near) / n;
  for (int i = 0; i < n; ++i) {
    double u = rng ? rng->uniform() : 0.5;
    out.ts[i] = near + (i + u) * width;
  }
  for (int i = 0; i + 1 < n; ++i) out.deltas[i] = out.ts[i + 1] - out.ts[i];
  out.deltas[n - 1] = width;
  return out;
}

SampleSet sample_importance(double near, double far, const VecX& coarse_ts,
                            const VecX& coarse_weights, int m, Rng* rng) {
  const int n = int(coarse_weights.size());
  if (n < 1) throw std::invalid_argument("sample_importance: empty coarse weights");

  double total = coarse_weights.sum();
  std::vector<double> fine;
  fine.reserve(m);
  if (total <= 0.0) {
    SampleSet strat = sample_stratified(near, far, std::max(m, 2), rng);
    for (int i = 0; i < strat.ts.size(); ++i) fine.push_back(strat.ts[i]);
  } else {
    // Histogram over the coarse strata with a small uniform floor.
    const double floor_mass = 0.01 / n;
    VecX pdf = coarse_weights.array() + floor_mass;
    VecX cdf(n + 1);
    cdf[0] = 0.0;
    for (int i = 0; i < n; ++i) cdf[i + 1] = cdf[i] + pdf[i];
    const double norm = cdf[n];
    const double bin_w = (far - near) / n;
    for (int k = 0; k < m; ++k) {
      double u = (k + (rng ? rng->uniform() : 0.5)) / m * norm;
      int lo = int(std::upper_bound(cdf.data(), cdf.data() + n + 1, u) - cdf.data()) - 1;
      lo = std::min(std::max(lo, 0), n - 1);
      double frac = (u - cdf[lo]) / std::max(pdf[lo], 1e-300);
      fine.push_back(near + (lo + frac) * bin_w);
    }
  }

  for (int i = 0; i < coarse_ts.size(); ++i) fine.push_back(coarse_ts[i]);
  std::sort(fine.begin(), fine.end());
  // Drop collisions so ts stay strictly ascending.
  std::vector<double> merged;
  merged.reserve(fine.size());
  for (double t : fine)
    if (merged.empty() || t > merged.back() + 1e-12) merged.push_back(t);

  SampleSet out;
  out.ts = Eigen::Map<VecX>(merged.data(), merged.size());
  fill_deltas(out, far);
  return out;
}

}  // namespace lvnf
