#pragma once

#include "lvnf/rng.hpp"
#include "lvnf/types.hpp"

namespace lvnf {

struct SampleSet {
  VecX ts;      // ascending sample positions along the ray (ray-parameter units)
  VecX deltas;  // spacing to the next sample; last one runs to `far`
};

// One sample per stratum of [near, far]. rng == nullptr places samples at
// stratum midpoints (deterministic mode).
SampleSet sample_stratified(double near, double far, int n, Rng* rng = nullptr);

// Draws m samples by inverse-CDF over the coarse weight histogram (bins are
// the n_coarse strata of [near, far], with a 0.01 uniform mass floor), merges
// them with the coarse ts and recomputes deltas. All-zero coarse weights fall
// back to stratified sampling.
SampleSet sample_importance(double near, double far, const VecX& coarse_ts,
                            const VecX& coarse_weights, int m, Rng* rng = nullptr);

}  // namespace lvnf
