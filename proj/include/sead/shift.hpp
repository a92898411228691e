#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sead/corpus.hpp"

// Feature-shift scoring between consecutive frames and its accumulation to
// scene level, with three interchangeable engines:
//
//   exact     optimal-transport cost under the Euclidean ground metric,
//             solved exactly as a transportation problem
//   sinkhorn  entropic-regularized approximation; returns the transport
//             cost term <plan, cost> with the regularizer excluded
//   centroid  Euclidean distance between weighted centroids; a lower bound
//             of the exact cost for equal total mass
//
// An optional seeded sign random projection reduces dimensionality before
// any engine runs; the projection matrix depends only on
// (projection_seed, d, k), so consecutive frames are projected identically.
// All operations are pure and reentrant.

namespace sead {

enum class ShiftEngine { exact, sinkhorn, centroid };

const char* to_string(ShiftEngine v);
ShiftEngine engine_from_string(std::string_view s);

struct ShiftConfig {
  ShiftEngine engine = ShiftEngine::centroid;
  std::optional<uint32_t> reduce_dim;  // target dim k; must be < d when set
  uint64_t projection_seed = 0;
  double sinkhorn_epsilon = 0.1;   // relative to the weighted mean ground cost
  uint32_t sinkhorn_max_iter = 2000;
  double sinkhorn_tol = 1e-5;      // L1 violation summed over both marginals
  // Rescales the per-frame agent and map shift streams by their per-clip
  // standard deviation before summing. Off by default: the scene total is
  // the raw sum of both components.
  bool normalize_components = false;
};

struct SceneShift {
  std::string clip_id;
  // (agent shift, map shift) for each consecutive frame pair, first pair
  // being frames (0, 1); length T-1.
  std::vector<std::pair<double, double>> per_frame;
  double agent_total = 0.0;
  double map_total = 0.0;
  double total = 0.0;
};

// Exact optimal-transport cost between two weighted point sets sharing a
// dimension. Deterministic; throws DimensionMismatch / InvalidWeights.
double emd_exact(const FeatureSet& a, const FeatureSet& b);

// Entropic approximation; throws NonConvergence (reporting the final
// marginal violation) if the tolerance is not met within max_iter.
double emd_sinkhorn(const FeatureSet& a, const FeatureSet& b, const ShiftConfig& cfg);

double centroid_shift(const FeatureSet& a, const FeatureSet& b);

// Identity pass-through when cfg.reduce_dim is unset; otherwise applies
// the fixed +-1/sqrt(k) projection. Throws BadTargetDim when k >= d.
FeatureSet reduce_dim(const FeatureSet& f, const ShiftConfig& cfg);

// Shift of the agent sets and of the map sets between two consecutive
// frames, each reduced first when configured.
std::pair<double, double> frame_shift(const FrameFeatures& cur, const FrameFeatures& prev,
                                      const ShiftConfig& cfg);

// Sums frame_shift over the T-1 consecutive pairs. Throws ClipTooShort
// when fewer than 2 frames exist.
SceneShift scene_shift(const ClipFeatures& features, const ShiftConfig& cfg);

// clip_ids of the n largest totals, descending, ties by ascending clip_id.
// Throws BudgetExceedsPool when n > |shifts|.
std::vector<std::string> rank_clips(const std::vector<SceneShift>& shifts, size_t n);

}  // namespace sead
