#include "sead/keyframe.hpp"

#include <cmath>
#include <limits>

namespace sead {

const char* to_string(KeyframeFallback v) {
  return v == KeyframeFallback::full_clip ? "full_clip" : "min_distance_frame";
}

KeyframeFallback fallback_from_string(std::string_view s) {
  if (s == "full_clip" || s == "full-clip") return KeyframeFallback::full_clip;
  if (s == "min_distance_frame" || s == "min-distance-frame")
    return KeyframeFallback::min_distance_frame;
  throw Error(ErrorCode::bad_config, "unknown fallback '" + std::string(s) + "'");
}

namespace {

// Minimum ego distance over confident detections; +inf when none survive
// the confidence filter.
double min_confident_distance(const std::vector<Detection>& detections,
                              const KeyframeConfig& cfg) {
  double best = std::numeric_limits<double>::infinity();
  for (const Detection& d : detections) {
    if (d.confidence < cfg.confidence_threshold) continue;
    best = std::min(best, std::hypot(d.x, d.y));
  }
  return best;
}

}  // namespace

bool frame_is_key(const std::vector<Detection>& detections, const KeyframeConfig& cfg) {
  return min_confident_distance(detections, cfg) < cfg.distance_threshold;
}

std::vector<uint8_t> key_mask(const DetectionSet& detections, const KeyframeConfig& cfg) {
  std::vector<uint8_t> mask;
  mask.reserve(detections.frames.size());
  for (const auto& frame : detections.frames)
    mask.push_back(frame_is_key(frame, cfg) ? 1 : 0);
  return mask;
}

std::optional<std::pair<uint32_t, uint32_t>> longest_run(const std::vector<uint8_t>& mask) {
  std::optional<std::pair<uint32_t, uint32_t>> best;
  uint32_t best_len = 0;
  uint32_t run_start = 0;
  uint32_t run_len = 0;
  for (uint32_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      if (run_len == 0) run_start = i;
      run_len++;
      if (run_len > best_len) {  // strict: earliest run wins ties
        best_len = run_len;
        best = {run_start, i};
      }
    } else {
      run_len = 0;
    }
  }
  return best;
}

FrameRange select_keyframes(const DetectionSet& detections, const KeyframeConfig& cfg) {
  const uint32_t T = static_cast<uint32_t>(detections.frames.size());
  if (T == 0)
    throw Error(ErrorCode::invalid_value,
                "clip '" + detections.clip_id + "' has no frames");

  FrameRange range;
  range.clip_id = detections.clip_id;

  const auto run = longest_run(key_mask(detections, cfg));
  if (run) {
    range.start = run->first;
    range.end = run->second;
    range.is_fallback = false;
    return range;
  }

  range.is_fallback = true;
  if (cfg.fallback == KeyframeFallback::full_clip) {
    range.start = 0;
    range.end = T - 1;
    return range;
  }

  // min_distance_frame: the single frame whose confident-detection minimum
  // distance is smallest; frames without a confident detection rank last,
  // ties resolve to the earliest frame.
  uint32_t best_frame = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (uint32_t t = 0; t < T; ++t) {
    const double d = min_confident_distance(detections.frames[t], cfg);
    if (d < best_dist) {
      best_dist = d;
      best_frame = t;
    }
  }
  range.start = best_frame;
  range.end = best_frame;
  return range;
}

}  // namespace sead
