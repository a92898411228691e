#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sead/corpus.hpp"

// Keyframe extraction from per-frame detections. A frame is a key frame
// when some detection with confidence >= confidence_threshold lies
// strictly closer than distance_threshold to the ego origin (0, 0). One
// frame range per clip: the earliest longest run of key frames, or the
// configured fallback when no frame qualifies.

namespace sead {

enum class KeyframeFallback { full_clip, min_distance_frame };

const char* to_string(KeyframeFallback v);
KeyframeFallback fallback_from_string(std::string_view s);

struct KeyframeConfig {
  double confidence_threshold = 0.5;  // detections below are ignored
  double distance_threshold = 5.0;    // meters, strict inequality
  KeyframeFallback fallback = KeyframeFallback::full_clip;
};

struct FrameRange {
  std::string clip_id;
  uint32_t start = 0;  // inclusive
  uint32_t end = 0;    // inclusive
  bool is_fallback = false;

  uint32_t length() const { return end - start + 1; }
};

bool frame_is_key(const std::vector<Detection>& detections, const KeyframeConfig& cfg);

std::vector<uint8_t> key_mask(const DetectionSet& detections, const KeyframeConfig& cfg);

// Inclusive bounds of the earliest maximum-length run of 1s; nullopt for
// an all-zero mask.
std::optional<std::pair<uint32_t, uint32_t>> longest_run(const std::vector<uint8_t>& mask);

FrameRange select_keyframes(const DetectionSet& detections, const KeyframeConfig& cfg);

}  // namespace sead
