#include <doctest.h>

#include "helpers.hpp"
#include "sead/keyframe.hpp"

using namespace sead;
using namespace sead_test;

namespace {

DetectionSet random_detections(Rng& rng, uint32_t T) {
  DetectionSet dets;
  dets.clip_id = "r";
  dets.frames.resize(T);
  for (auto& frame : dets.frames) {
    const uint32_t n = static_cast<uint32_t>(rng.below(5));
    for (uint32_t i = 0; i < n; ++i)
      frame.push_back({"car", 12.0 * (rng.uniform01() - 0.5), 12.0 * (rng.uniform01() - 0.5),
                       rng.uniform01()});
  }
  return dets;
}

}  // namespace

TEST_CASE("frame_is_key: strict distance boundary and confidence filter") {
  KeyframeConfig cfg;  // 0.5 / 5.0 defaults

  // distance exactly 5.0 does not qualify
  CHECK_FALSE(frame_is_key({{"car", 3, 4, 0.9}}, cfg));
  // sqrt(18) = 4.243 < 5 does
  CHECK(frame_is_key({{"car", 3, 3, 0.9}}, cfg));
  // near but below the confidence bar
  CHECK_FALSE(frame_is_key({{"car", 1, 1, 0.3}}, cfg));
  // confidence exactly at the bar is kept
  CHECK(frame_is_key({{"car", 1, 1, 0.5}}, cfg));
  // no detections at all
  CHECK_FALSE(frame_is_key({}, cfg));
}

TEST_CASE("key_mask applies the rule per frame") {
  KeyframeConfig cfg;
  DetectionSet dets;
  dets.clip_id = "m";

  dets.frames.assign(4, {});
  CHECK(key_mask(dets, cfg) == std::vector<uint8_t>{0, 0, 0, 0});

  for (auto& frame : dets.frames) frame.push_back({"car", 0, 1, 1.0});
  CHECK(key_mask(dets, cfg) == std::vector<uint8_t>{1, 1, 1, 1});

  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_detections(rng, 30);
    const auto mask = key_mask(d, cfg);
    for (uint32_t t = 0; t < 30; ++t)
      CHECK(mask[t] == (frame_is_key(d.frames[t], cfg) ? 1 : 0));
  }
}

TEST_CASE("longest_run: examples and the exhaustive oracle") {
  using run_t = std::optional<std::pair<uint32_t, uint32_t>>;
  CHECK(longest_run({0, 1, 1, 0, 1, 1, 1, 0}) == run_t({{4, 6}}));
  CHECK(longest_run({1, 1, 0, 1, 1}) == run_t({{0, 1}}));  // tie -> earliest
  CHECK(longest_run({0, 0, 0}) == run_t{});
  CHECK(longest_run({}) == run_t{});
  CHECK(longest_run({1}) == run_t({{0, 0}}));

  Rng rng(53);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<uint8_t> mask(1 + rng.below(200));
    for (auto& b : mask) b = rng.below(2) ? 1 : 0;
    CHECK(longest_run(mask) == longest_run_oracle(mask));
  }
}

TEST_CASE("select_keyframes picks the earliest longest run") {
  KeyframeConfig cfg;
  DetectionSet dets;
  dets.clip_id = "k";
  // frames 1..3 key, others not
  dets.frames = {{}, {{"car", 0, 1, 0.9}}, {{"car", 1, 0, 0.9}}, {{"car", 0, 2, 0.9}}, {}};
  const auto range = select_keyframes(dets, cfg);
  CHECK(range.start == 1);
  CHECK(range.end == 3);
  CHECK_FALSE(range.is_fallback);
  CHECK(range.clip_id == "k");
}

TEST_CASE("select_keyframes full-clip fallback") {
  KeyframeConfig cfg;
  cfg.fallback = KeyframeFallback::full_clip;
  DetectionSet dets;
  dets.clip_id = "f";
  dets.frames.assign(5, {});
  const auto range = select_keyframes(dets, cfg);
  CHECK(range.start == 0);
  CHECK(range.end == 4);
  CHECK(range.is_fallback);
  CHECK(range.length() == 5);
}

TEST_CASE("select_keyframes min-distance fallback") {
  KeyframeConfig cfg;
  cfg.fallback = KeyframeFallback::min_distance_frame;
  DetectionSet dets;
  dets.clip_id = "f";
  // min confident distances per frame: 9, 6, 7 (all beyond theta_d)
  dets.frames = {{{"car", 9, 0, 0.9}}, {{"car", 6, 0, 0.9}}, {{"car", 0, 7, 0.9}}};
  const auto range = select_keyframes(dets, cfg);
  CHECK(range.start == 1);
  CHECK(range.end == 1);
  CHECK(range.is_fallback);

  // frames with no confident detection rank last
  DetectionSet sparse;
  sparse.clip_id = "s";
  sparse.frames = {{}, {{"car", 0, 8, 0.2}}, {{"car", 8, 0, 0.9}}};
  const auto r2 = select_keyframes(sparse, cfg);
  CHECK(r2.start == 2);
  CHECK(r2.end == 2);
}

TEST_CASE("widening theta_d never clears a key frame") {
  Rng rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dets = random_detections(rng, 25);
    KeyframeConfig lo, mid, hi;
    lo.distance_threshold = 2.5;
    mid.distance_threshold = 5.0;
    hi.distance_threshold = 10.0;
    const auto m_lo = key_mask(dets, lo);
    const auto m_mid = key_mask(dets, mid);
    const auto m_hi = key_mask(dets, hi);
    for (uint32_t t = 0; t < 25; ++t) {
      CHECK(m_lo[t] <= m_mid[t]);
      CHECK(m_mid[t] <= m_hi[t]);
    }
  }
}

TEST_CASE("raising theta_tau never creates a key frame") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto dets = random_detections(rng, 25);
    KeyframeConfig lo, mid, hi;
    lo.confidence_threshold = 0.25;
    mid.confidence_threshold = 0.5;
    hi.confidence_threshold = 0.75;
    const auto m_lo = key_mask(dets, lo);
    const auto m_mid = key_mask(dets, mid);
    const auto m_hi = key_mask(dets, hi);
    for (uint32_t t = 0; t < 25; ++t) {
      CHECK(m_mid[t] <= m_lo[t]);
      CHECK(m_hi[t] <= m_mid[t]);
    }
  }
}

TEST_CASE("selected range length caps at T, full length only when expected") {
  Rng rng(67);
  KeyframeConfig cfg;
  for (int trial = 0; trial < 60; ++trial) {
    const uint32_t T = 2 + static_cast<uint32_t>(rng.below(30));
    const auto dets = random_detections(rng, T);
    const auto range = select_keyframes(dets, cfg);
    CHECK(range.end < T);
    CHECK(range.length() <= T);
    if (range.length() == T) {
      const auto mask = key_mask(dets, cfg);
      const bool all_ones =
          std::all_of(mask.begin(), mask.end(), [](uint8_t b) { return b == 1; });
      CHECK((range.is_fallback || all_ones));
    }
  }
}
