#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sead/error.hpp"

// Data model and on-disk formats for clips, CAN traces, per-frame feature
// sets, and detections.
//
// On-disk layout:
//   manifest       line-delimited JSON, one clip per line with fields
//                  clip_id, num_frames, lighting, weather, accel_y,
//                  yaw_delta, features_path, detections_path (paths are
//                  relative to the manifest's directory)
//   feature file   magic "SEADFEAT", u32 version=1, u32 T, then per frame
//                  u32 n_agent, u32 d_agent, f32[n_agent*d_agent] row-major,
//                  u32 n_map, u32 d_map, f32[n_map*d_map] row-major;
//                  little-endian throughout
//   detections     line-delimited JSON, one frame per line:
//                  {"frame_idx": t, "detections": [{"class", "x", "y",
//                  "confidence"}, ...]}
//
// Everything loaded is immutable after construction and safe to read from
// many threads; loading distinct clips may proceed in parallel.

namespace sead {

enum class Lighting { day, night };
enum class Weather { sunny, rainy };

const char* to_string(Lighting v);
const char* to_string(Weather v);
Lighting lighting_from_string(std::string_view s);
Weather weather_from_string(std::string_view s);

struct ClipMeta {
  std::string clip_id;
  uint32_t num_frames = 0;  // T; at least 2 so consecutive pairs exist
  Lighting lighting = Lighting::day;
  Weather weather = Weather::sunny;
};

struct CanTrace {
  std::string clip_id;
  std::vector<double> accel_y;    // m/s^2, length T
  std::vector<double> yaw_delta;  // rad per frame, signed, length T
};

enum class FeatureRole { agent, map };

const char* to_string(FeatureRole v);

// Weighted point set: n feature vectors of dimension d with nonnegative
// weights summing to 1 (uniform 1/n unless a caller sets them).
struct FeatureSet {
  FeatureRole role = FeatureRole::agent;
  uint32_t n = 0;
  uint32_t d = 0;
  std::vector<float> points;    // n*d row-major
  std::vector<double> weights;  // size n

  static FeatureSet uniform(FeatureRole role, uint32_t n, uint32_t d,
                            std::vector<float> pts);

  const float* row(uint32_t i) const { return points.data() + static_cast<size_t>(i) * d; }

  // Throws Error on any invariant violation (empty set, weight sum off
  // by more than 1e-9, negative weight, non-finite value).
  void validate() const;
};

struct FrameFeatures {
  FeatureSet agents;
  FeatureSet map;
};

struct ClipFeatures {
  std::string clip_id;
  std::vector<FrameFeatures> frames;  // length T
};

struct Detection {
  std::string cls;
  double x = 0.0;  // meters, ego-centric (ego at the origin)
  double y = 0.0;
  double confidence = 0.0;  // in [0, 1]
};

struct DetectionSet {
  std::string clip_id;
  std::vector<std::vector<Detection>> frames;  // length T
};

struct ClipRecord {
  ClipMeta meta;
  CanTrace can;
  std::string features_path;    // as written in the manifest
  std::string detections_path;  // as written in the manifest
  std::filesystem::path features_file;    // resolved
  std::filesystem::path detections_file;  // resolved
};

struct CorpusIndex {
  std::map<std::string, ClipRecord> clips;  // keyed/iterated by clip_id
  std::filesystem::path base_dir;

  const ClipRecord& at(const std::string& clip_id) const;
  std::vector<std::string> clip_ids() const;
  uint64_t total_frames() const;
};

struct ValidationIssue {
  std::string clip_id;
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool empty() const { return issues.empty(); }
};

// Parses the whole manifest or throws; never returns a partial index.
// Rejects malformed lines (with line number), duplicate clip ids, missing
// required fields, and num_frames < 2. Cross-field consistency (trace
// lengths, referenced files) is validate_corpus's job so that a loadable
// index can still be audited.
CorpusIndex load_manifest(const std::filesystem::path& path);

// Writes the manifest for this index; clip file paths are emitted as the
// recorded relative strings.
void store_manifest(const CorpusIndex& index, const std::filesystem::path& path);

// Strict binary decode; any violated invariant throws (bad magic/version,
// frame count mismatch against ClipMeta, truncation with byte offset,
// non-finite values, empty sets, per-role dimension drift).
ClipFeatures load_features(const CorpusIndex& index, const std::string& clip_id);
ClipFeatures read_features_file(const std::filesystem::path& path);
void store_features(const ClipFeatures& features, const std::filesystem::path& path);

DetectionSet load_detections(const CorpusIndex& index, const std::string& clip_id);
DetectionSet read_detections_file(const std::filesystem::path& path);
void store_detections(const DetectionSet& detections, const std::filesystem::path& path);

// Never throws for content problems: every violated invariant becomes a
// report entry naming the clip and field. An empty report means the
// corpus is fully consistent.
ValidationReport validate_corpus(const CorpusIndex& index);

}  // namespace sead
