#include "sead/corpus.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "sead/io_util.hpp"

namespace sead {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Lighting v) { return v == Lighting::day ? "day" : "night"; }
const char* to_string(Weather v) { return v == Weather::sunny ? "sunny" : "rainy"; }
const char* to_string(FeatureRole v) { return v == FeatureRole::agent ? "agent" : "map"; }

Lighting lighting_from_string(std::string_view s) {
  if (s == "day") return Lighting::day;
  if (s == "night") return Lighting::night;
  throw Error(ErrorCode::invalid_value, "unknown lighting '" + std::string(s) + "'");
}

Weather weather_from_string(std::string_view s) {
  if (s == "sunny") return Weather::sunny;
  if (s == "rainy") return Weather::rainy;
  throw Error(ErrorCode::invalid_value, "unknown weather '" + std::string(s) + "'");
}

FeatureSet FeatureSet::uniform(FeatureRole role, uint32_t n, uint32_t d,
                               std::vector<float> pts) {
  FeatureSet out;
  out.role = role;
  out.n = n;
  out.d = d;
  out.points = std::move(pts);
  out.weights.assign(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  return out;
}

void FeatureSet::validate() const {
  if (n == 0 || d == 0)
    throw Error(ErrorCode::invalid_value, "feature set must have n >= 1 and d >= 1");
  if (points.size() != static_cast<size_t>(n) * d)
    throw Error(ErrorCode::invalid_value, "feature matrix size mismatch");
  if (weights.size() != n)
    throw Error(ErrorCode::invalid_weights, "weight count mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw Error(ErrorCode::invalid_weights, "weights must be finite and nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::invalid_weights, "weights must sum to 1");
  for (float v : points) {
    if (!std::isfinite(v))
      throw Error(ErrorCode::invalid_value, "non-finite feature value");
  }
}

const ClipRecord& CorpusIndex::at(const std::string& clip_id) const {
  auto it = clips.find(clip_id);
  if (it == clips.end())
    throw Error(ErrorCode::unknown_clip, "no clip '" + clip_id + "' in index");
  return it->second;
}

std::vector<std::string> CorpusIndex::clip_ids() const {
  std::vector<std::string> ids;
  ids.reserve(clips.size());
  for (const auto& [id, rec] : clips) ids.push_back(id);
  return ids;
}

uint64_t CorpusIndex::total_frames() const {
  uint64_t total = 0;
  for (const auto& [id, rec] : clips) total += rec.meta.num_frames;
  return total;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

namespace {

const json& require_field(const json& obj, const char* key, size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw Error(ErrorCode::missing_field,
                "line " + std::to_string(line_no) + ": missing field '" + key + "'");
  return *it;
}

std::vector<double> parse_double_array(const json& arr, const char* key, size_t line_no) {
  if (!arr.is_array())
    throw Error(ErrorCode::malformed_line,
                "line " + std::to_string(line_no) + ": '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number())
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": non-numeric entry in '" + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

CorpusIndex load_manifest(const fs::path& path) {
  CorpusIndex index;
  index.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");

  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    if (lines[i].empty()) continue;

    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object())
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": record is not an object");

    ClipRecord rec;
    try {
      rec.meta.clip_id = require_field(obj, "clip_id", line_no).get<std::string>();
      rec.meta.num_frames = require_field(obj, "num_frames", line_no).get<uint32_t>();
      rec.meta.lighting =
          lighting_from_string(require_field(obj, "lighting", line_no).get<std::string>());
      rec.meta.weather =
          weather_from_string(require_field(obj, "weather", line_no).get<std::string>());
      rec.can.clip_id = rec.meta.clip_id;
      rec.can.accel_y =
          parse_double_array(require_field(obj, "accel_y", line_no), "accel_y", line_no);
      rec.can.yaw_delta =
          parse_double_array(require_field(obj, "yaw_delta", line_no), "yaw_delta", line_no);
      rec.features_path = require_field(obj, "features_path", line_no).get<std::string>();
      rec.detections_path = require_field(obj, "detections_path", line_no).get<std::string>();
    } catch (const Error&) {
      throw;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }

    if (rec.meta.num_frames < 2)
      throw Error(ErrorCode::clip_too_short,
                  "clip '" + rec.meta.clip_id + "' has num_frames < 2");
    if (index.clips.count(rec.meta.clip_id))
      throw Error(ErrorCode::duplicate_clip_id, "'" + rec.meta.clip_id + "'");

    rec.features_file = index.base_dir / rec.features_path;
    rec.detections_file = index.base_dir / rec.detections_path;
    index.clips.emplace(rec.meta.clip_id, std::move(rec));
  }
  return index;
}

void store_manifest(const CorpusIndex& index, const fs::path& path) {
  std::string out;
  for (const auto& [id, rec] : index.clips) {
    json obj;
    obj["clip_id"] = rec.meta.clip_id;
    obj["num_frames"] = rec.meta.num_frames;
    obj["lighting"] = to_string(rec.meta.lighting);
    obj["weather"] = to_string(rec.meta.weather);
    obj["accel_y"] = rec.can.accel_y;
    obj["yaw_delta"] = rec.can.yaw_delta;
    obj["features_path"] = rec.features_path;
    obj["detections_path"] = rec.detections_path;
    out += obj.dump();
    out += '\n';
  }
  atomic_write_file(path, out);
}

// ---------------------------------------------------------------------------
// Binary feature file
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'S', 'E', 'A', 'D', 'F', 'E', 'A', 'T'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float f) {
  put_u32(out, std::bit_cast<uint32_t>(f));
}

struct ByteReader {
  const std::string& data;
  size_t off = 0;

  void need(size_t count, const char* what) const {
    if (off + count > data.size())
      throw Error(ErrorCode::unexpected_eof,
                  std::string("while reading ") + what + " at byte offset " +
                      std::to_string(off) + " (file has " + std::to_string(data.size()) +
                      " bytes)");
  }

  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = static_cast<uint8_t>(data[off]) |
                 (static_cast<uint32_t>(static_cast<uint8_t>(data[off + 1])) << 8) |
                 (static_cast<uint32_t>(static_cast<uint8_t>(data[off + 2])) << 16) |
                 (static_cast<uint32_t>(static_cast<uint8_t>(data[off + 3])) << 24);
    off += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
};

FeatureSet read_feature_set(ByteReader& reader, FeatureRole role, uint32_t frame_idx) {
  const uint32_t n = reader.u32("point count");
  const uint32_t d = reader.u32("dimension");
  if (n == 0 || d == 0)
    throw Error(ErrorCode::invalid_value,
                std::string(to_string(role)) + " set empty at frame " + std::to_string(frame_idx));
  if (static_cast<uint64_t>(n) * d > (1u << 28))
    throw Error(ErrorCode::invalid_value, "implausible feature matrix size");
  std::vector<float> pts;
  pts.reserve(static_cast<size_t>(n) * d);
  for (uint64_t k = 0; k < static_cast<uint64_t>(n) * d; ++k) {
    const float v = reader.f32("feature value");
    if (!std::isfinite(v))
      throw Error(ErrorCode::invalid_value,
                  std::string("non-finite ") + to_string(role) + " value at frame " +
                      std::to_string(frame_idx));
    pts.push_back(v);
  }
  return FeatureSet::uniform(role, n, d, std::move(pts));
}

}  // namespace

ClipFeatures read_features_file(const fs::path& path) {
  const std::string data = read_file(path);
  ByteReader reader{data};

  reader.need(8, "magic");
  if (std::memcmp(data.data(), kMagic, 8) != 0)
    throw Error(ErrorCode::bad_magic, path.string());
  reader.off = 8;

  const uint32_t version = reader.u32("version");
  if (version != kVersion)
    throw Error(ErrorCode::bad_version,
                "expected version 1, found " + std::to_string(version));
  const uint32_t T = reader.u32("frame count");

  ClipFeatures out;
  out.frames.reserve(T);
  for (uint32_t t = 0; t < T; ++t) {
    FrameFeatures frame;
    frame.agents = read_feature_set(reader, FeatureRole::agent, t);
    frame.map = read_feature_set(reader, FeatureRole::map, t);
    if (t > 0) {
      if (frame.agents.d != out.frames[0].agents.d)
        throw Error(ErrorCode::invalid_value,
                    "agent dimension changes at frame " + std::to_string(t));
      if (frame.map.d != out.frames[0].map.d)
        throw Error(ErrorCode::invalid_value,
                    "map dimension changes at frame " + std::to_string(t));
    }
    out.frames.push_back(std::move(frame));
  }
  if (reader.off != data.size())
    throw Error(ErrorCode::invalid_value,
                "trailing data after frame " + std::to_string(T) + " at byte offset " +
                    std::to_string(reader.off));
  return out;
}

ClipFeatures load_features(const CorpusIndex& index, const std::string& clip_id) {
  const ClipRecord& rec = index.at(clip_id);
  ClipFeatures out = read_features_file(rec.features_file);
  out.clip_id = clip_id;
  if (out.frames.size() != rec.meta.num_frames)
    throw Error(ErrorCode::frame_count_mismatch,
                "feature file has " + std::to_string(out.frames.size()) + " frames, clip '" +
                    clip_id + "' declares " + std::to_string(rec.meta.num_frames));
  return out;
}

void store_features(const ClipFeatures& features, const fs::path& path) {
  std::string out;
  out.append(kMagic, 8);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(features.frames.size()));
  for (const FrameFeatures& frame : features.frames) {
    for (const FeatureSet* set : {&frame.agents, &frame.map}) {
      put_u32(out, set->n);
      put_u32(out, set->d);
      for (float v : set->points) put_f32(out, v);
    }
  }
  atomic_write_file(path, out);
}

// ---------------------------------------------------------------------------
// Detections
// ---------------------------------------------------------------------------

DetectionSet read_detections_file(const fs::path& path) {
  DetectionSet out;
  const auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(i + 1) + ": " + e.what());
    }
    const size_t frame_idx = out.frames.size();
    try {
      if (obj.at("frame_idx").get<size_t>() != frame_idx)
        throw Error(ErrorCode::invalid_value,
                    "frame_idx out of order at line " + std::to_string(i + 1));
      std::vector<Detection> dets;
      for (const auto& d : obj.at("detections")) {
        Detection det;
        det.cls = d.at("class").get<std::string>();
        det.x = d.at("x").get<double>();
        det.y = d.at("y").get<double>();
        det.confidence = d.at("confidence").get<double>();
        if (!std::isfinite(det.x) || !std::isfinite(det.y))
          throw Error(ErrorCode::invalid_value,
                      "non-finite position at frame " + std::to_string(frame_idx));
        if (!std::isfinite(det.confidence) || det.confidence < 0.0 || det.confidence > 1.0)
          throw Error(ErrorCode::invalid_value,
                      "confidence " + std::to_string(det.confidence) +
                          " out of [0,1] at frame " + std::to_string(frame_idx));
        dets.push_back(std::move(det));
      }
      out.frames.push_back(std::move(dets));
    } catch (const Error&) {
      throw;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

DetectionSet load_detections(const CorpusIndex& index, const std::string& clip_id) {
  const ClipRecord& rec = index.at(clip_id);
  DetectionSet out = read_detections_file(rec.detections_file);
  out.clip_id = clip_id;
  if (out.frames.size() != rec.meta.num_frames)
    throw Error(ErrorCode::frame_count_mismatch,
                "detections file has " + std::to_string(out.frames.size()) +
                    " frames, clip '" + clip_id + "' declares " +
                    std::to_string(rec.meta.num_frames));
  return out;
}

void store_detections(const DetectionSet& detections, const fs::path& path) {
  std::string out;
  for (size_t t = 0; t < detections.frames.size(); ++t) {
    json obj;
    obj["frame_idx"] = t;
    json arr = json::array();
    for (const Detection& d : detections.frames[t]) {
      arr.push_back({{"class", d.cls}, {"x", d.x}, {"y", d.y}, {"confidence", d.confidence}});
    }
    obj["detections"] = std::move(arr);
    out += obj.dump();
    out += '\n';
  }
  atomic_write_file(path, out);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

ValidationReport validate_corpus(const CorpusIndex& index) {
  ValidationReport report;
  auto add = [&](const std::string& clip, const std::string& field, std::string msg) {
    report.issues.push_back({clip, field, std::move(msg)});
  };

  for (const auto& [id, rec] : index.clips) {
    const uint32_t T = rec.meta.num_frames;
    if (T < 2) add(id, "meta.num_frames", "num_frames must be >= 2");

    if (rec.can.accel_y.size() != T)
      add(id, "can.accel_y",
          "length " + std::to_string(rec.can.accel_y.size()) + " != num_frames " +
              std::to_string(T));
    if (rec.can.yaw_delta.size() != T)
      add(id, "can.yaw_delta",
          "length " + std::to_string(rec.can.yaw_delta.size()) + " != num_frames " +
              std::to_string(T));
    for (double v : rec.can.accel_y)
      if (!std::isfinite(v)) {
        add(id, "can.accel_y", "non-finite value");
        break;
      }
    for (double v : rec.can.yaw_delta)
      if (!std::isfinite(v)) {
        add(id, "can.yaw_delta", "non-finite value");
        break;
      }

    try {
      ClipFeatures feats = load_features(index, id);
      for (const FrameFeatures& frame : feats.frames) {
        frame.agents.validate();
        frame.map.validate();
      }
    } catch (const std::exception& e) {
      add(id, "features", e.what());
    }

    try {
      load_detections(index, id);
    } catch (const std::exception& e) {
      add(id, "detections", e.what());
    }
  }
  return report;
}

}  // namespace sead
