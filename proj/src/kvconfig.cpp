#include "sead/kvconfig.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "sead/io_util.hpp"

namespace sead {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) b++;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) e--;
  return std::string(s.substr(b, e - b));
}

}  // namespace

KvConfig KvConfig::parse_file(const std::filesystem::path& path) {
  return parse_text(read_file(path), path.string());
}

KvConfig KvConfig::parse_text(const std::string& text, const std::string& origin) {
  KvConfig cfg;
  cfg.origin_ = origin;
  size_t start = 0;
  size_t line_no = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    line_no++;

    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      if (end == text.size()) break;
      continue;
    }

    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::bad_config,
                  origin + " line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty())
      throw Error(ErrorCode::bad_config,
                  origin + " line " + std::to_string(line_no) + ": empty key");
    if (!cfg.values_.emplace(key, value).second)
      throw Error(ErrorCode::bad_config,
                  origin + " line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    if (end == text.size()) break;
  }
  return cfg;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
  consumed_[key] = true;
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t fallback) const {
  consumed_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (errno != 0 || end == it->second.c_str() || *end != '\0')
    throw Error(ErrorCode::bad_config,
                origin_ + ": '" + key + "' must be a nonnegative integer, got '" + it->second +
                    "'");
  return static_cast<uint64_t>(v);
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  consumed_[key] = true;
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_ratio(it->second);
  } catch (const Error&) {
    throw Error(ErrorCode::bad_config,
                origin_ + ": '" + key + "' must be a number, got '" + it->second + "'");
  }
}

void KvConfig::reject_unknown_keys() const {
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key))
      throw Error(ErrorCode::bad_config, origin_ + ": unknown key '" + key + "'");
}

double parse_ratio(std::string_view text) {
  const std::string s = trim(text);
  const size_t slash = s.find('/');
  auto to_double = [](const std::string& part) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (errno != 0 || end == part.c_str() || *end != '\0' || !std::isfinite(v))
      throw Error(ErrorCode::bad_config, "bad number '" + part + "'");
    return v;
  };
  if (slash == std::string::npos) return to_double(s);
  const double num = to_double(trim(std::string_view(s).substr(0, slash)));
  const double den = to_double(trim(std::string_view(s).substr(slash + 1)));
  if (den == 0.0) throw Error(ErrorCode::bad_config, "division by zero in '" + s + "'");
  return num / den;
}

SynthConfig synth_config_from_file(const std::filesystem::path& path) {
  const KvConfig kv = KvConfig::parse_file(path);
  SynthConfig cfg;
  cfg.num_clips = static_cast<uint32_t>(kv.get_u64("num_clips", cfg.num_clips));
  cfg.frames_per_clip =
      static_cast<uint32_t>(kv.get_u64("frames_per_clip", cfg.frames_per_clip));
  cfg.feature_dim = static_cast<uint32_t>(kv.get_u64("feature_dim", cfg.feature_dim));
  cfg.agents_min = static_cast<uint32_t>(kv.get_u64("agents_min", cfg.agents_min));
  cfg.agents_max = static_cast<uint32_t>(kv.get_u64("agents_max", cfg.agents_max));
  cfg.map_min = static_cast<uint32_t>(kv.get_u64("map_min", cfg.map_min));
  cfg.map_max = static_cast<uint32_t>(kv.get_u64("map_max", cfg.map_max));
  cfg.difficulty_alpha = kv.get_double("difficulty_alpha", cfg.difficulty_alpha);
  cfg.difficulty_beta = kv.get_double("difficulty_beta", cfg.difficulty_beta);
  cfg.dynamics_coupling = kv.get_double("dynamics_coupling", cfg.dynamics_coupling);
  cfg.proximity_coupling = kv.get_double("proximity_coupling", cfg.proximity_coupling);
  cfg.night_rain_bias = kv.get_double("night_rain_bias", cfg.night_rain_bias);
  cfg.seed = kv.get_u64("seed", cfg.seed);
  kv.reject_unknown_keys();
  cfg.validate();
  return cfg;
}

LoopConfig loop_config_from_file(const std::filesystem::path& path) {
  const KvConfig kv = KvConfig::parse_file(path);
  LoopConfig cfg;
  cfg.per_iter_clips = kv.get_u64("per_iter_clips", cfg.per_iter_clips);
  cfg.iterations = static_cast<uint32_t>(kv.get_u64("iterations", cfg.iterations));
  cfg.total_budget_clips =
      kv.get_u64("total_budget_clips", cfg.per_iter_clips * cfg.iterations);
  cfg.lambda = kv.get_double("lambda", cfg.lambda);
  cfg.shift.engine = engine_from_string(kv.get_string("engine", to_string(cfg.shift.engine)));
  const uint64_t rd = kv.get_u64("reduce_dim", 0);
  if (rd > 0) cfg.shift.reduce_dim = static_cast<uint32_t>(rd);
  cfg.shift.projection_seed = kv.get_u64("projection_seed", cfg.shift.projection_seed);
  cfg.shift.sinkhorn_epsilon = kv.get_double("sinkhorn_epsilon", cfg.shift.sinkhorn_epsilon);
  cfg.shift.sinkhorn_max_iter =
      static_cast<uint32_t>(kv.get_u64("sinkhorn_max_iter", cfg.shift.sinkhorn_max_iter));
  cfg.shift.sinkhorn_tol = kv.get_double("sinkhorn_tol", cfg.shift.sinkhorn_tol);
  cfg.keyframe.confidence_threshold =
      kv.get_double("theta_tau", cfg.keyframe.confidence_threshold);
  cfg.keyframe.distance_threshold = kv.get_double("theta_d", cfg.keyframe.distance_threshold);
  cfg.keyframe.fallback =
      fallback_from_string(kv.get_string("fallback", to_string(cfg.keyframe.fallback)));
  cfg.seed = kv.get_u64("seed", cfg.seed);
  cfg.threads = static_cast<unsigned>(kv.get_u64("threads", cfg.threads));
  kv.reject_unknown_keys();
  return cfg;
}

}  // namespace sead
