#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "sead/loop.hpp"
#include "sead/synth.hpp"

// Flat "key = value" config files ('#' starts a comment). Unknown keys are
// rejected so typos fail loudly.

namespace sead {

class KvConfig {
 public:
  static KvConfig parse_file(const std::filesystem::path& path);
  static KvConfig parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;

  // Throws bad_config if any key was never read by a getter.
  void reject_unknown_keys() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> consumed_;
  std::string origin_;
};

// Accepts plain decimals and "a/b" ratios (so lambda can be given as 1/3).
double parse_ratio(std::string_view text);

SynthConfig synth_config_from_file(const std::filesystem::path& path);
LoopConfig loop_config_from_file(const std::filesystem::path& path);

}  // namespace sead
