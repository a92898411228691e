#pragma once

// Shared test fixtures: scratch directories, corpus builders, and the
// independent oracles the unit and acceptance suites check against.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sead/corpus.hpp"
#include "sead/rng.hpp"

namespace sead_test {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sead-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline sead::FeatureSet make_set(std::vector<std::vector<float>> rows) {
  const uint32_t n = static_cast<uint32_t>(rows.size());
  const uint32_t d = static_cast<uint32_t>(rows.front().size());
  std::vector<float> pts;
  for (const auto& r : rows) pts.insert(pts.end(), r.begin(), r.end());
  return sead::FeatureSet::uniform(sead::FeatureRole::agent, n, d, std::move(pts));
}

inline sead::FeatureSet random_uniform_set(sead::Rng& rng, uint32_t n, uint32_t d,
                                           double scale = 1.0) {
  std::vector<float> pts(static_cast<size_t>(n) * d);
  for (auto& p : pts) p = static_cast<float>(scale * rng.normal());
  return sead::FeatureSet::uniform(sead::FeatureRole::agent, n, d, std::move(pts));
}

// Coordinates on the 1/1024 lattice in [-4, 4]: sums and power-of-two
// scalings of these stay exactly representable in f32, which lets
// covariance properties be asserted at full double precision instead of
// float rounding noise.
inline float dyadic(sead::Rng& rng) {
  return static_cast<float>(static_cast<int64_t>(rng.below(8193)) - 4096) / 1024.0f;
}

inline sead::FeatureSet dyadic_set(sead::Rng& rng, uint32_t n, uint32_t d) {
  std::vector<float> pts(static_cast<size_t>(n) * d);
  for (auto& p : pts) p = dyadic(rng);
  return sead::FeatureSet::uniform(sead::FeatureRole::agent, n, d, std::move(pts));
}

// Independent oracles -------------------------------------------------------

// Two-pass population standard deviation.
inline double std_dev_oracle(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

// Exact EMD for uniform weights with n == m: minimum over all n!
// assignments (the transport LP's extreme points are permutations).
inline double brute_force_emd(const sead::FeatureSet& a, const sead::FeatureSet& b) {
  const uint32_t n = a.n;
  std::vector<uint32_t> perm(n);
  for (uint32_t i = 0; i < n; ++i) perm[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0;
    for (uint32_t i = 0; i < n; ++i) {
      double acc = 0;
      for (uint32_t k = 0; k < a.d; ++k) {
        const double diff =
            static_cast<double>(a.row(i)[k]) - static_cast<double>(b.row(perm[i])[k]);
        acc += diff * diff;
      }
      cost += std::sqrt(acc);
    }
    best = std::min(best, cost / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Every (start, length) run of 1s, checked exhaustively.
inline std::optional<std::pair<uint32_t, uint32_t>> longest_run_oracle(
    const std::vector<uint8_t>& mask) {
  std::optional<std::pair<uint32_t, uint32_t>> best;
  uint32_t best_len = 0;
  for (uint32_t s = 0; s < mask.size(); ++s) {
    for (uint32_t e = s; e < mask.size(); ++e) {
      bool all = true;
      for (uint32_t k = s; k <= e && all; ++k) all = mask[k] != 0;
      if (all && e - s + 1 > best_len) {
        best_len = e - s + 1;
        best = {s, e};
      }
    }
  }
  return best;
}

inline double spearman_rho(std::vector<double> x, std::vector<double> y) {
  auto ranks = [](const std::vector<double>& v) {
    const size_t n = v.size();
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (size_t i = 0; i < n; ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const size_t n = rx.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// In-memory corpus builder (no files): enough for partition and loop
// accounting tests that never touch feature/detection files.
struct ClipSpec {
  std::string id;
  uint32_t T = 4;
  sead::Lighting lighting = sead::Lighting::day;
  sead::Weather weather = sead::Weather::sunny;
  std::vector<double> accel;
  std::vector<double> yaw;
};

inline sead::CorpusIndex memory_corpus(const std::vector<ClipSpec>& specs) {
  sead::CorpusIndex index;
  index.base_dir = ".";
  for (const auto& s : specs) {
    sead::ClipRecord rec;
    rec.meta.clip_id = s.id;
    rec.meta.num_frames = s.T;
    rec.meta.lighting = s.lighting;
    rec.meta.weather = s.weather;
    rec.can.clip_id = s.id;
    rec.can.accel_y = s.accel.empty() ? std::vector<double>(s.T, 0.0) : s.accel;
    rec.can.yaw_delta = s.yaw.empty() ? std::vector<double>(s.T, 0.0) : s.yaw;
    rec.features_path = "features/" + s.id + ".feat";
    rec.detections_path = "detections/" + s.id + ".jsonl";
    rec.features_file = index.base_dir / rec.features_path;
    rec.detections_file = index.base_dir / rec.detections_path;
    index.clips.emplace(s.id, std::move(rec));
  }
  return index;
}

// Random in-memory corpus with varied labels and CAN traces.
inline sead::CorpusIndex random_memory_corpus(sead::Rng& rng, uint32_t num_clips) {
  std::vector<ClipSpec> specs;
  for (uint32_t k = 0; k < num_clips; ++k) {
    ClipSpec s;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "r%04u", k);
    s.id = buf;
    s.T = 3 + static_cast<uint32_t>(rng.below(8));
    s.lighting = rng.below(2) ? sead::Lighting::night : sead::Lighting::day;
    s.weather = rng.below(2) ? sead::Weather::rainy : sead::Weather::sunny;
    for (uint32_t t = 0; t < s.T; ++t) {
      s.accel.push_back(rng.normal());
      s.yaw.push_back(0.2 * rng.normal());
    }
    specs.push_back(std::move(s));
  }
  return memory_corpus(specs);
}

}  // namespace sead_test
