#include "sead/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <nlohmann/json.hpp>

#include "sead/rng.hpp"

namespace sead {

namespace fs = std::filesystem;
using nlohmann::json;

void SynthConfig::validate() const {
  if (num_clips == 0) throw Error(ErrorCode::bad_config, "num_clips must be positive");
  if (frames_per_clip < 2)
    throw Error(ErrorCode::bad_config, "frames_per_clip must be at least 2");
  if (feature_dim == 0) throw Error(ErrorCode::bad_config, "feature_dim must be positive");
  if (agents_min == 0 || agents_min > agents_max)
    throw Error(ErrorCode::bad_config, "agents_per_frame range invalid");
  if (map_min == 0 || map_min > map_max)
    throw Error(ErrorCode::bad_config, "map elements range invalid");
  if (!(difficulty_alpha > 0.0) || !(difficulty_beta > 0.0))
    throw Error(ErrorCode::bad_config, "difficulty shape parameters must be positive");
  if (!std::isfinite(dynamics_coupling) || dynamics_coupling < 0.0)
    throw Error(ErrorCode::bad_config, "dynamics_coupling must be finite and >= 0");
  if (!std::isfinite(proximity_coupling) || proximity_coupling < 0.0)
    throw Error(ErrorCode::bad_config, "proximity_coupling must be finite and >= 0");
  if (!(night_rain_bias >= 0.0) || !(night_rain_bias <= 1.0))
    throw Error(ErrorCode::bad_config, "night_rain_bias must be in [0, 1]");
}

namespace {

std::string clip_name(uint32_t k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%05u", k);
  return buf;
}

// One feature role's trajectory: a cluster center random-walks with a
// difficulty-scaled step; per-frame points are fresh jittered copies of
// the center, so consecutive-frame transport cost tracks the step size.
std::vector<FeatureSet> walk_features(Rng& rng, FeatureRole role, uint32_t T, uint32_t d,
                                      uint32_t n_min, uint32_t n_max, double step) {
  constexpr double kJitter = 0.05;
  std::vector<double> center(d);
  for (auto& c : center) c = 2.0 * rng.normal();

  std::vector<FeatureSet> out;
  out.reserve(T);
  const double per_dim = step / std::sqrt(static_cast<double>(d));
  for (uint32_t t = 0; t < T; ++t) {
    if (t > 0)
      for (auto& c : center) c += per_dim * rng.normal();
    const uint32_t n = n_min + static_cast<uint32_t>(rng.below(n_max - n_min + 1));
    std::vector<float> pts(static_cast<size_t>(n) * d);
    for (uint32_t i = 0; i < n; ++i)
      for (uint32_t k = 0; k < d; ++k)
        pts[static_cast<size_t>(i) * d + k] =
            static_cast<float>(center[k] + kJitter * rng.normal());
    out.push_back(FeatureSet::uniform(role, n, d, std::move(pts)));
  }
  return out;
}

const char* kClasses[4] = {"car", "pedestrian", "cyclist", "truck"};

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir / "features");
  fs::create_directories(out_dir / "detections");

  CorpusIndex index;
  index.base_dir = out_dir;
  std::map<std::string, double> truth;

  for (uint32_t k = 0; k < cfg.num_clips; ++k) {
    const std::string id = clip_name(k);
    Rng rng = Rng::derive(cfg.seed, "clip:" + id);
    const uint32_t T = cfg.frames_per_clip;

    const double difficulty = rng.beta(cfg.difficulty_alpha, cfg.difficulty_beta);
    truth[id] = difficulty;

    ClipRecord rec;
    rec.meta.clip_id = id;
    rec.meta.num_frames = T;

    // Adverse conditions fire when a difficulty/noise blend crosses a
    // fixed threshold; bias 0 leaves pure noise.
    const double b = cfg.night_rain_bias;
    const double night_mix = b * difficulty + (1.0 - b) * rng.uniform01();
    const double rain_mix = b * difficulty + (1.0 - b) * rng.uniform01();
    rec.meta.lighting = night_mix > 0.30 ? Lighting::night : Lighting::day;
    rec.meta.weather = rain_mix > 0.33 ? Weather::rainy : Weather::sunny;

    // CAN magnitudes scale with difficulty through the dynamics coupling.
    const double acc_sigma = 0.05 + 0.6 * cfg.dynamics_coupling * difficulty;
    const double yaw_amp = 0.005 + 0.04 * cfg.dynamics_coupling * difficulty;
    rec.can.clip_id = id;
    rec.can.accel_y.resize(T);
    rec.can.yaw_delta.resize(T);
    for (uint32_t t = 0; t < T; ++t) {
      rec.can.accel_y[t] = acc_sigma * rng.normal();
      rec.can.yaw_delta[t] = yaw_amp * rng.normal();
    }

    // Feature walks for both roles.
    const double step = 0.02 + 0.5 * cfg.dynamics_coupling * difficulty;
    ClipFeatures feats;
    feats.clip_id = id;
    auto agents = walk_features(rng, FeatureRole::agent, T, cfg.feature_dim, cfg.agents_min,
                                cfg.agents_max, step);
    auto maps = walk_features(rng, FeatureRole::map, T, cfg.feature_dim, cfg.map_min,
                              cfg.map_max, step);
    feats.frames.resize(T);
    for (uint32_t t = 0; t < T; ++t) {
      feats.frames[t].agents = std::move(agents[t]);
      feats.frames[t].map = std::move(maps[t]);
    }

    // Detections: the closest confident agent sits near a difficulty-set
    // base distance with slow AR(1) wander, so hard clips produce runs of
    // near encounters rather than a constant-key clip.
    DetectionSet dets;
    dets.clip_id = id;
    dets.frames.resize(T);
    const double base_dist = 9.0 - 8.0 * cfg.proximity_coupling * difficulty;
    double wander = 0.0;
    for (uint32_t t = 0; t < T; ++t) {
      wander = 0.7 * wander + 0.6 * rng.normal();
      const double r_near = std::max(0.3, base_dist + wander);

      auto place = [&](double radius, double conf) {
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        Detection d;
        d.cls = kClasses[rng.below(4)];
        d.x = radius * std::cos(phi);
        d.y = radius * std::sin(phi);
        d.confidence = conf;
        return d;
      };

      auto& frame = dets.frames[t];
      frame.push_back(place(r_near, 0.55 + 0.4 * rng.uniform01()));
      // Occasional low-confidence detection even closer in; the
      // confidence filter has to drop it.
      if (rng.uniform01() < 0.5)
        frame.push_back(place(std::max(0.3, r_near * 0.5), 0.05 + 0.3 * rng.uniform01()));
      const uint32_t extras = 2 + static_cast<uint32_t>(rng.below(3));
      for (uint32_t e = 0; e < extras; ++e)
        frame.push_back(place(r_near + 0.5 + 8.0 * rng.uniform01(),
                              0.3 + 0.65 * rng.uniform01()));
    }

    rec.features_path = "features/" + id + ".feat";
    rec.detections_path = "detections/" + id + ".jsonl";
    rec.features_file = out_dir / rec.features_path;
    rec.detections_file = out_dir / rec.detections_path;

    store_features(feats, rec.features_file);
    store_detections(dets, rec.detections_file);
    index.clips.emplace(id, std::move(rec));
  }

  // Manifest last: its presence implies the per-clip files are complete.
  store_manifest(index, out_dir / "manifest.jsonl");

  SynthCorpus out;
  out.index = load_manifest(out_dir / "manifest.jsonl");
  out.difficulty = std::move(truth);
  return out;
}

// ---------------------------------------------------------------------------
// Proxy learner
// ---------------------------------------------------------------------------

ProxyModel::ProxyModel(std::vector<ProxySample> samples) : samples_(std::move(samples)) {
  if (samples_.empty())
    throw Error(ErrorCode::empty_labeled_set, "proxy model needs at least one sample");
  std::sort(samples_.begin(), samples_.end(), [](const ProxySample& a, const ProxySample& b) {
    if (a.difficulty != b.difficulty) return a.difficulty < b.difficulty;
    return a.clip_id < b.clip_id;
  });
}

const ProxySample& ProxyModel::nearest(double difficulty) const {
  auto it = std::lower_bound(
      samples_.begin(), samples_.end(), difficulty,
      [](const ProxySample& s, double q) { return s.difficulty < q; });
  // Candidates: first sample at/above the query and the one below it.
  // On an exact distance tie the lower-difficulty sample wins.
  if (it == samples_.end()) return *(it - 1);
  if (it == samples_.begin()) return *it;
  const ProxySample& hi = *it;
  const ProxySample& lo = *(it - 1);
  return (difficulty - lo.difficulty) <= (hi.difficulty - difficulty) ? lo : hi;
}

ProxyModel proxy_train(const std::vector<LabeledClip>& labeled,
                       const std::map<std::string, double>& truth) {
  if (labeled.empty()) throw Error(ErrorCode::empty_labeled_set, "no labeled clips");
  std::map<std::string, ProxySample> unique;  // idempotent under duplication
  for (const LabeledClip& lc : labeled) {
    auto it = truth.find(lc.clip_id);
    if (it == truth.end())
      throw Error(ErrorCode::unknown_clip, "no difficulty for '" + lc.clip_id + "'");
    ProxySample& s = unique[lc.clip_id];
    s.clip_id = lc.clip_id;
    s.difficulty = it->second;
    s.frame_weight = std::max(s.frame_weight, static_cast<double>(lc.range.length()));
  }
  std::vector<ProxySample> samples;
  samples.reserve(unique.size());
  for (auto& [id, s] : unique) samples.push_back(std::move(s));
  return ProxyModel(std::move(samples));
}

double proxy_error(const ProxyModel& model, const std::map<std::string, double>& truth,
                   const std::map<std::string, double>& eval_weights) {
  double total_weight = 0.0;
  double acc = 0.0;
  for (const auto& [id, w] : eval_weights) {
    if (w <= 0.0) continue;
    auto it = truth.find(id);
    if (it == truth.end())
      throw Error(ErrorCode::unknown_clip, "no difficulty for '" + id + "'");
    acc += w * std::abs(model.predict(it->second) - it->second);
    total_weight += w;
  }
  return total_weight > 0.0 ? acc / total_weight : 0.0;
}

std::map<std::string, double> uniform_eval_weights(const CorpusIndex& index) {
  std::map<std::string, double> out;
  for (const auto& [id, rec] : index.clips) out[id] = 1.0;
  return out;
}

std::map<std::string, double> difficulty_eval_weights(
    const std::map<std::string, double>& truth) {
  std::map<std::string, double> out;
  for (const auto& [id, d] : truth) out[id] = d;
  return out;
}

// ---------------------------------------------------------------------------
// Corpus-backed learner
// ---------------------------------------------------------------------------

namespace {

class EmptyModel : public Model {};

}  // namespace

ModelHandle CorpusLearner::train_from_scratch(const std::vector<LabeledClip>& labeled,
                                              uint64_t seed) {
  (void)seed;  // the 1-NN fit has no stochastic component
  if (truth_) return std::make_shared<const ProxyModel>(proxy_train(labeled, *truth_));
  if (labeled.empty()) throw Error(ErrorCode::empty_labeled_set, "no labeled clips");
  return std::make_shared<const EmptyModel>();
}

ClipFeatures CorpusLearner::infer_features(const ModelHandle& model,
                                           const std::string& clip_id) const {
  (void)model;
  return load_features(*index_, clip_id);
}

DetectionSet CorpusLearner::infer_detections(const ModelHandle& model,
                                             const std::string& clip_id) const {
  (void)model;
  return load_detections(*index_, clip_id);
}

// ---------------------------------------------------------------------------
// Policy comparison
// ---------------------------------------------------------------------------

namespace {

struct ArmAccumulator {
  std::vector<double> errors;
  std::vector<double> clip_fractions;
  std::vector<double> frame_fractions;
};

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

ComparisonReport compare_policies(const SynthConfig& synth_cfg, const LoopConfig& loop_cfg,
                                  uint32_t num_seeds, const fs::path& work_dir,
                                  unsigned threads) {
  if (num_seeds == 0) throw Error(ErrorCode::bad_config, "num_seeds must be positive");
  synth_cfg.validate();

  const std::vector<double> budgets = {0.10, 0.20, 0.30};
  const uint64_t batch =
      std::max<uint64_t>(1, std::llround(0.10 * static_cast<double>(synth_cfg.num_clips)));

  // arm key: policy index (0 = sead, 1 = random) * 3 + budget index
  std::array<ArmAccumulator, 6> acc;

  for (uint32_t s = 0; s < num_seeds; ++s) {
    SynthConfig scfg = synth_cfg;
    scfg.seed = mix_seed(synth_cfg.seed, "corpus:" + std::to_string(s));
    const fs::path dir = work_dir / ("seed" + std::to_string(s));
    const SynthCorpus corpus = generate_corpus(scfg, dir);
    const uint64_t total_frames = corpus.index.total_frames();
    const auto eval = difficulty_eval_weights(corpus.difficulty);

    // Active policy: one I=3 run; budget checkpoints are the cumulative
    // labeled sets after each iteration.
    LoopConfig lcfg = loop_cfg;
    lcfg.per_iter_clips = batch;
    lcfg.iterations = 3;
    lcfg.total_budget_clips = 3 * batch;
    lcfg.seed = mix_seed(loop_cfg.seed, "loop:" + std::to_string(s));
    lcfg.threads = threads;

    CorpusLearner learner(corpus.index, &corpus.difficulty);
    const SelectionLog log = run_active_loop(corpus.index, learner, lcfg);
    if (log.aborted)
      throw Error(ErrorCode::internal, "selection loop aborted: " + log.abort_reason);

    for (size_t b = 0; b < budgets.size(); ++b) {
      const auto labeled = log.labeled_through(b);
      const ProxyModel model = proxy_train(labeled, corpus.difficulty);
      uint64_t frames = 0;
      for (const auto& lc : labeled) frames += lc.range.length();
      auto& arm = acc[0 * 3 + b];
      arm.errors.push_back(proxy_error(model, corpus.difficulty, eval));
      arm.clip_fractions.push_back(static_cast<double>(labeled.size()) /
                                   static_cast<double>(scfg.num_clips));
      arm.frame_fractions.push_back(static_cast<double>(frames) /
                                    static_cast<double>(total_frames));
    }

    // Random baseline: nested prefixes of one seeded permutation, whole
    // clips, so error is monotone in budget by construction.
    Rng rng = Rng::derive(lcfg.seed, "random-policy");
    const auto ids = corpus.index.clip_ids();
    const auto perm = rng.sample_without_replacement(
        static_cast<uint32_t>(ids.size()), static_cast<uint32_t>(ids.size()));
    for (size_t b = 0; b < budgets.size(); ++b) {
      const uint64_t take = std::min<uint64_t>(batch * (b + 1), ids.size());
      std::vector<LabeledClip> labeled;
      uint64_t frames = 0;
      for (uint64_t i = 0; i < take; ++i) {
        const std::string& id = ids[perm[i]];
        FrameRange r;
        r.clip_id = id;
        r.start = 0;
        r.end = corpus.index.at(id).meta.num_frames - 1;
        labeled.push_back({id, r});
        frames += r.length();
      }
      const ProxyModel model = proxy_train(labeled, corpus.difficulty);
      auto& arm = acc[1 * 3 + b];
      arm.errors.push_back(proxy_error(model, corpus.difficulty, eval));
      arm.clip_fractions.push_back(static_cast<double>(take) /
                                   static_cast<double>(scfg.num_clips));
      arm.frame_fractions.push_back(static_cast<double>(frames) /
                                    static_cast<double>(total_frames));
    }
  }

  ComparisonReport report;
  report.num_seeds = num_seeds;
  const char* names[2] = {"sead", "random"};
  for (int p = 0; p < 2; ++p) {
    for (size_t b = 0; b < budgets.size(); ++b) {
      const auto& arm = acc[p * 3 + b];
      PolicyArm out;
      out.policy = names[p];
      out.budget_fraction = budgets[b];
      out.clips = batch * (b + 1);
      out.mean_error = mean_of(arm.errors);
      out.std_error = sample_std(arm.errors);
      out.mean_clip_fraction = mean_of(arm.clip_fractions);
      out.mean_frame_fraction = mean_of(arm.frame_fractions);
      report.arms.push_back(std::move(out));
    }
  }
  return report;
}

std::string comparison_to_jsonl(const ComparisonReport& report) {
  std::string out;
  for (const PolicyArm& arm : report.arms) {
    json obj;
    obj["policy"] = arm.policy;
    obj["budget_fraction"] = arm.budget_fraction;
    obj["clips"] = arm.clips;
    obj["mean_error"] = arm.mean_error;
    obj["std_error"] = arm.std_error;
    obj["mean_clip_fraction"] = arm.mean_clip_fraction;
    obj["mean_frame_fraction"] = arm.mean_frame_fraction;
    obj["num_seeds"] = report.num_seeds;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

}  // namespace sead
