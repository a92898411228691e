#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sead/loop.hpp"

// Seeded synthetic corpora with a hidden per-clip difficulty in [0, 1]
// drawn from a long-tailed Beta. Difficulty drives, through tunable
// couplings, (a) the step size of the feature random walk, so scene shift
// tracks it, (b) CAN magnitudes, so the dynamic scores track it, (c) how
// close the nearest confident detection comes to the ego, and (d) the odds
// of night/rain labels. Setting a coupling to 0 severs its channel. The
// difficulty map is returned in memory and never written to corpus files.
//
// The proxy learner is a 1-nearest-neighbor predictor in difficulty space:
// its error is the expected gap to the nearest labeled difficulty, i.e. a
// direct measure of how well a selection covers the difficulty axis.

namespace sead {

struct SynthConfig {
  uint32_t num_clips = 200;
  uint32_t frames_per_clip = 40;  // about 20 s at 2 Hz
  uint32_t feature_dim = 8;
  uint32_t agents_min = 4;  // agent features per frame, inclusive range
  uint32_t agents_max = 10;
  uint32_t map_min = 6;  // map features per frame
  uint32_t map_max = 12;
  double difficulty_alpha = 1.0;  // Beta(1, 4): mostly easy, thin hard tail
  double difficulty_beta = 4.0;
  double dynamics_coupling = 1.0;   // difficulty -> walk step and CAN magnitude
  double proximity_coupling = 1.0;  // difficulty -> nearness of closest agent
  double night_rain_bias = 0.8;     // difficulty -> adverse lighting/weather
  uint64_t seed = 0;

  void validate() const;
};

struct SynthCorpus {
  CorpusIndex index;
  std::map<std::string, double> difficulty;  // hidden ground truth
};

// Materializes manifest.jsonl, features/, detections/ under out_dir and
// returns the loaded index plus the hidden difficulty map. Byte-identical
// output for identical configs.
SynthCorpus generate_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir);

struct ProxySample {
  std::string clip_id;
  double difficulty = 0.0;
  double frame_weight = 0.0;  // labeled frames backing this sample
};

class ProxyModel : public Model {
 public:
  explicit ProxyModel(std::vector<ProxySample> samples);

  // Nearest labeled sample in difficulty; ties resolve to the lower
  // difficulty, then the smaller clip_id.
  const ProxySample& nearest(double difficulty) const;
  double predict(double difficulty) const { return nearest(difficulty).difficulty; }

  const std::vector<ProxySample>& samples() const { return samples_; }

 private:
  std::vector<ProxySample> samples_;  // sorted by (difficulty, clip_id)
};

// Throws EmptyLabeledSet on an empty labeled list; unknown clip ids throw.
ProxyModel proxy_train(const std::vector<LabeledClip>& labeled,
                       const std::map<std::string, double>& truth);

// Expected |predicted - true| difficulty under eval_weights (normalized
// internally); in [0, 1].
double proxy_error(const ProxyModel& model, const std::map<std::string, double>& truth,
                   const std::map<std::string, double>& eval_weights);

std::map<std::string, double> uniform_eval_weights(const CorpusIndex& index);
// Weights proportional to difficulty: the evaluation emphasizes the rare
// hard scenarios that selection is supposed to cover.
std::map<std::string, double> difficulty_eval_weights(const std::map<std::string, double>& truth);

// Learner over a materialized corpus. Inference replays the stored
// feature/detection files (deterministic per clip id); training fits the
// 1-NN proxy when a difficulty map is supplied and otherwise returns an
// empty model. Inference is reentrant.
class CorpusLearner : public Learner {
 public:
  explicit CorpusLearner(const CorpusIndex& index,
                         const std::map<std::string, double>* truth = nullptr)
      : index_(&index), truth_(truth) {}

  ModelHandle train_from_scratch(const std::vector<LabeledClip>& labeled,
                                 uint64_t seed) override;
  ClipFeatures infer_features(const ModelHandle& model,
                              const std::string& clip_id) const override;
  DetectionSet infer_detections(const ModelHandle& model,
                                const std::string& clip_id) const override;
  bool inference_is_reentrant() const override { return true; }

 private:
  const CorpusIndex* index_;
  const std::map<std::string, double>* truth_;
};

struct PolicyArm {
  std::string policy;
  double budget_fraction = 0.0;
  uint64_t clips = 0;
  double mean_error = 0.0;
  double std_error = 0.0;
  double mean_clip_fraction = 0.0;
  double mean_frame_fraction = 0.0;
};

struct ComparisonReport {
  uint32_t num_seeds = 0;
  std::vector<PolicyArm> arms;  // policy-major, budgets ascending
};

// Runs both policies on num_seeds independent corpora at clip budgets of
// 10/20/30 percent (three batches of 10 percent for the active policy,
// nested random prefixes for the baseline) and reports mean and std of the
// proxy error per arm plus annotation volume.
ComparisonReport compare_policies(const SynthConfig& synth_cfg, const LoopConfig& loop_cfg,
                                  uint32_t num_seeds, const std::filesystem::path& work_dir,
                                  unsigned threads = 1);

std::string comparison_to_jsonl(const ComparisonReport& report);

}  // namespace sead
