#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sead/corpus.hpp"
#include "sead/keyframe.hpp"
#include "sead/shift.hpp"

// The active-selection loop: a proportional initial draw over the 12-cell
// partition, then per iteration retrain from scratch on everything labeled
// so far, score only the residual pool by accumulated feature shift, take
// the top clips, and label their keyframe ranges. Selected clips never
// reenter the pool.

namespace sead {

class Model {
 public:
  virtual ~Model() = default;
};

using ModelHandle = std::shared_ptr<const Model>;

struct LabeledClip {
  std::string clip_id;
  FrameRange range;
};

// Host-provided learner. infer_* must be deterministic given
// (handle, clip_id); train_from_scratch may depend only on the labeled set
// and the seed. The loop serializes inference calls unless the learner
// declares reentrancy.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual ModelHandle train_from_scratch(const std::vector<LabeledClip>& labeled,
                                         uint64_t seed) = 0;
  virtual ClipFeatures infer_features(const ModelHandle& model,
                                      const std::string& clip_id) const = 0;
  virtual DetectionSet infer_detections(const ModelHandle& model,
                                        const std::string& clip_id) const = 0;
  virtual bool inference_is_reentrant() const { return false; }
};

struct LoopConfig {
  uint64_t total_budget_clips = 0;  // informational; the schedule below governs
  uint64_t per_iter_clips = 1;      // n_itr
  uint32_t iterations = 1;          // I; iteration 0 is the initial draw
  double lambda = 1.0 / 3.0;
  ShiftConfig shift;
  KeyframeConfig keyframe;
  uint64_t seed = 0;
  unsigned threads = 1;
};

struct SelectionEntry {
  std::string clip_id;
  FrameRange range;
  std::optional<double> fs_total;  // absent for iteration 0
};

struct IterationRecord {
  uint32_t iter = 0;
  uint64_t pool_size_before = 0;
  std::vector<SelectionEntry> selected;
  uint64_t labeled_clips_after = 0;
  uint64_t labeled_frames_after = 0;
};

struct SelectionLog {
  std::vector<IterationRecord> iterations;
  bool aborted = false;
  std::string abort_reason;

  // Cumulative labeled set over iterations [0, upto_iter].
  std::vector<LabeledClip> labeled_through(size_t upto_iter) const;
};

// Runs the full schedule; on a learner failure mid-iteration the partial
// log is returned with aborted set and no partial selection appended.
// final_model, when non-null, receives the handle of the closing
// train_from_scratch over the complete labeled set.
SelectionLog run_active_loop(const CorpusIndex& corpus, Learner& learner,
                             const LoopConfig& cfg, ModelHandle* final_model = nullptr);

std::string selection_log_to_jsonl(const SelectionLog& log);
SelectionLog selection_log_from_jsonl(const std::string& text);

struct BudgetReport {
  uint64_t selected_clips = 0;
  uint64_t corpus_clips = 0;
  uint64_t selected_frames = 0;
  uint64_t corpus_frames = 0;
  double clip_fraction = 0.0;
  double frame_fraction = 0.0;
};

BudgetReport budget_report(const SelectionLog& log, const CorpusIndex& corpus);

}  // namespace sead
