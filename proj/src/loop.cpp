#include "sead/loop.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "sead/parallel.hpp"
#include "sead/partition.hpp"
#include "sead/rng.hpp"

namespace sead {

using nlohmann::json;

std::vector<LabeledClip> SelectionLog::labeled_through(size_t upto_iter) const {
  std::vector<LabeledClip> out;
  for (size_t i = 0; i < iterations.size() && i <= upto_iter; ++i)
    for (const SelectionEntry& e : iterations[i].selected)
      out.push_back({e.clip_id, e.range});
  return out;
}

SelectionLog run_active_loop(const CorpusIndex& corpus, Learner& learner,
                             const LoopConfig& cfg, ModelHandle* final_model) {
  if (cfg.per_iter_clips == 0)
    throw Error(ErrorCode::bad_config, "per_iter_clips must be positive");
  if (cfg.iterations == 0)
    throw Error(ErrorCode::bad_config, "iterations must be positive");
  const uint64_t needed = cfg.per_iter_clips * cfg.iterations;
  if (corpus.clips.size() < needed)
    throw Error(ErrorCode::insufficient_pool,
                "pool of " + std::to_string(corpus.clips.size()) + " clips cannot cover " +
                    std::to_string(cfg.iterations) + " x " +
                    std::to_string(cfg.per_iter_clips));

  std::vector<std::string> pool = corpus.clip_ids();  // sorted
  std::vector<LabeledClip> labeled;
  SelectionLog log;
  uint64_t labeled_frames = 0;

  auto full_range = [&](const std::string& id) {
    FrameRange r;
    r.clip_id = id;
    r.start = 0;
    r.end = corpus.at(id).meta.num_frames - 1;
    r.is_fallback = false;
    return r;
  };

  for (uint32_t itr = 0; itr < cfg.iterations; ++itr) {
    IterationRecord rec;
    rec.iter = itr;
    rec.pool_size_before = pool.size();

    std::vector<SelectionEntry> picked;
    try {
      if (itr == 0) {
        const PartitionTable table = build_partition(corpus, cfg.lambda);
        const auto ids = initial_select(table, cfg.per_iter_clips, cfg.seed);
        for (const auto& id : ids) picked.push_back({id, full_range(id), std::nullopt});
      } else {
        const ModelHandle model =
            learner.train_from_scratch(labeled, mix_seed(cfg.seed, "train:" + std::to_string(itr)));

        // Score the residual pool only; per-clip results land in fixed
        // slots so any thread count reduces identically.
        std::vector<SceneShift> shifts(pool.size());
        const unsigned threads =
            learner.inference_is_reentrant() ? cfg.threads : 1;
        parallel_for(pool.size(), threads, [&](size_t k) {
          const ClipFeatures feats = learner.infer_features(model, pool[k]);
          shifts[k] = scene_shift(feats, cfg.shift);
        });

        const auto winners = rank_clips(shifts, cfg.per_iter_clips);
        std::map<std::string, double> totals;
        for (const auto& s : shifts) totals[s.clip_id] = s.total;
        for (const auto& id : winners) {
          const DetectionSet dets = learner.infer_detections(model, id);
          FrameRange range = select_keyframes(dets, cfg.keyframe);
          range.clip_id = id;
          picked.push_back({id, range, totals.at(id)});
        }
      }
    } catch (const std::exception& e) {
      log.aborted = true;
      log.abort_reason = e.what();
      return log;
    }

    for (const SelectionEntry& e : picked) {
      labeled.push_back({e.clip_id, e.range});
      labeled_frames += e.range.length();
      pool.erase(std::find(pool.begin(), pool.end(), e.clip_id));
    }
    rec.selected = std::move(picked);
    rec.labeled_clips_after = labeled.size();
    rec.labeled_frames_after = labeled_frames;
    log.iterations.push_back(std::move(rec));
  }

  try {
    const ModelHandle final_handle = learner.train_from_scratch(
        labeled, mix_seed(cfg.seed, "train:" + std::to_string(cfg.iterations)));
    if (final_model) *final_model = final_handle;
  } catch (const std::exception& e) {
    log.aborted = true;
    log.abort_reason = e.what();
  }
  return log;
}

std::string selection_log_to_jsonl(const SelectionLog& log) {
  std::string out;
  for (const IterationRecord& rec : log.iterations) {
    json obj;
    obj["iter"] = rec.iter;
    obj["pool_size_before"] = rec.pool_size_before;
    json selected = json::array();
    for (const SelectionEntry& e : rec.selected) {
      json entry;
      entry["clip_id"] = e.clip_id;
      entry["start"] = e.range.start;
      entry["end"] = e.range.end;
      entry["is_fallback"] = e.range.is_fallback;
      if (e.fs_total)
        entry["fs_total"] = *e.fs_total;
      else
        entry["fs_total"] = nullptr;
      selected.push_back(std::move(entry));
    }
    obj["selected"] = std::move(selected);
    obj["labeled_clips_after"] = rec.labeled_clips_after;
    obj["labeled_frames_after"] = rec.labeled_frames_after;
    out += obj.dump();
    out += '\n';
  }
  if (log.aborted) {
    json obj;
    obj["aborted"] = true;
    obj["abort_reason"] = log.abort_reason;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

SelectionLog selection_log_from_jsonl(const std::string& text) {
  SelectionLog log;
  size_t start = 0;
  size_t line_no = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    line_no++;
    if (line.empty()) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (obj.contains("aborted")) {
      log.aborted = obj["aborted"].get<bool>();
      log.abort_reason = obj.value("abort_reason", "");
      continue;
    }
    try {
      IterationRecord rec;
      rec.iter = obj.at("iter").get<uint32_t>();
      rec.pool_size_before = obj.at("pool_size_before").get<uint64_t>();
      for (const auto& e : obj.at("selected")) {
        SelectionEntry entry;
        entry.clip_id = e.at("clip_id").get<std::string>();
        entry.range.clip_id = entry.clip_id;
        entry.range.start = e.at("start").get<uint32_t>();
        entry.range.end = e.at("end").get<uint32_t>();
        entry.range.is_fallback = e.at("is_fallback").get<bool>();
        if (!e.at("fs_total").is_null()) entry.fs_total = e.at("fs_total").get<double>();
        rec.selected.push_back(std::move(entry));
      }
      rec.labeled_clips_after = obj.at("labeled_clips_after").get<uint64_t>();
      rec.labeled_frames_after = obj.at("labeled_frames_after").get<uint64_t>();
      log.iterations.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::malformed_line,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

BudgetReport budget_report(const SelectionLog& log, const CorpusIndex& corpus) {
  BudgetReport report;
  report.corpus_clips = corpus.clips.size();
  report.corpus_frames = corpus.total_frames();

  std::set<std::string> seen;
  for (const IterationRecord& rec : log.iterations) {
    for (const SelectionEntry& e : rec.selected) {
      if (!seen.insert(e.clip_id).second) continue;
      report.selected_clips++;
      report.selected_frames += e.range.length();
    }
  }
  if (report.corpus_clips > 0)
    report.clip_fraction =
        static_cast<double>(report.selected_clips) / static_cast<double>(report.corpus_clips);
  if (report.corpus_frames > 0)
    report.frame_fraction =
        static_cast<double>(report.selected_frames) / static_cast<double>(report.corpus_frames);
  return report;
}

}  // namespace sead
