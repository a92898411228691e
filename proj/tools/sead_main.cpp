// sead: one binary exposing the pipeline stages (validate, partition,
// score, keyframes, select, simulate) and the synthetic benchmark (synth,
// compare, report). Every subcommand is a thin shell over one library
// operation: parse flags, call, serialize. Data goes to --out (or stdout),
// diagnostics to stderr. Output files are written atomically.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sead/io_util.hpp"
#include "sead/kvconfig.hpp"
#include "sead/loop.hpp"
#include "sead/parallel.hpp"
#include "sead/partition.hpp"
#include "sead/synth.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  sead::atomic_write_file(out_path, content);
}

struct ShiftFlags {
  std::string engine = "centroid";
  uint64_t reduce_dim = 0;
  uint64_t projection_seed = 0;
  double sinkhorn_epsilon = sead::ShiftConfig{}.sinkhorn_epsilon;
  uint64_t sinkhorn_max_iter = sead::ShiftConfig{}.sinkhorn_max_iter;
  double sinkhorn_tol = sead::ShiftConfig{}.sinkhorn_tol;

  void attach(CLI::App* cmd) {
    cmd->add_option("--engine", engine, "shift engine: exact|sinkhorn|centroid");
    cmd->add_option("--reduce-dim", reduce_dim, "project features to this dimension (0 = off)");
    cmd->add_option("--projection-seed", projection_seed, "seed for the projection matrix");
    cmd->add_option("--sinkhorn-epsilon", sinkhorn_epsilon,
                    "regularization relative to mean ground cost");
    cmd->add_option("--sinkhorn-max-iter", sinkhorn_max_iter, "sinkhorn iteration cap");
    cmd->add_option("--sinkhorn-tol", sinkhorn_tol, "sinkhorn L1 marginal tolerance");
  }

  sead::ShiftConfig to_config() const {
    sead::ShiftConfig cfg;
    cfg.engine = sead::engine_from_string(engine);
    if (reduce_dim > 0) cfg.reduce_dim = static_cast<uint32_t>(reduce_dim);
    cfg.projection_seed = projection_seed;
    cfg.sinkhorn_epsilon = sinkhorn_epsilon;
    cfg.sinkhorn_max_iter = static_cast<uint32_t>(sinkhorn_max_iter);
    cfg.sinkhorn_tol = sinkhorn_tol;
    return cfg;
  }
};

struct KeyframeFlags {
  double theta_tau = 0.5;
  double theta_d = 5.0;
  std::string fallback = "full-clip";

  void attach(CLI::App* cmd) {
    cmd->add_option("--theta-tau", theta_tau, "confidence threshold");
    cmd->add_option("--theta-d", theta_d, "distance threshold in meters");
    cmd->add_option("--fallback", fallback, "full-clip|min-distance-frame");
  }

  sead::KeyframeConfig to_config() const {
    sead::KeyframeConfig cfg;
    cfg.confidence_threshold = theta_tau;
    cfg.distance_threshold = theta_d;
    cfg.fallback = sead::fallback_from_string(fallback);
    return cfg;
  }
};

int run_validate(const std::string& manifest, const std::string& out) {
  const auto index = sead::load_manifest(manifest);
  const auto report = sead::validate_corpus(index);
  std::string content;
  for (const auto& issue : report.issues) {
    json obj;
    obj["clip_id"] = issue.clip_id;
    obj["field"] = issue.field;
    obj["message"] = issue.message;
    content += obj.dump();
    content += '\n';
  }
  write_output(out, content);
  return report.empty() ? kExitOk : kExitFailure;
}

int run_partition(const std::string& manifest, const std::string& lambda_text,
                  const std::string& out) {
  const double lambda = sead::parse_ratio(lambda_text);
  const auto index = sead::load_manifest(manifest);
  const auto table = sead::build_partition(index, lambda);
  std::string content;
  for (const auto& [id, rec] : index.clips) {
    const auto& cell = table.assignment.at(id);
    json obj;
    obj["clip_id"] = id;
    obj["static_cell"] = sead::to_string(cell.first);
    obj["dynamic_cell"] = sead::to_string(cell.second);
    obj["acc_score"] = sead::acc_score(rec.can);
    obj["yaw_score"] = sead::yaw_score(rec.can);
    content += obj.dump();
    content += '\n';
  }
  write_output(out, content);
  return kExitOk;
}

int run_score(const std::string& manifest, const ShiftFlags& flags, unsigned threads,
              const std::string& out) {
  const auto index = sead::load_manifest(manifest);
  const auto cfg = flags.to_config();
  const auto ids = index.clip_ids();
  std::vector<sead::SceneShift> shifts(ids.size());
  sead::parallel_for(ids.size(), threads, [&](size_t k) {
    shifts[k] = sead::scene_shift(sead::load_features(index, ids[k]), cfg);
  });
  std::string content;
  for (const auto& s : shifts) {
    json obj;
    obj["clip_id"] = s.clip_id;
    obj["fs_total"] = s.total;
    obj["fs_agent_total"] = s.agent_total;
    obj["fs_map_total"] = s.map_total;
    content += obj.dump();
    content += '\n';
  }
  write_output(out, content);
  return kExitOk;
}

int run_keyframes(const std::string& manifest, const KeyframeFlags& flags,
                  const std::string& clips_file, const std::string& out) {
  const auto index = sead::load_manifest(manifest);
  const auto cfg = flags.to_config();
  std::vector<std::string> ids;
  if (clips_file.empty()) {
    ids = index.clip_ids();
  } else {
    for (const auto& line : sead::read_lines(clips_file))
      if (!line.empty()) ids.push_back(line);
  }
  std::string content;
  for (const auto& id : ids) {
    const auto range = sead::select_keyframes(sead::load_detections(index, id), cfg);
    json obj;
    obj["clip_id"] = id;
    obj["start"] = range.start;
    obj["end"] = range.end;
    obj["is_fallback"] = range.is_fallback;
    content += obj.dump();
    content += '\n';
  }
  write_output(out, content);
  return kExitOk;
}

int run_select(const std::string& manifest, const std::string& lambda_text, uint64_t count,
               uint64_t seed, const std::string& out) {
  const double lambda = sead::parse_ratio(lambda_text);
  const auto index = sead::load_manifest(manifest);
  const auto table = sead::build_partition(index, lambda);
  const auto ids = sead::initial_select(table, count, seed);
  std::string content;
  for (const auto& id : ids) {
    const auto& cell = table.assignment.at(id);
    json obj;
    obj["clip_id"] = id;
    obj["static_cell"] = sead::to_string(cell.first);
    obj["dynamic_cell"] = sead::to_string(cell.second);
    content += obj.dump();
    content += '\n';
  }
  write_output(out, content);
  return kExitOk;
}

int run_simulate(const std::string& manifest, uint64_t per_iter, uint64_t iters,
                 uint64_t budget, const std::string& lambda_text, const ShiftFlags& shift,
                 const KeyframeFlags& keyframe, uint64_t seed, unsigned threads,
                 const std::string& log_path) {
  const auto index = sead::load_manifest(manifest);
  sead::LoopConfig cfg;
  cfg.per_iter_clips = per_iter;
  cfg.iterations = static_cast<uint32_t>(iters);
  cfg.total_budget_clips = budget > 0 ? budget : per_iter * iters;
  cfg.lambda = sead::parse_ratio(lambda_text);
  cfg.shift = shift.to_config();
  cfg.keyframe = keyframe.to_config();
  cfg.seed = seed;
  cfg.threads = threads;

  sead::CorpusLearner learner(index);
  const auto log = sead::run_active_loop(index, learner, cfg);
  write_output(log_path, sead::selection_log_to_jsonl(log));
  if (log.aborted) {
    std::cerr << "simulate aborted: " << log.abort_reason << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_synth(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = sead::synth_config_from_file(config_path);
  const auto corpus = sead::generate_corpus(cfg, out_dir);
  std::cerr << "wrote " << corpus.index.clips.size() << " clips to " << out_dir << "\n";
  return kExitOk;
}

int run_compare(const std::string& synth_path, const std::string& loop_path, uint64_t seeds,
                const std::string& work_dir, unsigned threads, const std::string& out) {
  const auto synth_cfg = sead::synth_config_from_file(synth_path);
  const auto loop_cfg = sead::loop_config_from_file(loop_path);

  std::filesystem::path work = work_dir;
  bool cleanup = false;
  if (work.empty()) {
    work = std::filesystem::temp_directory_path() /
           ("sead-compare-" + std::to_string(::getpid()));
    cleanup = true;
  }
  const auto report = sead::compare_policies(synth_cfg, loop_cfg,
                                             static_cast<uint32_t>(seeds), work, threads);
  write_output(out, sead::comparison_to_jsonl(report));
  if (cleanup) {
    std::error_code ec;
    std::filesystem::remove_all(work, ec);
  }
  return kExitOk;
}

int run_report(const std::string& log_path, const std::string& manifest,
               const std::string& out) {
  const auto index = sead::load_manifest(manifest);
  const auto log = sead::selection_log_from_jsonl(sead::read_file(log_path));
  if (log.aborted)
    std::cerr << "warning: log is flagged aborted (" << log.abort_reason << ")\n";
  const auto report = sead::budget_report(log, index);
  json obj;
  obj["selected_clips"] = report.selected_clips;
  obj["corpus_clips"] = report.corpus_clips;
  obj["clip_fraction"] = report.clip_fraction;
  obj["selected_frames"] = report.selected_frames;
  obj["corpus_frames"] = report.corpus_frames;
  obj["frame_fraction"] = report.frame_fraction;
  write_output(out, obj.dump() + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budgeted active data selection over scene feature shifts"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  unsigned threads = 1;
  std::string log_level = "info";
  std::string manifest, out, lambda_text = "1/3";

  auto add_common = [&](CLI::App* cmd, bool needs_manifest) {
    if (needs_manifest)
      cmd->add_option("--manifest", manifest, "corpus manifest (JSONL)")->required();
    cmd->add_option("--out", out, "output file ('-' or empty for stdout)");
    cmd->add_option("--log-level", log_level, "quiet|info|debug");
  };

  auto* c_validate = app.add_subcommand("validate", "check corpus consistency");
  add_common(c_validate, true);

  auto* c_partition = app.add_subcommand("partition", "emit the 12-cell assignment");
  add_common(c_partition, true);
  c_partition->add_option("--lambda", lambda_text, "valuable-set ratio, e.g. 1/3");

  ShiftFlags shift_flags;
  auto* c_score = app.add_subcommand("score", "accumulated feature shift per clip");
  add_common(c_score, true);
  shift_flags.attach(c_score);
  c_score->add_option("--seed", seed, "projection seed alias");
  c_score->add_option("--threads", threads, "worker threads");

  KeyframeFlags keyframe_flags;
  std::string clips_file;
  auto* c_keyframes = app.add_subcommand("keyframes", "keyframe range per clip");
  add_common(c_keyframes, true);
  keyframe_flags.attach(c_keyframes);
  c_keyframes->add_option("--clips", clips_file, "file of clip ids (default: all)");

  uint64_t count = 0;
  auto* c_select = app.add_subcommand("select", "initial proportional draw");
  add_common(c_select, true);
  c_select->add_option("--lambda", lambda_text, "valuable-set ratio");
  c_select->add_option("--count", count, "clips to draw")->required();
  c_select->add_option("--seed", seed, "selection seed");

  uint64_t per_iter = 0, iters = 0, budget = 0;
  std::string sim_log;
  auto* c_simulate = app.add_subcommand("simulate", "run the full selection loop");
  c_simulate->add_option("--manifest", manifest, "corpus manifest (JSONL)")->required();
  c_simulate->add_option("--per-iter", per_iter, "clips per iteration")->required();
  c_simulate->add_option("--iters", iters, "iterations")->required();
  c_simulate->add_option("--budget-clips", budget, "total clip budget (default per-iter*iters)");
  c_simulate->add_option("--lambda", lambda_text, "valuable-set ratio");
  shift_flags.attach(c_simulate);
  keyframe_flags.attach(c_simulate);
  c_simulate->add_option("--seed", seed, "loop seed");
  c_simulate->add_option("--threads", threads, "worker threads");
  c_simulate->add_option("--log", sim_log, "selection log output (JSONL)")->required();
  c_simulate->add_option("--log-level", log_level, "quiet|info|debug");

  std::string config_path, out_dir;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic corpus");
  c_synth->add_option("--config", config_path, "synth config (key = value)")->required();
  c_synth->add_option("--out", out_dir, "corpus output directory")->required();
  c_synth->add_option("--log-level", log_level, "quiet|info|debug");

  std::string synth_path, loop_path, work_dir;
  uint64_t seeds = 20;
  auto* c_compare = app.add_subcommand("compare", "sead vs random over seeded corpora");
  c_compare->add_option("--synth", synth_path, "synth config")->required();
  c_compare->add_option("--loop", loop_path, "loop config")->required();
  c_compare->add_option("--seeds", seeds, "independent corpora");
  c_compare->add_option("--work-dir", work_dir, "where corpora are materialized");
  c_compare->add_option("--threads", threads, "worker threads");
  c_compare->add_option("--out", out, "report output (JSONL)");
  c_compare->add_option("--log-level", log_level, "quiet|info|debug");

  std::string report_log;
  auto* c_report = app.add_subcommand("report", "budget fractions from a selection log");
  add_common(c_report, true);
  c_report->add_option("--log", report_log, "selection log (JSONL)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << "run 'sead --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (c_validate->parsed()) return run_validate(manifest, out);
    if (c_partition->parsed()) return run_partition(manifest, lambda_text, out);
    if (c_score->parsed()) {
      if (c_score->count("--seed") && !c_score->count("--projection-seed"))
        shift_flags.projection_seed = seed;
      return run_score(manifest, shift_flags, threads, out);
    }
    if (c_keyframes->parsed()) return run_keyframes(manifest, keyframe_flags, clips_file, out);
    if (c_select->parsed()) return run_select(manifest, lambda_text, count, seed, out);
    if (c_simulate->parsed())
      return run_simulate(manifest, per_iter, iters, budget, lambda_text, shift_flags,
                          keyframe_flags, seed, threads, sim_log);
    if (c_synth->parsed()) return run_synth(config_path, out_dir);
    if (c_compare->parsed())
      return run_compare(synth_path, loop_path, seeds, work_dir, threads, out);
    if (c_report->parsed()) return run_report(report_log, manifest, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
