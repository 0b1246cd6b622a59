// Copyright 2026 The sedkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "sedkit/common/checksum.hpp"
#include "sedkit/common/error.hpp"
#include "sedkit/datasets/crop.hpp"
#include "sedkit/datasets/manifest.hpp"
#include "sedkit/evaluate/pauc.hpp"
#include "sedkit/evaluate/postprocess.hpp"
#include "sedkit/evaluate/predict.hpp"
#include "sedkit/evaluate/psds.hpp"
#include "sedkit/evaluate/report.hpp"
#include "sedkit/evaluate/scores.hpp"
#include "sedkit/featurize/cache.hpp"
#include "sedkit/featurize/features.hpp"
#include "sedkit/model/checkpoint.hpp"
#include "sedkit/training/config.hpp"
#include "sedkit/training/data.hpp"
#include "sedkit/training/loop.hpp"
#include "sedkit/training/schedules.hpp"

namespace sedkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr const char* kStatsFile = "norm_stats.sedn";

/// Options shared by every subcommand.
struct RunConfig {
  std::string subcommand;
  std::string config;
  std::string manifest;
  std::string out;
  std::uint64_t seed = kDefaultSeed;
  std::size_t jobs = 1;
  bool strict_determinism = false;
  std::string log_level;
};

namespace detail {

using Logger = std::shared_ptr<spdlog::logger>;
using nlohmann::ordered_json;

inline Logger MakeLogger(std::ostream& err, const std::string& level_flag) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("sedkit", sink);
  log->set_pattern("[%l] %v");
  std::string level = level_flag;
  if (level.empty()) {
    const char* env = std::getenv("SEDKIT_LOG");
    level = env ? env : "info";
  }
  const auto parsed = spdlog::level::from_str(level);
  log->set_level(parsed == spdlog::level::off && level != "off" ? spdlog::level::info : parsed);
  return log;
}

/// Design constants in effect, logged at startup.
inline ordered_json DesignConstants(const training::TrainConfig& t) {
  const evaluate::PsdsParams psds;
  return {
      {"output_frame_s", datasets::kOutputFrameSeconds},
      {"mpa_window_frames", datasets::kFramesPerSegment},
      {"fdy_temperature", t.model.fdy_temperature},
      {"lr", {{"max", t.max_lr}, {"rampup_epochs", t.rampup_epochs}}},
      {"consistency", {{"max", t.consistency_max}, {"rampup_epochs", t.rampup_epochs}}},
      {"aux_weight", {{"start", t.aux_w0}, {"end", t.aux_w1}, {"decay_epochs", t.aux_decay_epochs}}},
      {"ema_alpha", t.ema_alpha},
      {"psds",
       {{"dtc", psds.dtc},
        {"gtc", psds.gtc},
        {"alpha_st", psds.alpha_st},
        {"alpha_ct", 0.0},
        {"e_max", psds.e_max},
        {"n_thresholds", psds.thresholds.size()}}},
      {"mpauc", {{"max_fpr", evaluate::kDefaultMaxFpr}, {"soft_positive", evaluate::kSoftPositive}}},
      {"median_window", evaluate::kDefaultMedianWindow},
  };
}

inline void Banner(const Logger& log, const RunConfig& rc, const ordered_json& effective,
                   const training::TrainConfig& t = {}) {
  const std::string dump = effective.dump();
  log->info("sedkit {} | seed {} | jobs {}{}", rc.subcommand, rc.seed, rc.jobs,
            rc.strict_determinism ? " | strict determinism" : "");
  log->info("design constants: {}", DesignConstants(t).dump());
  log->info("config hash {:08x}", Crc32(dump));
  log->debug("effective config: {}", dump);
}

/// Runs fn(i) for i in [0, n) on up to jobs threads; the first failure by
/// index is rethrown.
template <typename Fn>
void ParallelFor(std::size_t n, std::size_t jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline void WriteText(const std::filesystem::path& path, const std::string& text) {
  WriteFileBytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

// featurize -----------------------------------------------------------------

inline int Featurize(const RunConfig& rc, const Logger& log) {
  Banner(log, rc, {{"manifest", rc.manifest}, {"out", rc.out}});
  const auto entries = datasets::ReadManifest(rc.manifest);
  const std::filesystem::path out(rc.out);
  std::filesystem::create_directories(out);
  const featurize::FeatureExtractor extractor;
  const std::size_t expected = extractor.config().ExpectedSamples();
  std::vector<std::vector<std::string>> written(entries.size());
  ParallelFor(entries.size(), rc.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    auto clip = featurize::LoadWav(e.path);
    std::vector<std::pair<std::string, featurize::AudioClip>> parts;
    if (e.source == datasets::Source::kMaestroSoft && clip.samples.size() > expected) {
      std::size_t k = 0;
      for (auto& [crop, _] : datasets::CropClip(clip, {}, 0)) parts.emplace_back(datasets::CropId(e.clip_id, k++), std::move(crop));
    } else {
      parts.emplace_back(e.clip_id, featurize::FixLength(std::move(clip), expected));
    }
    for (const auto& [id, c] : parts) {
      featurize::WriteFeatureCache(out / (id + ".sedf"), extractor.Extract(c));
      written[i].push_back(id);
    }
  });
  std::string manifest = "clip_id\tpath\tsource\n";
  std::size_t n = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (const auto& id : written[i]) {
      manifest += fmt::format("{}\t{}.sedf\t{}\n", id, id, datasets::SourceName(entries[i].source));
      ++n;
    }
  }
  WriteText(out / "manifest.tsv", manifest);
  log->info("wrote {} feature caches to {}", n, out.string());
  return kExitOk;
}

// stats ---------------------------------------------------------------------

inline int Stats(const RunConfig& rc, const std::string& features, const Logger& log) {
  Banner(log, rc, {{"manifest", rc.manifest}, {"features", features}, {"out", rc.out}});
  const auto entries = datasets::ReadManifest(rc.manifest);
  const training::FeatureSource source(features);
  featurize::NormAccumulator acc;
  for (const auto& e : entries) {
    const auto t = source.Raw(e);
    if (t.normalized) Fail(ErrorKind::kConfig, "{}: feature cache of {} is already normalized", rc.manifest, e.clip_id);
    acc.Add(t);
  }
  if (entries.empty()) Fail(ErrorKind::kConfig, "{}: manifest lists no clips", rc.manifest);
  const auto stats = acc.Finish();
  featurize::WriteNormStats(rc.out, stats);
  for (std::size_t c = 0; c < stats.channels(); ++c) {
    log->info("channel {}: mean {:.5f} std {:.5f}", c, stats.mean[c], stats.std[c]);
  }
  return kExitOk;
}

// train ---------------------------------------------------------------------

struct TrainFlags {
  std::string resume;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> steps_per_epoch;
  bool seed_given = false;
};

inline int Train(const RunConfig& rc, const TrainFlags& f, const Logger& log) {
  auto cfg = training::ReadTrainConfig(rc.config);
  if (f.seed_given) cfg.seed = rc.seed;
  if (f.epochs) cfg.epochs = *f.epochs;
  if (f.steps_per_epoch) cfg.steps_per_epoch = *f.steps_per_epoch;
  if (!rc.out.empty()) cfg.data.out_dir = rc.out;
  try {
    cfg.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kConfig, "{}: {}", rc.config, e.message());
  }
  RunConfig shown = rc;
  shown.seed = cfg.seed;
  auto effective = training::TrainConfigJson(cfg);
  effective["manifest"] = rc.manifest;
  effective["resume"] = f.resume;
  Banner(log, shown, effective, cfg);

  const auto corpus = training::LoadCorpus(cfg, datasets::ReadManifest(rc.manifest));
  log->info("training clips: weak {} unlabeled {} strong {} maestro {}", corpus.groups[0].size(),
            corpus.groups[1].size(), corpus.groups[2].size(), corpus.groups[3].size());
  const auto validation = training::LoadValidation(cfg, corpus.stats, corpus.class_map);
  std::filesystem::create_directories(cfg.data.out_dir);
  featurize::WriteNormStats(cfg.data.out_dir / kStatsFile, corpus.stats);
  WriteText(cfg.data.out_dir / "class_map.txt", corpus.class_map.Serialize());

  training::LoopOptions opts;
  opts.resume = f.resume;
  opts.log = [&](const std::string& s) { log->info("{}", s); };
  const auto reports = training::TrainLoop(cfg, corpus, validation.clip_ids.empty() ? nullptr : &validation, opts);

  std::vector<evaluate::CheckpointReport> ranked;
  for (const auto& r : reports) {
    if (r.epoch == 0 || r.scores.size() != 4) continue;
    ranked.push_back({r.checkpoint.filename().string(), static_cast<std::uint32_t>(r.epoch),
                      r.scores[training::kTeacherPsds], r.scores[training::kTeacherMpauc]});
  }
  if (!ranked.empty()) {
    std::string table = "checkpoint\tepoch\tpsds\tmpauc\n";
    for (const auto& r : evaluate::RankCheckpoints(ranked, ranked.size()).top) {
      table += fmt::format("{}\t{}\t{:.6f}\t{:.6f}\n", r.path, r.epoch, r.psds, r.mpauc);
    }
    WriteText(cfg.data.out_dir / "ranking.tsv", table);
  }
  log->info("wrote {} checkpoints to {}", reports.size(), cfg.data.out_dir.string());
  return kExitOk;
}

// predict -------------------------------------------------------------------

struct PredictFlags {
  std::string checkpoint;
  std::string features;
  std::string stats;
  std::string embeddings;
  std::string group = "teacher";
};

inline std::vector<evaluate::ScoreRecord> PredictWith(const model::Checkpoint& ck, const std::string& group,
                                                      const std::vector<datasets::ManifestEntry>& entries,
                                                      const PredictFlags& f, const featurize::NormStats& stats,
                                                      std::uint64_t seed) {
  if (!ck.HasGroup(group)) Fail(ErrorKind::kConfig, "checkpoint has no {} parameters", group);
  training::DataPaths paths;
  paths.features = f.features;
  paths.embeddings = f.embeddings;
  const auto set = training::LoadEvalSet(entries, paths, ck.config, stats, seed);
  return evaluate::PredictScores(ck.config, ck.Group(group), set.clip_ids, set.features, set.embeddings);
}

inline featurize::NormStats StatsFor(const PredictFlags& f, const std::filesystem::path& checkpoint) {
  const std::filesystem::path p = f.stats.empty() ? checkpoint.parent_path() / kStatsFile : std::filesystem::path(f.stats);
  if (!std::filesystem::exists(p)) Fail(ErrorKind::kConfig, "normalization statistics not found: {}", p.string());
  return featurize::ReadNormStats(p);
}

inline int Predict(const RunConfig& rc, const PredictFlags& f, const Logger& log) {
  Banner(log, rc,
         {{"checkpoint", f.checkpoint}, {"manifest", rc.manifest}, {"out", rc.out}, {"features", f.features},
          {"stats", f.stats}, {"embeddings", f.embeddings}, {"group", f.group}});
  const auto entries = datasets::ReadManifest(rc.manifest);
  const auto ck = model::ReadCheckpoint(f.checkpoint);
  const auto records = PredictWith(ck, f.group, entries, f, StatsFor(f, f.checkpoint), rc.seed);
  evaluate::WriteScores(rc.out, records);
  log->info("wrote {} score records to {}", records.size(), rc.out);
  return kExitOk;
}

// evaluate ------------------------------------------------------------------

struct EvaluateFlags {
  std::string scores;
  std::string refs;
  std::string soft_refs;
  std::string kind = "both";
  std::string class_map;
  std::size_t median_window = evaluate::kDefaultMedianWindow;
  std::string json_out;
  std::string rows_out;
};

inline int Evaluate(const RunConfig& rc, const EvaluateFlags& f, std::ostream& out, const Logger& log) {
  Banner(log, rc,
         {{"scores", f.scores}, {"refs", f.refs}, {"soft_refs", f.soft_refs}, {"kind", f.kind},
          {"class_map", f.class_map}, {"median_window", f.median_window}});
  const bool want_psds = f.kind != "mpauc";
  const bool want_mpauc = f.kind != "psds";
  const std::string strong_path = want_psds ? f.refs : "";
  const std::string soft_path = f.kind == "mpauc" ? f.refs : f.soft_refs;
  if (want_mpauc && soft_path.empty()) Fail(ErrorKind::kConfig, "--kind both needs --soft-refs");
  const auto class_map = training::LoadClassMap(f.class_map);
  const auto records = evaluate::ReadScores(f.scores);
  if (records.empty()) Fail(ErrorKind::kMetric, "{}: no score records", f.scores);
  const auto scores = evaluate::ScoreMap(records);
  if (records.front().scores.dim(1) != class_map.size()) {
    Fail(ErrorKind::kConfig, "{}: {} classes, class map has {}", f.scores, records.front().scores.dim(1), class_map.size());
  }
  evaluate::MetricReport report;
  report.median_window = f.median_window;
  for (std::size_t c = 0; c < class_map.size(); ++c) report.class_names.push_back(class_map.name(c));
  if (want_psds) {
    std::map<std::string, Tensor<float>> filtered;
    for (const auto& [id, s] : scores) filtered[id] = evaluate::MedianFilter(s, f.median_window);
    auto strong = datasets::ReadStrongTsv(strong_path, class_map);
    report.psds = evaluate::Psds(filtered, strong, report.psds_params);
  }
  if (want_mpauc) {
    const auto soft_all = datasets::ReadSoftTsv(soft_path, class_map);
    std::map<std::string, datasets::SoftLabelSet> soft;
    for (const auto& [id, _] : scores) {
      if (auto r = training::SoftFor(soft_all, id, class_map.size())) soft[id] = std::move(*r);
    }
    std::vector<std::size_t> classes;
    const auto mask = class_map.Mask(datasets::Vocabulary::kMaestro);
    for (std::size_t c = 0; c < mask.size(); ++c) {
      if (mask[c]) classes.push_back(c);
    }
    report.mpauc = evaluate::Mpauc(scores, soft, classes);
    for (std::size_t c : report.mpauc->excluded) log->warn("mpauc: class {} excluded (no positive or no negative segment)", class_map.name(c));
  }
  const std::string rows = report.ToRows();
  out << rows;
  if (!f.json_out.empty()) WriteText(f.json_out, report.ToJson().dump(2) + "\n");
  if (!f.rows_out.empty()) WriteText(f.rows_out, rows);
  return kExitOk;
}

// ensemble ------------------------------------------------------------------

struct EnsembleFlags {
  std::vector<std::string> inputs;
  std::string checkpoints;
  std::size_t top_k = 64;
  PredictFlags predict;
};

inline int Ensemble(const RunConfig& rc, const EnsembleFlags& f, const Logger& log) {
  Banner(log, rc,
         {{"inputs", f.inputs}, {"checkpoints", f.checkpoints}, {"top_k", f.top_k}, {"manifest", rc.manifest},
          {"out", rc.out}, {"group", f.predict.group}});
  std::vector<std::vector<evaluate::ScoreRecord>> models;
  if (!f.inputs.empty()) {
    for (const auto& p : f.inputs) models.push_back(evaluate::ReadScores(p));
  } else {
    if (f.checkpoints.empty()) Fail(ErrorKind::kConfig, "ensemble needs --inputs or --checkpoints");
    if (rc.manifest.empty()) Fail(ErrorKind::kConfig, "ensembling checkpoints needs --manifest");
    const std::filesystem::path dir(f.checkpoints);
    if (!std::filesystem::is_directory(dir)) Fail(ErrorKind::kIngest, "checkpoint directory not found: {}", dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.path().extension() == ".sedm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<evaluate::CheckpointReport> reports;
    for (const auto& p : files) {
      const auto ck = model::ReadCheckpoint(p);
      if (!ck.meta || ck.meta->epoch == 0 || ck.meta->scores.size() != 4) continue;
      reports.push_back({p.string(), ck.meta->epoch, ck.meta->scores[training::kTeacherPsds],
                         ck.meta->scores[training::kTeacherMpauc]});
    }
    if (reports.empty()) Fail(ErrorKind::kConfig, "{}: no checkpoints with validation scores", dir.string());
    const auto ranking = evaluate::RankCheckpoints(reports, f.top_k);
    if (ranking.truncated_request) log->warn("requested top {} but only {} checkpoints are ranked", f.top_k, reports.size());
    const auto entries = datasets::ReadManifest(rc.manifest);
    const auto stats = StatsFor(f.predict, files.front());
    for (const auto& r : ranking.top) {
      log->info("member {} (epoch {}, psds {:.4f}, mpauc {:.4f})", r.path, r.epoch, r.psds, r.mpauc);
      models.push_back(PredictWith(model::ReadCheckpoint(r.path), f.predict.group, entries, f.predict, stats, rc.seed));
    }
  }
  const auto avg = evaluate::EnsembleAverage(models);
  evaluate::WriteScores(rc.out, avg);
  log->info("averaged {} models over {} clips into {}", models.size(), avg.size(), rc.out);
  return kExitOk;
}

}  // namespace detail

/// Parses argv and dispatches. Exit codes: 0 success (and --help), 1 usage
/// error, 2 data or configuration error.
inline int Run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"sedkit: sound event detection toolkit", "sedkit"};
  app.require_subcommand(1);
  RunConfig rc;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", rc.seed, "Random seed (default 42)");
    sub->add_option("--jobs", rc.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--strict-determinism", rc.strict_determinism, "Fixed-order reductions (always on)");
    sub->add_option("--log-level", rc.log_level, "trace, debug, info, warn, error (default: SEDKIT_LOG or info)");
  };

  auto* featurize = app.add_subcommand("featurize", "Extract 3-channel features for a manifest of WAV files");
  featurize->add_option("--manifest", rc.manifest, "Manifest TSV (clip_id, path, source)")->required();
  featurize->add_option("--out", rc.out, "Output directory for .sedf caches and manifest.tsv")->required();
  common(featurize);

  std::string stats_features;
  auto* stats = app.add_subcommand("stats", "Compute per-channel normalization statistics");
  stats->add_option("--manifest", rc.manifest, "Manifest of featurized clips")->required();
  stats->add_option("--features", stats_features, "Directory holding <clip_id>.sedf");
  stats->add_option("--out", rc.out, "Output .sedn file")->required();
  common(stats);

  detail::TrainFlags tf;
  std::size_t epochs = 0, steps = 0;
  auto* train = app.add_subcommand("train", "Train a mean-teacher model");
  train->add_option("--config", rc.config, "Training config (JSON)")->required();
  train->add_option("--data", rc.manifest, "Training manifest")->required();
  train->add_option("--resume", tf.resume, "Checkpoint to resume from");
  train->add_option("--out", rc.out, "Checkpoint directory (overrides the config)");
  auto* epochs_opt = train->add_option("--epochs", epochs, "Override the number of epochs");
  auto* steps_opt = train->add_option("--steps-per-epoch", steps, "Override steps per epoch");
  common(train);

  detail::PredictFlags pf;
  auto* predict = app.add_subcommand("predict", "Write frame-level scores for a manifest");
  predict->add_option("--checkpoint", pf.checkpoint, "SEDM checkpoint")->required();
  predict->add_option("--manifest", rc.manifest, "Manifest of clips to score")->required();
  predict->add_option("--out", rc.out, "Output SEDS score file")->required();
  predict->add_option("--features", pf.features, "Directory of cached features");
  predict->add_option("--stats", pf.stats, "Normalization stats (default: next to the checkpoint)");
  predict->add_option("--embeddings", pf.embeddings, "Directory of <clip_id>.sede embeddings");
  predict->add_option("--group", pf.group, "Parameter group")->check(CLI::IsMember({"teacher", "student"}));
  common(predict);

  detail::EvaluateFlags ef;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions with PSDS and/or mpauc");
  evaluate->add_option("--scores", ef.scores, "SEDS score file")->required();
  evaluate->add_option("--refs", ef.refs, "Strong TSV (psds, both) or soft TSV (mpauc)")->required();
  evaluate->add_option("--soft-refs", ef.soft_refs, "Soft TSV for mpauc with --kind both");
  evaluate->add_option("--kind", ef.kind, "psds, mpauc or both")->check(CLI::IsMember({"psds", "mpauc", "both"}));
  evaluate->add_option("--class-map", ef.class_map, "Class map file (default: built-in 25 classes)");
  evaluate->add_option("--median-window", ef.median_window, "Median filter window in frames (odd)");
  evaluate->add_option("--json", ef.json_out, "Write the report as JSON");
  evaluate->add_option("--rows", ef.rows_out, "Write metric/class/value rows");
  common(evaluate);

  detail::EnsembleFlags nf;
  auto* ensemble = app.add_subcommand("ensemble", "Average score files or the top-k checkpoints");
  ensemble->add_option("--inputs", nf.inputs, "SEDS score files");
  ensemble->add_option("--checkpoints", nf.checkpoints, "Directory of checkpoints to rank");
  ensemble->add_option("--top-k", nf.top_k, "Number of checkpoints to average");
  ensemble->add_option("--manifest", rc.manifest, "Manifest to score with --checkpoints");
  ensemble->add_option("--features", nf.predict.features, "Directory of cached features");
  ensemble->add_option("--stats", nf.predict.stats, "Normalization stats");
  ensemble->add_option("--embeddings", nf.predict.embeddings, "Directory of embeddings");
  ensemble->add_option("--out", rc.out, "Output SEDS score file")->required();
  common(ensemble);

  std::vector<const char*> argv = {"sedkit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  rc.subcommand = app.get_subcommands().front()->get_name();
  auto log = detail::MakeLogger(err, rc.log_level);
  try {
    if (rc.subcommand == "featurize") return detail::Featurize(rc, log);
    if (rc.subcommand == "stats") return detail::Stats(rc, stats_features, log);
    if (rc.subcommand == "train") {
      tf.seed_given = train->count("--seed") > 0;
      if (epochs_opt->count()) tf.epochs = epochs;
      if (steps_opt->count()) tf.steps_per_epoch = steps;
      return detail::Train(rc, tf, log);
    }
    if (rc.subcommand == "predict") return detail::Predict(rc, pf, log);
    if (rc.subcommand == "evaluate") return detail::Evaluate(rc, ef, out, log);
    if (rc.subcommand == "ensemble") return detail::Ensemble(rc, nf, log);
  } catch (const Error& e) {
    log->error("{}", e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    log->error("file system error: {}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kExitData;
  }
  return kExitUsage;
}

inline int Run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return Run(args);
}

}  // namespace sedkit::cli
