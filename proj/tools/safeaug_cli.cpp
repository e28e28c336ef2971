// Copyright 2026 The SafeAug Authors
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

// Command-line front end: ingest -> augment -> baselines -> split -> eval / stats.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "safeaug/safeaug.hpp"

namespace fs = std::filesystem;
using namespace safeaug;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitPartial = 3;
constexpr const char* kConfigEnv = "SAFEAUG_CONFIG";

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<unsigned> jobs;
  std::string log_level = "info";
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, std::string("Config file (default: $") + kConfigEnv + ")");
  cmd->add_option("--set", opts.overrides, "Override a config key, e.g. --set augment.body_length=4.0");
  cmd->add_option("-j,--jobs", opts.jobs, "Worker threads (0 = all cores)");
  cmd->add_option("--log-level", opts.log_level, "debug | info | warn | error")
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}));
}

RunConfig load_run_config(const CommonOptions& opts) {
  RunConfig config;
  std::string path = opts.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv); env != nullptr) path = env;
  }
  if (!path.empty()) config = parse_config(read_text_file(path));
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kInvalidConfig, "--set expects key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opts.jobs) config.jobs = *opts.jobs;
  config.validate();
  config.propagate();
  return config;
}

DatasetManifest load_manifests(const std::vector<std::string>& paths) {
  DatasetManifest merged = load_manifest(paths.at(0));
  for (std::size_t i = 1; i < paths.size(); ++i) {
    const auto extra = load_manifest(paths[i]);
    for (const auto& r : extra.records) {
      const auto* existing = merged.find(r.frame_id);
      if (existing == nullptr) {
        merged.records.push_back(r);
      } else if (!(*existing == r)) {
        throw Error(ErrorCode::kInvalidManifest, "conflicting definitions of " + r.frame_id);
      }
    }
  }
  validate(merged);
  return merged;
}

fs::path output_path(const std::string& explicit_path, const RunConfig& config, const char* default_name) {
  return explicit_path.empty() ? fs::path(config.output_root) / default_name : fs::path(explicit_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety-critical driving data augmentation"};
  app.require_subcommand(1);

  CommonOptions common;

  std::string root;
  std::string out;
  std::vector<std::string> manifests;
  std::string split_path;
  std::string predictions_path;
  std::string report_path;
  std::string variant = "all";
  std::optional<double> quantile;
  std::optional<std::size_t> bins;
  std::size_t synth_frames = 300;
  std::uint64_t synth_seed = 1;

  auto* ingest = app.add_subcommand("ingest", "Build a manifest from a KITTI-raw style corpus");
  ingest->add_option("root", root, "Corpus root (defaults to run.corpus_root)");
  ingest->add_option("-o,--out", out, "Manifest path (default <output_root>/manifest.jsonl)");

  auto* augment = app.add_subcommand("augment", "Move the lead vehicle closer in candidate frames");
  augment->add_option("-m,--manifest", manifests, "Input manifest")->required()->expected(1);
  augment->add_option("-o,--out-dir", out, "Output directory (default run.output_root)");

  auto* smogn = app.add_subcommand("baseline-smogn", "Append SMOGN synthetic records");
  auto* importance = app.add_subcommand("baseline-importance", "Append importance-resampled records");
  for (auto* cmd : {smogn, importance}) {
    cmd->add_option("-m,--manifest", manifests, "Input manifest")->required()->expected(1);
    cmd->add_option("-o,--out", out, "Output manifest");
  }

  auto* split = app.add_subcommand("split", "Mark the safety-critical subset of the original frames");
  split->add_option("-m,--manifest", manifests, "Input manifest")->required()->expected(1);
  split->add_option("-q,--quantile", quantile, "Critical fraction (default eval.quantile)");
  split->add_option("-o,--out", out, "Split file (default <output_root>/split.json)");

  auto* eval = app.add_subcommand("eval", "Compare training variants, or score an external predictions CSV");
  eval->add_option("-m,--manifest", manifests, "Manifest(s); records are merged")->required();
  eval->add_option("-s,--split", split_path, "Split file (default: computed from the originals)");
  eval->add_option("-p,--predictions", predictions_path, "Score this frame_id,prediction CSV instead of fitting");
  eval->add_option("-o,--out", out, "Metric report (default <output_root>/metrics.json)");

  auto* stats = app.add_subcommand("stats", "Acceleration histogram as bin_center,count CSV");
  stats->add_option("-m,--manifest", manifests, "Input manifest")->required()->expected(1);
  stats->add_option("-b,--bins", bins, "Bin count (default eval.hist_bins)");
  stats->add_option("--variant", variant, "all | original | ours | smogn | importance");
  stats->add_option("-o,--out", out, "CSV path (default <output_root>/accel_hist.csv)");

  auto* synth = app.add_subcommand("synth", "Write a synthetic car-following corpus for testing");
  synth->add_option("-o,--out-dir", out, "Corpus root")->required();
  synth->add_option("-n,--frames", synth_frames, "Frame count");
  synth->add_option("--seed", synth_seed, "Generator seed");

  for (auto* cmd : {ingest, augment, smogn, importance, split, eval, stats, synth}) add_common(cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  min_log_level() = parse_log_level(common.log_level);
  try {
    auto config = load_run_config(common);

    if (ingest->parsed()) {
      const fs::path corpus = root.empty() ? fs::path(config.corpus_root) : fs::path(root);
      if (corpus.empty()) throw Error(ErrorCode::kInvalidConfig, "no corpus root given");
      const auto manifest = build_manifest(corpus, config.ingest);
      const auto path = output_path(out, config, "manifest.jsonl");
      save_manifest(path, manifest);
      std::size_t eligible = 0;
      for (const auto& r : manifest.records) eligible += r.augmentation_eligible() ? 1 : 0;
      LogLine("info", "ingest").kv("records", manifest.records.size()).kv("eligible", eligible).kv("out", path);
      return kExitOk;
    }

    if (augment->parsed()) {
      const auto manifest = load_manifest(manifests.at(0));
      const fs::path out_dir = out.empty() ? fs::path(config.output_root) : fs::path(out);
      const auto result = augment_dataset(manifest, config.augment, out_dir);
      save_manifest(out_dir / "manifest.jsonl", result.manifest);
      write_file_atomic(out_dir / "augment_report.json", result.report.to_json().dump(2) + '\n');
      LogLine("info", "augment")
          .kv("candidates", result.report.candidates.size())
          .kv("augmented", result.report.augmented.size())
          .kv("skipped", result.report.skipped.size());
      return result.report.skipped.empty() ? kExitOk : kExitPartial;
    }

    if (smogn->parsed() || importance->parsed()) {
      const auto manifest = load_manifest(manifests.at(0));
      DatasetManifest result;
      if (smogn->parsed()) {
        result = add_smogn_baseline(manifest, config.resample.smogn, config.eval);
      } else {
        result = add_importance_baseline(manifest, config.resample.importance_bins,
                                         config.resample.importance_out_size, config.seed, config.eval);
      }
      const auto path = output_path(out, config, smogn->parsed() ? "manifest_smogn.jsonl" : "manifest_importance.jsonl");
      save_manifest(path, result);
      LogLine("info", smogn->parsed() ? "baseline_smogn" : "baseline_importance")
          .kv("added", result.records.size() - manifest.records.size())
          .kv("out", path);
      return kExitOk;
    }

    if (split->parsed()) {
      const auto manifest = load_manifest(manifests.at(0));
      const auto result = original_split(manifest, quantile.value_or(config.eval.quantile));
      const auto path = output_path(out, config, "split.json");
      write_file_atomic(path, serialize_split(result));
      LogLine("info", "split").kv("critical", result.critical.size()).kv("general", result.general.size());
      return kExitOk;
    }

    if (eval->parsed()) {
      const auto manifest = load_manifests(manifests);
      const auto split_result =
          split_path.empty() ? original_split(manifest, config.eval.quantile) : parse_split(read_text_file(split_path));
      const auto path = output_path(out, config, "metrics.json");
      if (!predictions_path.empty()) {
        const auto preds = parse_predictions_csv(read_text_file(predictions_path));
        auto j = nlohmann::ordered_json::array();
        for (const auto& report : evaluate_predictions(manifest, split_result, preds, config.eval)) {
          j.push_back(report.to_json());
        }
        write_file_atomic(path, j.dump(2) + '\n');
      } else {
        const auto rows = run_comparison(manifest, split_result, config.eval);
        write_file_atomic(path, comparison_json(rows));
        for (const auto& row : rows) {
          LogLine("info", "eval")
              .kv("method", to_string(row.variant))
              .kv("critical_rmse", row.critical.rmse)
              .kv("critical_mae", row.critical.mae)
              .kv("complete_rmse", row.complete.rmse)
              .kv("complete_mae", row.complete.mae);
        }
      }
      return kExitOk;
    }

    if (stats->parsed()) {
      const auto manifest = load_manifest(manifests.at(0));
      std::vector<FrameRecord> selected;
      if (variant == "all") {
        selected = manifest.records;
      } else {
        for (const auto* r : variant_records(manifest, variant_from_string(variant))) selected.push_back(*r);
      }
      const auto n_bins = bins.value_or(config.eval.hist_bins);
      const auto counts = accel_histogram(selected, n_bins, config.eval.hist_min, config.eval.hist_max);
      write_file_atomic(output_path(out, config, "accel_hist.csv"),
                        histogram_csv(counts, config.eval.hist_min, config.eval.hist_max));
      return kExitOk;
    }

    if (synth->parsed()) {
      synthetic::CorpusSpec spec;
      spec.frames = synth_frames;
      spec.seed = synth_seed;
      synthetic::write_corpus(out, spec);
      LogLine("info", "synth").kv("frames", synth_frames).kv("out", out);
      return kExitOk;
    }
  } catch (const Error& e) {
    LogLine("error", "failed").kv("code", to_string(e.code())).kv("message", '"' + std::string(e.what()) + '"');
    std::cerr << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
