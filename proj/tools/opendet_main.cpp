// Copyright 2026 opendet contributors
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

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "opendet/detmetrics.hpp"
#include "opendet/discovery.hpp"
#include "opendet/error.hpp"
#include "opendet/io.hpp"
#include "opendet/memory.hpp"
#include "opendet/task_splits.hpp"
#include "opendet/trainer.hpp"

namespace {

using opendet::Error;
using opendet::ErrorKind;

struct KRange {
  int k_min = 2;
  int k_max = 10;
};

KRange parse_k_range(const std::string& text) {
  KRange range;
  char colon = 0;
  std::istringstream in(text);
  if (!(in >> range.k_min >> colon >> range.k_max) || colon != ':' || !in.eof() ||
      range.k_min < 1 || range.k_max < range.k_min) {
    throw Error(ErrorKind::kConfigError, "--k-range must be MIN:MAX with 1 <= MIN <= MAX");
  }
  return range;
}

/// Ingests detections + embeddings for one task and fills the dual memory.
opendet::MemoryBuffer load_buffer(const std::string& detections_path,
                                  const std::string& embeddings_path, int task_id,
                                  double score_floor) {
  const opendet::TaskSplit split = opendet::load_task_split(task_id);
  const auto detections = opendet::io::ingest_detections(detections_path, score_floor, split);
  const auto embeddings = opendet::io::ingest_embeddings(embeddings_path);
  return opendet::store_predictions(opendet::MemoryBuffer(), detections, embeddings);
}

/// Splits the buffer into discovery inputs, optionally re-encoding every
/// vector through a trained head checkpoint.
void buffer_to_discovery_inputs(const opendet::MemoryBuffer& buffer,
                                const std::string& head_path,
                                std::vector<opendet::discovery::LabeledEmbedding>& known,
                                std::vector<opendet::Vec>& working,
                                std::vector<std::string>& working_ids) {
  const bool encode = !head_path.empty();
  opendet::trainer::ProjectionHead head;
  if (encode) head = opendet::trainer::load_head(head_path);

  for (const opendet::MemoryEntry& e : buffer.known()) {
    known.push_back({e.object.tag.id, encode
                                          ? opendet::trainer::encode_one(head, e.embedding.vector)
                                          : e.embedding.vector});
  }
  for (const opendet::MemoryEntry& e : buffer.working()) {
    working.push_back(encode ? opendet::trainer::encode_one(head, e.embedding.vector)
                             : e.embedding.vector);
    working_ids.push_back(e.object.object_id);
  }
}

int run(int argc, char** argv) {
  CLI::App app{"open-set detection evaluation and novel category discovery toolkit"};
  app.require_subcommand(1);

  // --- synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark");
  opendet::io::SynthConfig synth_cfg;
  std::string synth_out_dir;
  int synth_informative = 0;  // 0 -> same as --dim
  synth->add_option("--out-dir", synth_out_dir, "output directory")->required();
  synth->add_option("--task", synth_cfg.task_id, "task split id (1-3)");
  synth->add_option("--known", synth_cfg.n_known_classes, "known classes");
  synth->add_option("--novel", synth_cfg.n_novel_classes, "novel classes");
  synth->add_option("--samples", synth_cfg.samples_per_class, "samples per class");
  synth->add_option("--dim", synth_cfg.dim, "feature dimension");
  synth->add_option("--informative", synth_informative,
                    "informative dimensions (default: all)");
  synth->add_option("--separation", synth_cfg.cluster_separation,
                    "pairwise class-mean separation in noise sigmas");
  synth->add_option("--miss", synth_cfg.detector_miss_rate, "detector miss rate");
  synth->add_option("--confusion", synth_cfg.detector_confusion_rate,
                    "unknown-as-known confusion rate");
  synth->add_option("--seed", synth_cfg.seed, "random seed");

  // --- eval-det ------------------------------------------------------------
  auto* eval_det = app.add_subcommand("eval-det", "score detections against ground truth");
  std::string ed_gt, ed_det, ed_out, ed_format = "text";
  int ed_task = 1;
  double ed_iou = 0.5, ed_floor = 0.05;
  eval_det->add_option("--gt", ed_gt, "ground-truth JSONL")->required();
  eval_det->add_option("--detections", ed_det, "detections JSONL")->required();
  eval_det->add_option("--task", ed_task, "task split id (1-3)");
  eval_det->add_option("--iou", ed_iou, "IoU match threshold");
  eval_det->add_option("--score-floor", ed_floor, "drop detections scored below this");
  eval_det->add_option("--format", ed_format, "report format: json or text");
  eval_det->add_option("--out", ed_out, "also write the report to this path");

  // --- train-embed ---------------------------------------------------------
  auto* train_embed = app.add_subcommand("train-embed", "fit the projection head");
  std::string te_det, te_emb, te_out;
  int te_task = 1, te_dim = 256;
  double te_floor = 0.05;
  opendet::trainer::TrainConfig te_cfg;
  train_embed->add_option("--detections", te_det, "detections JSONL")->required();
  train_embed->add_option("--embeddings", te_emb, "embeddings JSONL")->required();
  train_embed->add_option("--out", te_out, "head checkpoint path")->required();
  train_embed->add_option("--task", te_task, "task split id (1-3)");
  train_embed->add_option("--dim", te_dim, "embedding (output) dimension");
  train_embed->add_option("--tau", te_cfg.temperature, "contrastive temperature");
  train_embed->add_option("--epochs", te_cfg.epochs, "training epochs");
  train_embed->add_option("--lr", te_cfg.learning_rate, "learning rate");
  train_embed->add_option("--sgd-momentum", te_cfg.sgd_momentum, "SGD momentum");
  train_embed->add_option("--key-momentum", te_cfg.key_momentum, "key encoder momentum");
  train_embed->add_option("--batch", te_cfg.batch_size, "batch size");
  train_embed->add_option("--queue", te_cfg.queue_capacity, "key queue capacity");
  train_embed->add_option("--mix-alpha", te_cfg.mix_alpha, "Beta mixing parameter");
  train_embed->add_option("--seed", te_cfg.seed, "random seed");
  train_embed->add_option("--score-floor", te_floor, "drop detections scored below this");

  // --- estimate-k ----------------------------------------------------------
  auto* estimate_k = app.add_subcommand("estimate-k", "estimate the novel category count");
  std::string ek_det, ek_emb, ek_head, ek_range = "2:10", ek_format = "text";
  int ek_task = 1;
  double ek_floor = 0.05;
  std::uint64_t ek_seed = 0;
  estimate_k->add_option("--detections", ek_det, "detections JSONL")->required();
  estimate_k->add_option("--embeddings", ek_emb, "embeddings JSONL")->required();
  estimate_k->add_option("--task", ek_task, "task split id (1-3)");
  estimate_k->add_option("--k-range", ek_range, "search range MIN:MAX");
  estimate_k->add_option("--head", ek_head, "optional head checkpoint to encode with");
  estimate_k->add_option("--seed", ek_seed, "random seed");
  estimate_k->add_option("--score-floor", ek_floor, "drop detections scored below this");
  estimate_k->add_option("--format", ek_format, "output format: json or text");

  // --- discover ------------------------------------------------------------
  auto* discover = app.add_subcommand("discover", "cluster working memory into categories");
  std::string dc_det, dc_emb, dc_head, dc_out, dc_centroids;
  int dc_task = 1, dc_k = 0;
  double dc_floor = 0.05;
  std::uint64_t dc_seed = 0;
  discover->add_option("--detections", dc_det, "detections JSONL")->required();
  discover->add_option("--embeddings", dc_emb, "embeddings JSONL")->required();
  discover->add_option("--k", dc_k, "novel category count")->required();
  discover->add_option("--out", dc_out, "assignments JSONL path")->required();
  discover->add_option("--centroids", dc_centroids, "centroid sidecar path")->required();
  discover->add_option("--task", dc_task, "task split id (1-3)");
  discover->add_option("--head", dc_head, "optional head checkpoint to encode with");
  discover->add_option("--seed", dc_seed, "random seed");
  discover->add_option("--score-floor", dc_floor, "drop detections scored below this");

  // --- pipeline ------------------------------------------------------------
  auto* pipeline = app.add_subcommand("pipeline", "full evaluation + discovery run");
  std::string pl_gt, pl_det, pl_emb, pl_out_dir, pl_range = "2:10", pl_format = "json";
  opendet::io::PipelineConfig pl_cfg;
  pipeline->add_option("--gt", pl_gt, "ground-truth JSONL")->required();
  pipeline->add_option("--detections", pl_det, "detections JSONL")->required();
  pipeline->add_option("--embeddings", pl_emb, "embeddings JSONL")->required();
  pipeline->add_option("--out-dir", pl_out_dir, "output directory")->required();
  pipeline->add_option("--task", pl_cfg.task_id, "task split id (1-3)");
  pipeline->add_option("--iou", pl_cfg.iou_threshold, "IoU match threshold");
  pipeline->add_option("--score-floor", pl_cfg.score_floor, "drop detections scored below this");
  pipeline->add_option("--dim", pl_cfg.embed_dim, "embedding (output) dimension");
  pipeline->add_option("--tau", pl_cfg.train.temperature, "contrastive temperature");
  pipeline->add_option("--epochs", pl_cfg.train.epochs, "training epochs");
  pipeline->add_option("--lr", pl_cfg.train.learning_rate, "learning rate");
  pipeline->add_option("--sgd-momentum", pl_cfg.train.sgd_momentum, "SGD momentum");
  pipeline->add_option("--key-momentum", pl_cfg.train.key_momentum, "key encoder momentum");
  pipeline->add_option("--batch", pl_cfg.train.batch_size, "batch size");
  pipeline->add_option("--queue", pl_cfg.train.queue_capacity, "key queue capacity");
  pipeline->add_option("--mix-alpha", pl_cfg.train.mix_alpha, "Beta mixing parameter");
  pipeline->add_option("--k", pl_cfg.k_novel, "novel category count (omit to estimate)");
  pipeline->add_option("--k-range", pl_range, "estimation range MIN:MAX");
  pipeline->add_flag("--eval-all-working", pl_cfg.eval_all_working,
                     "cluster-score every localized working object, not only "
                     "one-to-one matches");
  pipeline->add_option("--seed", pl_cfg.seed, "random seed");
  pipeline->add_option("--format", pl_format, "report file format: json or text");

  // --- report --------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "re-render a stored JSON report");
  std::string rp_in, rp_out, rp_format = "text";
  report_cmd->add_option("--in", rp_in, "report JSON path")->required();
  report_cmd->add_option("--format", rp_format, "output format: json or text");
  report_cmd->add_option("--out", rp_out, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (synth->parsed()) {
    if (synth_informative > 0) {
      synth_cfg.informative_dims = synth_informative;
    } else {
      synth_cfg.informative_dims = synth_cfg.dim;
    }
    std::filesystem::create_directories(synth_out_dir);
    opendet::io::SynthFiles files;
    files.gt_path = synth_out_dir + "/gt.jsonl";
    files.detections_path = synth_out_dir + "/detections.jsonl";
    files.embeddings_path = synth_out_dir + "/embeddings.jsonl";
    opendet::io::synth_generate(synth_cfg, files);
    std::cout << "wrote " << files.gt_path << "\n"
              << "wrote " << files.detections_path << "\n"
              << "wrote " << files.embeddings_path << "\n";
    return 0;
  }

  if (eval_det->parsed()) {
    const opendet::TaskSplit split = opendet::load_task_split(ed_task);
    const opendet::io::GroundTruth gt = opendet::io::ingest_ground_truth(ed_gt, split);
    const auto detections = opendet::io::ingest_detections(ed_det, ed_floor, split);

    std::vector<opendet::ObjectRecord> gt_unknown;
    for (const opendet::ObjectRecord& rec : gt.records) {
      if (rec.tag.is_unknown()) gt_unknown.push_back(rec);
    }
    opendet::io::MetricReport report;
    report.task_id = ed_task;
    const auto counts = opendet::detmetrics::match_unknown(detections, gt_unknown, ed_iou);
    std::tie(report.udr, report.udp) = opendet::detmetrics::udr_udp(counts);
    std::tie(report.map_previous, report.map_current) =
        opendet::detmetrics::mean_ap(detections, gt.records, split, ed_iou);
    report.n_gt_unknown = gt_unknown.size();
    report.n_gt_known = gt.records.size() - gt_unknown.size();
    report.n_detections = detections.size();
    report.config.task_id = ed_task;
    report.config.iou_threshold = ed_iou;
    report.config.score_floor = ed_floor;

    std::cout << opendet::io::render_report(report, ed_format);
    if (!ed_out.empty()) opendet::io::emit_report(report, ed_format, ed_out);
    return 0;
  }

  if (train_embed->parsed()) {
    const opendet::MemoryBuffer buffer = load_buffer(te_det, te_emb, te_task, te_floor);
    const auto head = opendet::trainer::init_head(
        static_cast<std::size_t>(buffer.dim()), static_cast<std::size_t>(te_dim), te_cfg.seed);
    const auto [trained, stats] = opendet::trainer::train(head, buffer, te_cfg);
    opendet::trainer::save_head(trained, te_out);
    for (std::size_t e = 0; e < stats.epoch_mean_loss.size(); ++e) {
      std::cout << "epoch " << (e + 1) << " mean loss " << stats.epoch_mean_loss[e] << "\n";
    }
    std::cout << "wrote " << te_out << "\n";
    return 0;
  }

  if (estimate_k->parsed()) {
    const KRange range = parse_k_range(ek_range);
    const opendet::MemoryBuffer buffer = load_buffer(ek_det, ek_emb, ek_task, ek_floor);
    std::vector<opendet::discovery::LabeledEmbedding> known;
    std::vector<opendet::Vec> working;
    std::vector<std::string> working_ids;
    buffer_to_discovery_inputs(buffer, ek_head, known, working, working_ids);

    const opendet::discovery::KEstimate estimate =
        opendet::discovery::estimate_class_number(known, working, range.k_min,
                                                  range.k_max, ek_seed);
    if (ek_format == "json") {
      std::ostringstream scores;
      scores << "{";
      bool first = true;
      for (const auto& [k, score] : estimate.scores_per_k) {
        scores << (first ? "" : ",") << "\"" << k << "\":" << score;
        first = false;
      }
      scores << "}";
      std::cout << "{\"k_est\":" << estimate.k_est << ",\"k_max\":" << range.k_max
                << ",\"k_min\":" << range.k_min << ",\"scores\":" << scores.str() << "}\n";
    } else {
      std::cout << "k_est " << estimate.k_est << " (searched " << range.k_min << ".."
                << range.k_max << ")\n";
      for (const auto& [k, score] : estimate.scores_per_k) {
        std::cout << "  k=" << k << " score=" << score << "\n";
      }
    }
    return 0;
  }

  if (discover->parsed()) {
    const opendet::MemoryBuffer buffer = load_buffer(dc_det, dc_emb, dc_task, dc_floor);
    std::vector<opendet::discovery::LabeledEmbedding> known;
    std::vector<opendet::Vec> working;
    std::vector<std::string> working_ids;
    buffer_to_discovery_inputs(buffer, dc_head, known, working, working_ids);

    const opendet::discovery::DiscoveryResult result = opendet::discovery::constrained_kmeans(
        known, working, working_ids, dc_k, dc_seed);
    opendet::io::write_discovery(result, dc_out, dc_centroids);
    std::cout << "assigned " << result.assignments.size() << " objects to " << dc_k
              << " categories in " << result.iterations_run << " iterations (inertia "
              << result.inertia << ")\n"
              << "wrote " << dc_out << "\n"
              << "wrote " << dc_centroids << "\n";
    return 0;
  }

  if (pipeline->parsed()) {
    const KRange range = parse_k_range(pl_range);
    pl_cfg.k_min = range.k_min;
    pl_cfg.k_max = range.k_max;
    if (pl_format != "json" && pl_format != "text") {
      throw Error(ErrorKind::kConfigError, "--format must be json or text");
    }
    std::filesystem::create_directories(pl_out_dir);

    const opendet::io::PipelineResult result =
        opendet::io::run_pipeline(pl_gt, pl_det, pl_emb, pl_cfg);

    const std::string predictions_path = pl_out_dir + "/predictions.jsonl";
    const std::string report_path =
        pl_out_dir + (pl_format == "json" ? "/report.json" : "/report.txt");
    opendet::io::write_predictions(result.predictions, predictions_path);
    opendet::io::emit_report(result.report, pl_format, report_path);

    std::cout << opendet::io::render_report(result.report, "text");
    std::cout << "  wall time: " << result.report.wall_time_seconds << "s\n"
              << "wrote " << predictions_path << "\n"
              << "wrote " << report_path << "\n";
    return 0;
  }

  // report re-rendering
  const opendet::io::MetricReport report = opendet::io::read_report(rp_in);
  if (rp_out.empty()) {
    std::cout << opendet::io::render_report(report, rp_format);
  } else {
    opendet::io::emit_report(report, rp_format, rp_out);
    std::cout << "wrote " << rp_out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error [" << opendet::error_kind_name(e.kind()) << "] " << e.what() << "\n";
    return opendet::is_input_error(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
