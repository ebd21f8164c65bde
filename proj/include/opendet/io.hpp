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

#ifndef OPENDET_IO_HPP_
#define OPENDET_IO_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opendet/discovery.hpp"
#include "opendet/trainer.hpp"
#include "opendet/types.hpp"

namespace opendet::io {

/// Desk-scale surrogate benchmark: Gaussian class blobs in feature space with
/// a simulated detector in front of them.
struct SynthConfig {
  int task_id = 1;             // which class split names the classes
  int n_known_classes = 3;     // drawn from the split's known names
  int n_novel_classes = 4;     // drawn from the split's unknown names
  int samples_per_class = 200;
  int dim = 32;
  int informative_dims = 32;   // class means live here; the rest is noise
  double cluster_separation = 6.0;  // pairwise mean distance, in noise sigmas
  double detector_miss_rate = 0.0;
  double detector_confusion_rate = 0.0;  // unknown tagged as a known class
  std::uint64_t seed = 0;
};

struct SynthFiles {
  std::string gt_path;
  std::string detections_path;
  std::string embeddings_path;
};

/// Writes ground truth, simulated detections, and per-detection embeddings.
/// Byte-identical output for identical configs.
void synth_generate(const SynthConfig& cfg, const SynthFiles& out);

/// Ground-truth records plus the canonical class id of every object,
/// including the ones whose records only carry the anonymous Unknown tag.
struct GroundTruth {
  std::vector<ObjectRecord> records;
  std::map<std::string, int> class_by_object;
};

GroundTruth ingest_ground_truth(const std::string& path, const TaskSplit& split);

/// Reads detections, dropping entries scored below score_floor. Known-tagged
/// lines must name one of the split's known classes.
std::vector<ObjectRecord> ingest_detections(const std::string& path,
                                            double score_floor,
                                            const TaskSplit& split);

/// Reads an embedding file; with expected_dim > 0 the header must agree.
std::vector<EmbeddingRecord> ingest_embeddings(const std::string& path,
                                               int expected_dim = 0);

/// Everything needed to rerun the pipeline, echoed into the report.
struct ReportConfig {
  int task_id = 1;
  double iou_threshold = 0.5;
  double score_floor = 0.05;
  int embed_dim = 256;
  double temperature = 1.0;
  int epochs = 10;
  double learning_rate = 0.015;
  double sgd_momentum = 0.9;
  double key_momentum = 0.999;
  int batch_size = 64;
  std::size_t queue_capacity = 4096;
  double mix_alpha = 1.0;
  int k_requested = 0;  // 0 means the category count was estimated
  int k_min = 2;
  int k_max = 10;
  bool eval_all_working = false;
  std::uint64_t seed = 0;
};

struct MetricReport {
  int task_id = 0;
  std::optional<double> udr;
  std::optional<double> udp;
  std::optional<double> map_previous;
  std::optional<double> map_current;
  std::optional<double> acc;
  std::optional<double> nmi;
  std::optional<double> purity;
  int k_est = 0;  // novel category count actually used
  std::size_t n_gt_known = 0;
  std::size_t n_gt_unknown = 0;
  std::size_t n_detections = 0;
  std::size_t n_working = 0;
  ReportConfig config;
  // Measured per run and printed to the console only; never serialized, so
  // emitted reports stay byte-stable across reruns.
  double wall_time_seconds = 0.0;
};

struct PipelineConfig {
  int task_id = 1;
  double iou_threshold = 0.5;
  double score_floor = 0.05;
  int embed_dim = 256;  // projection head output width
  trainer::TrainConfig train;
  int k_novel = 0;  // 0 -> estimate over [k_min, k_max]
  int k_min = 2;
  int k_max = 10;
  bool eval_all_working = false;
  std::uint64_t seed = 0;
};

struct PipelineResult {
  MetricReport report;
  std::vector<ObjectRecord> predictions;  // detections, unknowns re-tagged
  discovery::DiscoveryResult discovery;
  trainer::TrainStats train_stats;
};

/// Full second-stage run: ingest, fill memory, train the head, encode, pick
/// or estimate the category count, cluster working memory, re-tag unknown
/// detections, and score everything. Errors carry the failing stage's name.
PipelineResult run_pipeline(const std::string& gt_path,
                            const std::string& detections_path,
                            const std::string& embeddings_path,
                            const PipelineConfig& cfg);

/// Detections with their final tags, one JSONL line per record, input order.
void write_predictions(const std::vector<ObjectRecord>& predictions,
                       const std::string& path);

/// Canonical serialization: "json" has sorted keys and 6-decimal floats with
/// null for undefined metrics; "text" is an aligned table with n/a.
std::string render_report(const MetricReport& report, const std::string& format);
void emit_report(const MetricReport& report, const std::string& format,
                 const std::string& path);

/// Reads back a JSON report produced by emit_report.
MetricReport read_report(const std::string& path);

/// Assignments as JSONL lines {"object_id","novel_category"} in id order,
/// plus a one-line sidecar {"centroids":[[...]]}.
void write_discovery(const discovery::DiscoveryResult& result,
                     const std::string& assignments_path,
                     const std::string& centroids_path);

}  // namespace opendet::io

#endif  // OPENDET_IO_HPP_
