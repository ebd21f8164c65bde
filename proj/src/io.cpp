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

#include "opendet/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "opendet/clustmetrics.hpp"
#include "opendet/detmetrics.hpp"
#include "opendet/error.hpp"
#include "opendet/memory.hpp"
#include "opendet/rng.hpp"
#include "opendet/task_splits.hpp"

namespace opendet::io {

namespace {

using nlohmann::json;

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open for reading: " + path);
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot open for writing: " + path);
  return out;
}

json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError,
                path + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

/// Reads and validates the {"version":1,...} header line.
json read_header(std::ifstream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kSchemaMismatch, path + ": missing header line");
  }
  const json header = parse_line(line, path, 1);
  if (!header.is_object() || header.value("version", 0) != 1) {
    throw Error(ErrorKind::kSchemaMismatch, path + ": unsupported schema version");
  }
  return header;
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorKind::kParseError, where + ": missing string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

BoundingBox require_box(const json& j, const std::string& where) {
  if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4) {
    throw Error(ErrorKind::kParseError, where + ": bbox must be [x,y,w,h]");
  }
  BoundingBox box;
  double* fields[4] = {&box.x, &box.y, &box.w, &box.h};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j["bbox"][i].is_number()) {
      throw Error(ErrorKind::kParseError, where + ": bbox entries must be numbers");
    }
    *fields[i] = j["bbox"][i].get<double>();
    if (!std::isfinite(*fields[i])) {
      throw Error(ErrorKind::kParseError, where + ": bbox entries must be finite");
    }
  }
  if (!box.valid()) {
    throw Error(ErrorKind::kParseError, where + ": bbox needs positive width and height");
  }
  return box;
}

json box_json(const BoundingBox& box) { return json{box.x, box.y, box.w, box.h}; }

json tag_json(const ClassTag& tag) {
  json j;
  switch (tag.kind) {
    case TagKind::kKnown:
      j["tag"] = "known";
      j["class"] = canonical_classes().at(static_cast<std::size_t>(tag.id));
      break;
    case TagKind::kUnknown:
      j["tag"] = "unknown";
      break;
    case TagKind::kNovel:
      j["tag"] = "novel";
      j["category"] = tag.id;
      break;
  }
  return j;
}

std::string fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string opt6(const std::optional<double>& value, const char* missing) {
  return value ? fixed6(*value) : missing;
}

void check_synth(const SynthConfig& cfg) {
  if (cfg.n_known_classes < 1 || cfg.n_novel_classes < 1 || cfg.samples_per_class < 1) {
    throw Error(ErrorKind::kConfigError, "class and sample counts must be positive");
  }
  if (cfg.dim < 1 || cfg.informative_dims < 1 || cfg.informative_dims > cfg.dim) {
    throw Error(ErrorKind::kConfigError, "need 1 <= informative_dims <= dim");
  }
  if (cfg.cluster_separation <= 0.0) {
    throw Error(ErrorKind::kConfigError, "cluster separation must be positive");
  }
  if (cfg.detector_miss_rate < 0.0 || cfg.detector_miss_rate > 1.0 ||
      cfg.detector_confusion_rate < 0.0 || cfg.detector_confusion_rate > 1.0) {
    throw Error(ErrorKind::kConfigError, "detector rates must lie in [0,1]");
  }
}

/// Runs fn with the pipeline stage name folded into any thrown error.
template <typename F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

}  // namespace

void synth_generate(const SynthConfig& cfg, const SynthFiles& out) {
  check_synth(cfg);
  const TaskSplit split = load_task_split(cfg.task_id);
  if (cfg.n_known_classes > static_cast<int>(split.known_classes.size()) ||
      cfg.n_novel_classes > static_cast<int>(split.unknown_classes.size())) {
    throw Error(ErrorKind::kConfigError, "class counts exceed the task split");
  }

  std::vector<std::string> class_names;
  for (int i = 0; i < cfg.n_known_classes; ++i) class_names.push_back(split.known_classes[i]);
  for (int i = 0; i < cfg.n_novel_classes; ++i) class_names.push_back(split.unknown_classes[i]);
  const int n_classes = static_cast<int>(class_names.size());

  Rng rng(cfg.seed);

  // Class means on the informative dims only, rejection-sampled until every
  // pair sits at least cluster_separation noise-sigmas apart.
  std::vector<Vec> means(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      Vec candidate(cfg.informative_dims);
      for (double& v : candidate) v = cfg.cluster_separation * rng.normal();
      placed = true;
      for (int prev = 0; prev < c; ++prev) {
        if (distance(candidate, means[prev]) < cfg.cluster_separation) {
          placed = false;
          break;
        }
      }
      if (placed) means[c] = std::move(candidate);
    }
    if (!placed) {
      throw Error(ErrorKind::kConfigError, "could not satisfy the requested separation");
    }
  }

  std::ofstream gt_out = open_for_write(out.gt_path);
  std::ofstream det_out = open_for_write(out.detections_path);
  std::ofstream emb_out = open_for_write(out.embeddings_path);
  gt_out << json{{"version", 1}}.dump() << "\n";
  det_out << json{{"version", 1}}.dump() << "\n";
  emb_out << json{{"version", 1}, {"dim", cfg.dim}}.dump() << "\n";

  char id_buf[32];
  int det_counter = 0;
  int object_index = 0;
  for (int c = 0; c < n_classes; ++c) {
    const bool is_known = c < cfg.n_known_classes;
    for (int s = 0; s < cfg.samples_per_class; ++s, ++object_index) {
      std::snprintf(id_buf, sizeof id_buf, "g%05d", object_index);
      const std::string gt_id = id_buf;
      std::snprintf(id_buf, sizeof id_buf, "im%04d", object_index / 8);
      const std::string image_id = id_buf;
      BoundingBox box;
      box.x = static_cast<double>(rng.index(881));
      box.y = static_cast<double>(rng.index(881));
      box.w = static_cast<double>(20 + rng.index(101));
      box.h = static_cast<double>(20 + rng.index(101));

      json gt_line;
      gt_line["image_id"] = image_id;
      gt_line["object_id"] = gt_id;
      gt_line["class"] = class_names[c];
      gt_line["bbox"] = box_json(box);
      gt_out << gt_line.dump() << "\n";

      if (rng.uniform() < cfg.detector_miss_rate) continue;

      const double score = 0.5 + 0.5 * rng.uniform();
      json det_line;
      std::snprintf(id_buf, sizeof id_buf, "d%05d", det_counter++);
      det_line["image_id"] = image_id;
      det_line["object_id"] = id_buf;
      det_line["bbox"] = box_json(box);
      det_line["score"] = score;
      if (is_known) {
        det_line["tag"] = "known";
        det_line["class"] = class_names[c];
      } else if (rng.uniform() < cfg.detector_confusion_rate) {
        det_line["tag"] = "known";
        det_line["class"] = class_names[rng.index(cfg.n_known_classes)];
      } else {
        det_line["tag"] = "unknown";
      }
      det_out << det_line.dump() << "\n";

      Vec embedding(cfg.dim);
      for (int j = 0; j < cfg.dim; ++j) {
        const double base = j < cfg.informative_dims ? means[c][j] : 0.0;
        embedding[j] = base + rng.normal();
      }
      json emb_line;
      emb_line["object_id"] = det_line["object_id"];
      emb_line["vector"] = embedding;
      emb_out << emb_line.dump() << "\n";
    }
  }
  if (!gt_out || !det_out || !emb_out) {
    throw Error(ErrorKind::kIoFailure, "failed writing synthetic benchmark files");
  }
}

GroundTruth ingest_ground_truth(const std::string& path, const TaskSplit& split) {
  std::ifstream in = open_for_read(path);
  read_header(in, path);

  const std::unordered_set<std::string> known_names(split.known_classes.begin(),
                                                    split.known_classes.end());
  GroundTruth gt;
  std::string line;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const json j = parse_line(line, path, line_no);
    ObjectRecord rec;
    rec.image_id = require_string(j, "image_id", where);
    rec.object_id = require_string(j, "object_id", where);
    rec.box = require_box(j, where);
    const std::string class_name = require_string(j, "class", where);
    const std::optional<int> id = class_id(class_name);
    if (!id) {
      throw Error(ErrorKind::kUnknownClassName, where + ": unknown class '" + class_name + "'");
    }
    rec.tag = known_names.count(class_name) ? ClassTag::known(*id) : ClassTag::unknown();
    rec.score = 1.0;
    if (!gt.class_by_object.emplace(rec.object_id, *id).second) {
      throw Error(ErrorKind::kDuplicateId, where + ": duplicate object id " + rec.object_id);
    }
    gt.records.push_back(std::move(rec));
  }
  return gt;
}

std::vector<ObjectRecord> ingest_detections(const std::string& path, double score_floor,
                                            const TaskSplit& split) {
  std::ifstream in = open_for_read(path);
  read_header(in, path);

  const std::unordered_set<std::string> known_names(split.known_classes.begin(),
                                                    split.known_classes.end());
  std::vector<ObjectRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const json j = parse_line(line, path, line_no);
    ObjectRecord rec;
    rec.image_id = require_string(j, "image_id", where);
    rec.object_id = require_string(j, "object_id", where);
    rec.box = require_box(j, where);
    if (!j.contains("score") || !j["score"].is_number()) {
      throw Error(ErrorKind::kParseError, where + ": missing numeric score");
    }
    rec.score = j["score"].get<double>();
    if (!(rec.score >= 0.0 && rec.score <= 1.0)) {
      throw Error(ErrorKind::kParseError, where + ": score must lie in [0,1]");
    }

    const std::string tag = require_string(j, "tag", where);
    if (tag == "known") {
      const std::string class_name = require_string(j, "class", where);
      if (!known_names.count(class_name)) {
        throw Error(ErrorKind::kUnknownClassName,
                    where + ": '" + class_name + "' is not a known class of this task");
      }
      rec.tag = ClassTag::known(*class_id(class_name));
    } else if (tag == "unknown") {
      rec.tag = ClassTag::unknown();
    } else {
      throw Error(ErrorKind::kParseError, where + ": tag must be 'known' or 'unknown'");
    }

    if (!seen.insert(rec.object_id).second) {
      throw Error(ErrorKind::kDuplicateId, where + ": duplicate object id " + rec.object_id);
    }
    if (rec.score < score_floor) continue;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<EmbeddingRecord> ingest_embeddings(const std::string& path, int expected_dim) {
  std::ifstream in = open_for_read(path);
  const json header = read_header(in, path);
  if (!header.contains("dim") || !header["dim"].is_number_integer() ||
      header["dim"].get<int>() < 1) {
    throw Error(ErrorKind::kSchemaMismatch, path + ": header needs a positive dim");
  }
  const int dim = header["dim"].get<int>();
  if (expected_dim > 0 && dim != expected_dim) {
    throw Error(ErrorKind::kDimensionMismatch,
                path + ": embedding dim " + std::to_string(dim) + " != expected " +
                    std::to_string(expected_dim));
  }

  std::vector<EmbeddingRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    const json j = parse_line(line, path, line_no);
    EmbeddingRecord rec;
    rec.object_id = require_string(j, "object_id", where);
    if (!j.contains("vector") || !j["vector"].is_array()) {
      throw Error(ErrorKind::kParseError, where + ": missing vector array");
    }
    if (static_cast<int>(j["vector"].size()) != dim) {
      throw Error(ErrorKind::kDimensionMismatch,
                  where + ": vector length != header dim " + std::to_string(dim));
    }
    rec.vector.reserve(j["vector"].size());
    for (const json& v : j["vector"]) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw Error(ErrorKind::kParseError, where + ": vector entries must be finite numbers");
      }
      rec.vector.push_back(v.get<double>());
    }
    if (!seen.insert(rec.object_id).second) {
      throw Error(ErrorKind::kDuplicateId, where + ": duplicate object id " + rec.object_id);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

PipelineResult run_pipeline(const std::string& gt_path, const std::string& detections_path,
                            const std::string& embeddings_path, const PipelineConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();

  const TaskSplit split = stage("load-split", [&] { return load_task_split(cfg.task_id); });
  const GroundTruth gt =
      stage("ingest-ground-truth", [&] { return ingest_ground_truth(gt_path, split); });
  const std::vector<ObjectRecord> detections = stage("ingest-detections", [&] {
    return ingest_detections(detections_path, cfg.score_floor, split);
  });
  const std::vector<EmbeddingRecord> embeddings =
      stage("ingest-embeddings", [&] { return ingest_embeddings(embeddings_path); });
  const MemoryBuffer buffer = stage("store-predictions", [&] {
    return store_predictions(MemoryBuffer(), detections, embeddings);
  });

  PipelineResult result;
  result.predictions = detections;

  int k_used = 0;
  if (!buffer.empty()) {
    trainer::TrainConfig tcfg = cfg.train;
    tcfg.seed = cfg.seed;  // one seed drives init, training, and clustering
    const trainer::ProjectionHead trained = stage("train", [&] {
      const trainer::ProjectionHead head =
          trainer::init_head(static_cast<std::size_t>(buffer.dim()),
                             static_cast<std::size_t>(cfg.embed_dim), cfg.seed);
      auto [fitted, stats] = trainer::train(head, buffer, tcfg);
      result.train_stats = std::move(stats);
      return fitted;
    });

    std::vector<discovery::LabeledEmbedding> known_encoded;
    std::vector<Vec> working_encoded;
    std::vector<std::string> working_ids;
    stage("encode", [&] {
      known_encoded.reserve(buffer.known().size());
      for (const MemoryEntry& e : buffer.known()) {
        known_encoded.push_back(
            {e.object.tag.id, trainer::encode_one(trained, e.embedding.vector)});
      }
      working_encoded.reserve(buffer.working().size());
      working_ids.reserve(buffer.working().size());
      for (const MemoryEntry& e : buffer.working()) {
        working_encoded.push_back(trainer::encode_one(trained, e.embedding.vector));
        working_ids.push_back(e.object.object_id);
      }
      return 0;
    });

    if (!working_encoded.empty()) {
      if (cfg.k_novel > 0) {
        k_used = cfg.k_novel;
      } else {
        k_used = stage("estimate-k", [&] {
          return discovery::estimate_class_number(known_encoded, working_encoded,
                                                  cfg.k_min, cfg.k_max, cfg.seed)
              .k_est;
        });
      }
      result.discovery = stage("discover", [&] {
        return discovery::constrained_kmeans(known_encoded, working_encoded, working_ids,
                                             k_used, cfg.seed);
      });
      for (ObjectRecord& rec : result.predictions) {
        if (rec.tag.is_unknown()) {
          rec.tag = ClassTag::novel(result.discovery.assignments.at(rec.object_id));
        }
      }
    }
  }

  std::vector<ObjectRecord> gt_unknown;
  for (const ObjectRecord& rec : gt.records) {
    if (rec.tag.is_unknown()) gt_unknown.push_back(rec);
  }

  MetricReport& report = result.report;
  stage("detection-metrics", [&] {
    const detmetrics::UnknownMatchCounts counts =
        detmetrics::match_unknown(detections, gt_unknown, cfg.iou_threshold);
    std::tie(report.udr, report.udp) = detmetrics::udr_udp(counts);
    std::tie(report.map_previous, report.map_current) =
        detmetrics::mean_ap(detections, gt.records, split, cfg.iou_threshold);
    return 0;
  });

  if (!result.discovery.assignments.empty()) {
    stage("clustering-metrics", [&] {
      const std::vector<detmetrics::MatchedPair> pairs =
          cfg.eval_all_working
              ? detmetrics::match_unknown_all(detections, gt_unknown, cfg.iou_threshold)
              : detmetrics::match_unknown_pairs(detections, gt_unknown, cfg.iou_threshold);
      clustmetrics::LabelPairing pairing;
      for (const detmetrics::MatchedPair& p : pairs) {
        pairing.pred_labels.push_back(result.discovery.assignments.at(p.detection_id));
        pairing.gt_labels.push_back(gt.class_by_object.at(p.gt_id));
      }
      if (!pairing.pred_labels.empty()) {
        report.acc = clustmetrics::clustering_accuracy(pairing);
        report.nmi = clustmetrics::nmi(pairing);
        report.purity = clustmetrics::purity(pairing);
      }
      return 0;
    });
  }

  report.task_id = cfg.task_id;
  report.k_est = k_used;
  report.n_gt_unknown = gt_unknown.size();
  report.n_gt_known = gt.records.size() - gt_unknown.size();
  report.n_detections = detections.size();
  report.n_working = buffer.working().size();

  report.config.task_id = cfg.task_id;
  report.config.iou_threshold = cfg.iou_threshold;
  report.config.score_floor = cfg.score_floor;
  report.config.embed_dim = cfg.embed_dim;
  report.config.temperature = cfg.train.temperature;
  report.config.epochs = cfg.train.epochs;
  report.config.learning_rate = cfg.train.learning_rate;
  report.config.sgd_momentum = cfg.train.sgd_momentum;
  report.config.key_momentum = cfg.train.key_momentum;
  report.config.batch_size = cfg.train.batch_size;
  report.config.queue_capacity = cfg.train.queue_capacity;
  report.config.mix_alpha = cfg.train.mix_alpha;
  report.config.k_requested = cfg.k_novel;
  report.config.k_min = cfg.k_min;
  report.config.k_max = cfg.k_max;
  report.config.eval_all_working = cfg.eval_all_working;
  report.config.seed = cfg.seed;

  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void write_predictions(const std::vector<ObjectRecord>& predictions,
                       const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << json{{"version", 1}}.dump() << "\n";
  for (const ObjectRecord& rec : predictions) {
    json j = tag_json(rec.tag);
    j["image_id"] = rec.image_id;
    j["object_id"] = rec.object_id;
    j["bbox"] = box_json(rec.box);
    j["score"] = rec.score;
    out << j.dump() << "\n";
  }
  if (!out) throw Error(ErrorKind::kIoFailure, "failed writing predictions: " + path);
}

std::string render_report(const MetricReport& r, const std::string& format) {
  if (format == "json") {
    std::ostringstream out;
    out << "{";
    out << "\"acc\":" << opt6(r.acc, "null");
    out << ",\"config\":{";
    out << "\"batch_size\":" << r.config.batch_size;
    out << ",\"embed_dim\":" << r.config.embed_dim;
    out << ",\"epochs\":" << r.config.epochs;
    out << ",\"eval_all_working\":" << (r.config.eval_all_working ? "true" : "false");
    out << ",\"iou_threshold\":" << fixed6(r.config.iou_threshold);
    out << ",\"k_max\":" << r.config.k_max;
    out << ",\"k_min\":" << r.config.k_min;
    out << ",\"k_requested\":" << r.config.k_requested;
    out << ",\"key_momentum\":" << fixed6(r.config.key_momentum);
    out << ",\"learning_rate\":" << fixed6(r.config.learning_rate);
    out << ",\"mix_alpha\":" << fixed6(r.config.mix_alpha);
    out << ",\"queue_capacity\":" << r.config.queue_capacity;
    out << ",\"score_floor\":" << fixed6(r.config.score_floor);
    out << ",\"seed\":" << r.config.seed;
    out << ",\"sgd_momentum\":" << fixed6(r.config.sgd_momentum);
    out << ",\"task_id\":" << r.config.task_id;
    out << ",\"temperature\":" << fixed6(r.config.temperature);
    out << "}";
    out << ",\"counts\":{";
    out << "\"detections\":" << r.n_detections;
    out << ",\"gt_known\":" << r.n_gt_known;
    out << ",\"gt_unknown\":" << r.n_gt_unknown;
    out << ",\"working\":" << r.n_working;
    out << "}";
    out << ",\"k_est\":" << r.k_est;
    out << ",\"map_current\":" << opt6(r.map_current, "null");
    out << ",\"map_previous\":" << opt6(r.map_previous, "null");
    out << ",\"nmi\":" << opt6(r.nmi, "null");
    out << ",\"purity\":" << opt6(r.purity, "null");
    out << ",\"task_id\":" << r.task_id;
    out << ",\"udp\":" << opt6(r.udp, "null");
    out << ",\"udr\":" << opt6(r.udr, "null");
    out << "}\n";
    return out.str();
  }
  if (format != "text") {
    throw Error(ErrorKind::kConfigError, "report format must be 'json' or 'text'");
  }

  std::ostringstream out;
  char row[128];
  out << "open-set detection and discovery report (task " << r.task_id << ")\n";
  const auto emit = [&](const char* name, const std::string& value) {
    std::snprintf(row, sizeof row, "  %-18s %s\n", name, value.c_str());
    out << row;
  };
  emit("UDR", opt6(r.udr, "n/a"));
  emit("UDP", opt6(r.udp, "n/a"));
  emit("mAP (previous)", opt6(r.map_previous, "n/a"));
  emit("mAP (current)", opt6(r.map_current, "n/a"));
  emit("ACC", opt6(r.acc, "n/a"));
  emit("NMI", opt6(r.nmi, "n/a"));
  emit("Purity", opt6(r.purity, "n/a"));
  emit("novel categories", std::to_string(r.k_est));
  out << "  counts: gt_known=" << r.n_gt_known << " gt_unknown=" << r.n_gt_unknown
      << " detections=" << r.n_detections << " working=" << r.n_working << "\n";
  out << "  config: seed=" << r.config.seed << " task=" << r.config.task_id
      << " iou=" << fixed6(r.config.iou_threshold)
      << " score_floor=" << fixed6(r.config.score_floor)
      << " embed_dim=" << r.config.embed_dim
      << " temperature=" << fixed6(r.config.temperature) << " epochs=" << r.config.epochs
      << " lr=" << fixed6(r.config.learning_rate)
      << " sgd_momentum=" << fixed6(r.config.sgd_momentum)
      << " key_momentum=" << fixed6(r.config.key_momentum)
      << " batch=" << r.config.batch_size << " queue=" << r.config.queue_capacity
      << " mix_alpha=" << fixed6(r.config.mix_alpha);
  if (r.config.k_requested > 0) {
    out << " k=" << r.config.k_requested;
  } else {
    out << " k=auto[" << r.config.k_min << "," << r.config.k_max << "]";
  }
  out << " eval_all_working=" << (r.config.eval_all_working ? "true" : "false") << "\n";
  return out.str();
}

void emit_report(const MetricReport& report, const std::string& format,
                 const std::string& path) {
  const std::string rendered = render_report(report, format);
  std::ofstream out = open_for_write(path);
  out << rendered;
  if (!out) throw Error(ErrorKind::kIoFailure, "failed writing report: " + path);
}

MetricReport read_report(const std::string& path) {
  std::ifstream in = open_for_read(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("config") || !doc.contains("task_id")) {
    throw Error(ErrorKind::kSchemaMismatch, path + ": not a metric report");
  }

  const auto opt_field = [&doc](const char* key) -> std::optional<double> {
    if (!doc.contains(key) || doc[key].is_null()) return std::nullopt;
    return doc[key].get<double>();
  };

  MetricReport r;
  r.task_id = doc["task_id"].get<int>();
  r.udr = opt_field("udr");
  r.udp = opt_field("udp");
  r.map_previous = opt_field("map_previous");
  r.map_current = opt_field("map_current");
  r.acc = opt_field("acc");
  r.nmi = opt_field("nmi");
  r.purity = opt_field("purity");
  r.k_est = doc.value("k_est", 0);

  const json counts = doc.value("counts", json::object());
  r.n_gt_known = counts.value("gt_known", 0u);
  r.n_gt_unknown = counts.value("gt_unknown", 0u);
  r.n_detections = counts.value("detections", 0u);
  r.n_working = counts.value("working", 0u);

  const json& c = doc["config"];
  r.config.task_id = c.value("task_id", 1);
  r.config.iou_threshold = c.value("iou_threshold", 0.5);
  r.config.score_floor = c.value("score_floor", 0.05);
  r.config.embed_dim = c.value("embed_dim", 256);
  r.config.temperature = c.value("temperature", 1.0);
  r.config.epochs = c.value("epochs", 10);
  r.config.learning_rate = c.value("learning_rate", 0.015);
  r.config.sgd_momentum = c.value("sgd_momentum", 0.9);
  r.config.key_momentum = c.value("key_momentum", 0.999);
  r.config.batch_size = c.value("batch_size", 64);
  r.config.queue_capacity = c.value("queue_capacity", std::size_t{4096});
  r.config.mix_alpha = c.value("mix_alpha", 1.0);
  r.config.k_requested = c.value("k_requested", 0);
  r.config.k_min = c.value("k_min", 2);
  r.config.k_max = c.value("k_max", 10);
  r.config.eval_all_working = c.value("eval_all_working", false);
  r.config.seed = c.value("seed", std::uint64_t{0});
  return r;
}

void write_discovery(const discovery::DiscoveryResult& result,
                     const std::string& assignments_path,
                     const std::string& centroids_path) {
  std::ofstream out = open_for_write(assignments_path);
  for (const auto& [object_id, category] : result.assignments) {
    json j;
    j["object_id"] = object_id;
    j["novel_category"] = category;
    out << j.dump() << "\n";
  }
  if (!out) throw Error(ErrorKind::kIoFailure, "failed writing assignments");

  std::ofstream side = open_for_write(centroids_path);
  json sidecar;
  sidecar["centroids"] = result.novel_centroids;
  side << sidecar.dump() << "\n";
  if (!side) throw Error(ErrorKind::kIoFailure, "failed writing centroids");
}

}  // namespace opendet::io
