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

#include "opendet/memory.hpp"

#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "opendet/error.hpp"
#include "opendet/vecmath.hpp"

namespace opendet {

using nlohmann::json;

void MemoryBuffer::append(ObjectRecord object, EmbeddingRecord embedding) {
  if (object.object_id != embedding.object_id) {
    throw Error(ErrorKind::kMissingEmbedding,
                "embedding id '" + embedding.object_id +
                    "' does not match object id '" + object.object_id + "'");
  }
  if (ids_.count(object.object_id) != 0) {
    throw Error(ErrorKind::kDuplicateId, object.object_id);
  }
  if (!all_finite(embedding.vector)) {
    throw Error(ErrorKind::kParseError,
                "non-finite embedding entry for " + object.object_id);
  }
  const int d = static_cast<int>(embedding.vector.size());
  if (dim_ == 0) {
    dim_ = d;
  } else if (d != dim_) {
    throw Error(ErrorKind::kDimensionMismatch,
                "embedding for " + object.object_id + " has dimension " +
                    std::to_string(d) + ", buffer holds " + std::to_string(dim_));
  }

  ids_.insert(object.object_id);
  switch (object.tag.kind) {
    case TagKind::kKnown:
      known_.push_back({std::move(object), std::move(embedding)});
      break;
    case TagKind::kUnknown:
      working_.push_back({std::move(object), std::move(embedding)});
      break;
    case TagKind::kNovel:
      ids_.erase(object.object_id);
      throw Error(ErrorKind::kInvalidTag,
                  "novel-category tags are assigned by discovery, not stored: " +
                      object.object_id);
  }
}

MemoryBuffer store_predictions(MemoryBuffer buffer,
                               const std::vector<ObjectRecord>& detections,
                               const std::vector<EmbeddingRecord>& embeddings) {
  std::unordered_map<std::string, const EmbeddingRecord*> by_id;
  by_id.reserve(embeddings.size());
  for (const auto& e : embeddings) by_id.emplace(e.object_id, &e);

  for (const auto& det : detections) {
    auto it = by_id.find(det.object_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::kMissingEmbedding,
                  "no embedding for detection " + det.object_id);
    }
    buffer.append(det, *it->second);
  }
  return buffer;
}

namespace {

json tag_to_json(const ClassTag& tag) {
  switch (tag.kind) {
    case TagKind::kKnown: return {{"kind", "known"}, {"id", tag.id}};
    case TagKind::kUnknown: return {{"kind", "unknown"}};
    case TagKind::kNovel: return {{"kind", "novel"}, {"id", tag.id}};
  }
  return {};
}

ClassTag tag_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "known") return ClassTag::known(j.at("id").get<int>());
  if (kind == "unknown") return ClassTag::unknown();
  if (kind == "novel") return ClassTag::novel(j.at("id").get<int>());
  throw Error(ErrorKind::kParseError, "unrecognized tag kind '" + kind + "'");
}

json entry_to_json(const MemoryEntry& entry, const char* store) {
  const auto& obj = entry.object;
  return {{"store", store},
          {"object_id", obj.object_id},
          {"image_id", obj.image_id},
          {"bbox", {obj.box.x, obj.box.y, obj.box.w, obj.box.h}},
          {"tag", tag_to_json(obj.tag)},
          {"score", obj.score},
          {"vector", entry.embedding.vector}};
}

}  // namespace

void snapshot_memory(const MemoryBuffer& buffer, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoFailure, "cannot open " + path + " for write");

  out << json{{"version", 1}, {"dim", buffer.dim()}}.dump() << "\n";
  for (const auto& entry : buffer.known()) {
    out << entry_to_json(entry, "known").dump() << "\n";
  }
  for (const auto& entry : buffer.working()) {
    out << entry_to_json(entry, "working").dump() << "\n";
  }
  if (!out.good()) throw Error(ErrorKind::kIoFailure, "write failed for " + path);
}

MemoryBuffer load_memory(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kSchemaMismatch, path + ": missing header line");
  }

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path + ":1: " + e.what());
  }
  if (!header.contains("version") || header["version"].get<int>() != 1) {
    throw Error(ErrorKind::kSchemaMismatch, path + ": unsupported snapshot version");
  }
  const int dim = header.value("dim", 0);
  if (expected_dim > 0 && dim != 0 && dim != expected_dim) {
    throw Error(ErrorKind::kSchemaMismatch,
                path + ": snapshot dimension " + std::to_string(dim) +
                    " does not match expected " + std::to_string(expected_dim));
  }

  MemoryBuffer buffer;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      ObjectRecord obj;
      obj.object_id = j.at("object_id").get<std::string>();
      obj.image_id = j.at("image_id").get<std::string>();
      const auto& bbox = j.at("bbox");
      obj.box = {bbox.at(0).get<double>(), bbox.at(1).get<double>(),
                 bbox.at(2).get<double>(), bbox.at(3).get<double>()};
      obj.tag = tag_from_json(j.at("tag"));
      obj.score = j.at("score").get<double>();

      EmbeddingRecord emb;
      emb.object_id = obj.object_id;
      emb.vector = j.at("vector").get<std::vector<double>>();
      buffer.append(std::move(obj), std::move(emb));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParseError,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (buffer.dim() != 0 && dim != 0 && buffer.dim() != dim) {
    throw Error(ErrorKind::kSchemaMismatch,
                path + ": header dimension disagrees with entries");
  }
  return buffer;
}

}  // namespace opendet
