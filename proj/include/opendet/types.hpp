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

#ifndef OPENDET_TYPES_HPP
#define OPENDET_TYPES_HPP

#include <string>
#include <vector>

namespace opendet {

/// Axis-aligned box, [x_left, y_top, width, height] in pixels.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  bool valid() const { return w > 0.0 && h > 0.0; }
  double area() const { return w * h; }

  bool operator==(const BoundingBox&) const = default;
};

enum class TagKind { kKnown, kUnknown, kNovel };

/// Class label attached to an object: a known class id, the anonymous
/// "unknown" marker produced by the detector, or a discovered novel
/// category id.
struct ClassTag {
  TagKind kind = TagKind::kUnknown;
  int id = -1;  // class id for kKnown, category id for kNovel, -1 otherwise

  static ClassTag known(int class_id) { return {TagKind::kKnown, class_id}; }
  static ClassTag unknown() { return {TagKind::kUnknown, -1}; }
  static ClassTag novel(int category_id) { return {TagKind::kNovel, category_id}; }

  bool is_known() const { return kind == TagKind::kKnown; }
  bool is_unknown() const { return kind == TagKind::kUnknown; }
  bool is_novel() const { return kind == TagKind::kNovel; }

  bool operator==(const ClassTag&) const = default;
};

/// One annotated or predicted object. Ground-truth records carry score 1.0.
struct ObjectRecord {
  std::string image_id;
  std::string object_id;  // unique within a dataset
  BoundingBox box;
  ClassTag tag;
  double score = 1.0;  // in [0, 1]

  bool operator==(const ObjectRecord&) const = default;
};

/// Fixed-dimension feature vector tied to one detected object.
struct EmbeddingRecord {
  std::string object_id;
  std::vector<double> vector;

  bool operator==(const EmbeddingRecord&) const = default;
};

/// Known/unknown class partition for one incremental task.
struct TaskSplit {
  int task_id = 0;  // in {1, 2, 3}
  std::vector<std::string> known_classes;
  std::vector<std::string> unknown_classes;
  std::vector<std::string> previous_known;  // known classes of task_id - 1

  bool operator==(const TaskSplit&) const = default;
};

}  // namespace opendet

#endif  // OPENDET_TYPES_HPP
