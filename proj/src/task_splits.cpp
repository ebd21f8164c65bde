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

#include "opendet/task_splits.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_map>

#include "opendet/error.hpp"

namespace opendet {

namespace {

// Benchmark class table, canonical order. Tasks carve known/unknown as
// prefixes of this list: 20/40/60 known for tasks 1/2/3.
const std::vector<std::string> kClasses = {
    // task-1 known (VOC classes)
    "airplane", "bicycle", "bird", "boat", "bottle",
    "bus", "car", "cat", "chair", "cow",
    "dining table", "dog", "horse", "motorcycle", "person",
    "potted plant", "sheep", "couch", "train", "tv",
    // added as known in task 2 (outdoor, accessory, appliance, truck, wild animal)
    "truck", "traffic light", "fire hydrant", "stop sign", "parking meter",
    "bench", "elephant", "bear", "zebra", "giraffe",
    "backpack", "umbrella", "handbag", "tie", "suitcase",
    "microwave", "oven", "toaster", "sink", "refrigerator",
    // added as known in task 3 (sports, food)
    "frisbee", "skis", "snowboard", "sports ball", "kite",
    "baseball bat", "baseball glove", "skateboard", "surfboard", "tennis racket",
    "banana", "apple", "sandwich", "orange", "broccoli",
    "carrot", "hot dog", "pizza", "donut", "cake",
    // unknown in all tasks
    "bed", "toilet", "laptop", "mouse", "remote",
    "keyboard", "cell phone", "book", "clock", "vase",
    "scissors", "teddy bear", "hair drier", "toothbrush", "wine glass",
    "cup", "fork", "knife", "spoon", "bowl",
};

constexpr int kKnownCountByTask[3] = {20, 40, 60};

std::string to_lower(std::string_view name) {
  std::string out(name);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

const std::unordered_map<std::string, int>& class_index() {
  static const std::unordered_map<std::string, int> index = [] {
    std::unordered_map<std::string, int> m;
    for (int i = 0; i < static_cast<int>(kClasses.size()); ++i) {
      m.emplace(kClasses[i], i);
    }
    return m;
  }();
  return index;
}

std::vector<int> ids_of(const std::vector<std::string>& names) {
  std::vector<int> ids;
  ids.reserve(names.size());
  for (const auto& name : names) {
    auto id = class_id(name);
    if (!id) {
      throw Error(ErrorKind::kUnknownClassName, "not a benchmark class: " + name);
    }
    ids.push_back(*id);
  }
  return ids;
}

}  // namespace

const std::vector<std::string>& canonical_classes() { return kClasses; }

std::optional<int> class_id(std::string_view name) {
  const auto& index = class_index();
  auto it = index.find(to_lower(name));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

TaskSplit load_task_split(int task_id) {
  if (task_id < 1 || task_id > 3) {
    throw Error(ErrorKind::kUnknownTask,
                "task id must be 1, 2, or 3 (got " + std::to_string(task_id) + ")");
  }
  const int n_known = kKnownCountByTask[task_id - 1];
  const int n_prev = task_id == 1 ? 0 : kKnownCountByTask[task_id - 2];

  TaskSplit split;
  split.task_id = task_id;
  split.known_classes.assign(kClasses.begin(), kClasses.begin() + n_known);
  split.unknown_classes.assign(kClasses.begin() + n_known, kClasses.end());
  split.previous_known.assign(kClasses.begin(), kClasses.begin() + n_prev);
  return split;
}

std::vector<int> known_class_ids(const TaskSplit& split) {
  return ids_of(split.known_classes);
}

std::vector<int> previous_known_class_ids(const TaskSplit& split) {
  return ids_of(split.previous_known);
}

std::vector<int> current_known_class_ids(const TaskSplit& split) {
  auto prev = previous_known_class_ids(split);
  std::vector<int> current;
  for (int id : known_class_ids(split)) {
    if (std::find(prev.begin(), prev.end(), id) == prev.end()) {
      current.push_back(id);
    }
  }
  return current;
}

}  // namespace opendet
