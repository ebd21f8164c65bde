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

#ifndef OPENDET_TASK_SPLITS_HPP
#define OPENDET_TASK_SPLITS_HPP

#include <optional>
#include <string_view>
#include <vector>

#include "opendet/types.hpp"

namespace opendet {

// Class-list resource version. Bump when the bundled table changes.
inline constexpr int kClassListVersion = 1;
inline constexpr int kNumBenchmarkClasses = 80;

/// The 80 benchmark class names in canonical order. The first 20 are the
/// task-1 known classes, the first 40 the task-2 known classes, and the
/// first 60 the task-3 known classes.
const std::vector<std::string>& canonical_classes();

/// Canonical id (index into canonical_classes) for a class name, or nullopt.
/// Matching is case-insensitive.
std::optional<int> class_id(std::string_view name);

/// Split for task_id in {1, 2, 3}. Throws Error(kUnknownTask) otherwise.
TaskSplit load_task_split(int task_id);

/// Canonical ids of the split's known classes, in split order.
std::vector<int> known_class_ids(const TaskSplit& split);

/// Canonical ids of previous_known, in split order.
std::vector<int> previous_known_class_ids(const TaskSplit& split);

/// Canonical ids of the classes introduced by this task
/// (known_classes minus previous_known), in split order.
std::vector<int> current_known_class_ids(const TaskSplit& split);

}  // namespace opendet

#endif  // OPENDET_TASK_SPLITS_HPP
