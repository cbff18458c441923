// Copyright 2026 The pafs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pafs::data {

enum class Split { kTrain, kVal, kTest };

const char* split_name(Split s);
Split parse_split(const std::string& s);

/// One manifest row. `class_id` is the dense id assigned to the label string
/// in first-seen order over the whole file.
struct ManifestRow {
  std::string path;
  std::string label;
  Split split = Split::kTrain;
  int class_id = 0;
};

struct Manifest {
  std::filesystem::path source;  // manifest file location, for resolving paths
  std::vector<ManifestRow> rows;
  std::vector<std::string> class_names;  // dense id -> label string

  /// Row paths are taken relative to the manifest's directory unless absolute.
  std::filesystem::path resolve(const ManifestRow& row) const;
};

/// Reads a `path,label,split` CSV. A leading header row is optional.
Manifest read_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRow>& rows);

}  // namespace pafs::data
