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

#include "pafs/data/index.hpp"

#include <fstream>
#include <optional>

#include "pafs/common.hpp"
#include "pafs/csv.hpp"
#include "pafs/errors.hpp"
#include "pafs/io_util.hpp"

namespace pafs::data {

std::vector<int> DatasetIndex::classes_in(Split split) const {
  std::vector<int> out;
  for (int c = 0; c < n_classes(); ++c)
    if (class_split[static_cast<std::size_t>(c)] == split) out.push_back(c);
  return out;
}

std::vector<int> DatasetIndex::usable_classes(Split split, int min_clips) const {
  std::vector<int> out;
  for (int c : classes_in(split))
    if (static_cast<int>(clips_by_class[static_cast<std::size_t>(c)].size()) >=
        min_clips)
      out.push_back(c);
  return out;
}

DatasetIndex build_index(const Manifest& manifest) {
  DatasetIndex idx;
  idx.class_names = manifest.class_names;
  idx.class_split.resize(idx.class_names.size());
  idx.clips_by_class.resize(idx.class_names.size());
  std::vector<std::optional<Split>> seen(idx.class_names.size());

  for (std::size_t clip = 0; clip < manifest.rows.size(); ++clip) {
    const auto& row = manifest.rows[clip];
    const auto c = static_cast<std::size_t>(row.class_id);
    if (seen[c] && *seen[c] != row.split)
      throw ManifestError(cat("class '", row.label, "' appears in splits ",
                              split_name(*seen[c]), " and ", split_name(row.split)));
    seen[c] = row.split;
    idx.class_split[c] = row.split;
    idx.clips_by_class[c].push_back(static_cast<int>(clip));
    idx.clip_class.push_back(row.class_id);
  }

  for (Split s : {Split::kTrain, Split::kVal, Split::kTest})
    if (idx.classes_in(s).empty())
      throw ConfigError(cat("manifest has no classes in split '", split_name(s), "'"));
  return idx;
}

SegmentMap identity_segments(int n_clips) {
  SegmentMap map(static_cast<std::size_t>(n_clips));
  for (int i = 0; i < n_clips; ++i) map[static_cast<std::size_t>(i)] = {i};
  return map;
}

void write_segment_map(const std::filesystem::path& path, const SegmentMap& segments) {
  atomic_write(path, [&](std::ostream& out) {
    out << "record,clip\n";
    for (std::size_t clip = 0; clip < segments.size(); ++clip)
      for (int rec : segments[clip]) out << rec << ',' << clip << '\n';
  });
}

SegmentMap read_segment_map(const std::filesystem::path& path, int n_clips) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open segment map: ", path.string()));
  SegmentMap map(static_cast<std::size_t>(n_clips));
  std::string line;
  std::size_t line_no = 0;
  int expected_record = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line_no == 1 && trim(line) == "record,clip") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw FormatError(cat("segment map line ", line_no, ": expected 2 fields"));
    const int rec = std::stoi(trim(fields[0]));
    const int clip = std::stoi(trim(fields[1]));
    if (rec != expected_record)
      throw CorruptionError(cat("segment map line ", line_no,
                                ": record ids must be dense, expected ",
                                expected_record, " got ", rec));
    if (clip < 0 || clip >= n_clips)
      throw CorruptionError(cat("segment map line ", line_no, ": clip id ", clip,
                                " out of range [0,", n_clips, ")"));
    map[static_cast<std::size_t>(clip)].push_back(rec);
    ++expected_record;
  }
  return map;
}

}  // namespace pafs::data
