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

#include "pafs/data/manifest.hpp"

#include <fstream>
#include <unordered_map>

#include "pafs/common.hpp"
#include "pafs/csv.hpp"
#include "pafs/errors.hpp"
#include "pafs/io_util.hpp"

namespace pafs::data {

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw FormatError(cat("unknown split '", s, "' (expected train, val or test)"));
}

std::filesystem::path Manifest::resolve(const ManifestRow& row) const {
  std::filesystem::path p(row.path);
  if (p.is_absolute()) return p;
  return source.parent_path() / p;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open manifest: ", path.string()));

  Manifest m;
  m.source = path;
  std::unordered_map<std::string, int> label_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (line_no == 1 && fields.size() == 3 && trim(fields[0]) == "path" &&
        trim(fields[1]) == "label" && trim(fields[2]) == "split")
      continue;
    if (fields.size() != 3)
      throw FormatError(cat("manifest line ", line_no, ": expected 3 fields, got ",
                            fields.size()));
    ManifestRow row;
    row.path = trim(fields[0]);
    row.label = trim(fields[1]);
    row.split = parse_split(trim(fields[2]));
    if (row.path.empty() || row.label.empty())
      throw FormatError(cat("manifest line ", line_no, ": empty path or label"));
    auto [it, inserted] =
        label_ids.emplace(row.label, static_cast<int>(m.class_names.size()));
    if (inserted) m.class_names.push_back(row.label);
    row.class_id = it->second;
    m.rows.push_back(std::move(row));
  }
  return m;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRow>& rows) {
  atomic_write(path, [&](std::ostream& out) {
    out << "path,label,split\n";
    for (const auto& row : rows)
      out << row.path << ',' << row.label << ',' << split_name(row.split) << '\n';
  });
}

}  // namespace pafs::data
