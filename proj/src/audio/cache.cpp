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

#include "pafs/audio/cache.hpp"

#include <cstring>
#include <fstream>

#include "pafs/errors.hpp"
#include "pafs/io_util.hpp"

namespace pafs::audio {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'F', 'S', 'C', 'A', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint64_t kHeaderBytes = 8 + 4 * 3 + 4 + 4 + 4;

using RowMajorF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

void write_cache(const std::filesystem::path& path, const SpectrogramCache& cache) {
  for (const auto& rec : cache.records) {
    if (rec.values.rows() != static_cast<Eigen::Index>(cache.n_mels) ||
        rec.values.cols() != static_cast<Eigen::Index>(cache.n_frames))
      throw ContractError(cat("write_cache: record shape ", rec.values.rows(), "x",
                              rec.values.cols(), " does not match header ",
                              cache.n_mels, "x", cache.n_frames));
  }
  atomic_write(path, [&](std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::uint32_t>(out, cache.n_mels);
    write_le<std::uint32_t>(out, cache.n_frames);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(cache.records.size()));
    write_le<float>(out, static_cast<float>(cache.stats.mean));
    write_le<float>(out, static_cast<float>(cache.stats.std));
    for (const auto& rec : cache.records) {
      write_le<std::uint32_t>(out, rec.class_id);
      RowMajorF rm = rec.values;
      out.write(reinterpret_cast<const char*>(rm.data()),
                static_cast<std::streamsize>(sizeof(float) * rm.size()));
    }
  });
}

SpectrogramCache read_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError(cat("cannot open cache file: ", path.string()));
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);

  char magic[8];
  if (!in.read(magic, sizeof(magic)))
    throw CorruptionError(cat("cache truncated before magic: ", path.string()));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError(cat("not a spectrogram cache: ", path.string()));
  const auto version = read_le<std::uint32_t>(in);
  if (version != kVersion)
    throw FormatError(cat("unsupported cache version ", version, " in ", path.string()));

  SpectrogramCache cache;
  cache.n_mels = read_le<std::uint32_t>(in);
  cache.n_frames = read_le<std::uint32_t>(in);
  const auto count = read_le<std::uint32_t>(in);
  cache.stats.mean = read_le<float>(in);
  cache.stats.std = read_le<float>(in);

  const std::uint64_t cells =
      static_cast<std::uint64_t>(cache.n_mels) * cache.n_frames;
  const std::uint64_t expected =
      kHeaderBytes + static_cast<std::uint64_t>(count) * (4 + cells * sizeof(float));
  if (file_size != expected)
    throw CorruptionError(cat("cache size mismatch in ", path.string(), ": have ",
                              file_size, " bytes, header implies ", expected));

  cache.records.resize(count);
  RowMajorF rm(cache.n_mels, cache.n_frames);
  for (auto& rec : cache.records) {
    rec.class_id = read_le<std::uint32_t>(in);
    if (!in.read(reinterpret_cast<char*>(rm.data()),
                 static_cast<std::streamsize>(sizeof(float) * cells)))
      throw CorruptionError(cat("cache truncated mid-record: ", path.string()));
    rec.values = rm;
  }
  return cache;
}

}  // namespace pafs::audio
