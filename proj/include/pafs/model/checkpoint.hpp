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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "pafs/audio/stats.hpp"
#include "pafs/errors.hpp"
#include "pafs/io_util.hpp"
#include "pafs/model/params.hpp"

namespace pafs::model {

/// Checkpoint layout (little-endian):
///   [8-byte magic "PAFSCKPT"][u32 version=1][u8 scalar_size]
///   [f64 stats.mean][f64 stats.std][u64 config_len][config bytes]
///   [u32 param_count] then per tensor
///   [u32 name_len][name][u32 rows][u32 cols][rows*cols scalars row-major].
struct CheckpointInfo {
  std::string config_text;
  audio::GlobalStats stats;
  int scalar_size = 0;
};

namespace checkpoint_detail {
constexpr char kMagic[8] = {'P', 'A', 'F', 'S', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

inline std::ifstream open_and_check(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(cat("cannot open checkpoint: ", path.string()));
  char magic[8];
  if (!in.read(magic, sizeof(magic)))
    throw CorruptionError(cat("checkpoint truncated before magic: ", path.string()));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError(cat("not a checkpoint file: ", path.string()));
  const auto version = read_le<std::uint32_t>(in);
  if (version != kVersion)
    throw FormatError(cat("unsupported checkpoint version ", version));
  return in;
}

inline CheckpointInfo read_info(std::istream& in) {
  CheckpointInfo info;
  info.scalar_size = read_le<std::uint8_t>(in);
  if (info.scalar_size != 4 && info.scalar_size != 8)
    throw CorruptionError(cat("checkpoint scalar size ", info.scalar_size,
                              " is neither 4 nor 8"));
  info.stats.mean = read_le<double>(in);
  info.stats.std = read_le<double>(in);
  const auto config_len = read_le<std::uint64_t>(in);
  if (config_len > (std::uint64_t{1} << 24))
    throw CorruptionError("checkpoint config blob implausibly large");
  info.config_text.resize(config_len);
  if (config_len > 0 &&
      !in.read(info.config_text.data(), static_cast<std::streamsize>(config_len)))
    throw CorruptionError("checkpoint truncated inside config blob");
  return info;
}
}  // namespace checkpoint_detail

template <typename Scalar>
void save_checkpoint(const std::filesystem::path& path, ParamRegistry<Scalar>& reg,
                     const std::string& config_text, const audio::GlobalStats& stats) {
  atomic_write(path, [&](std::ostream& out) {
    out.write(checkpoint_detail::kMagic, sizeof(checkpoint_detail::kMagic));
    write_le<std::uint32_t>(out, checkpoint_detail::kVersion);
    write_le<std::uint8_t>(out, sizeof(Scalar));
    write_le<double>(out, stats.mean);
    write_le<double>(out, stats.std);
    write_le<std::uint64_t>(out, config_text.size());
    out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(reg.size()));
    for (std::size_t i = 0; i < reg.size(); ++i) {
      const auto& p = reg.at(i);
      write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
      out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
      write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rows()));
      write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.cols()));
      for (Eigen::Index r = 0; r < p.value.rows(); ++r)
        for (Eigen::Index c = 0; c < p.value.cols(); ++c)
          write_le<Scalar>(out, p.value(r, c));
    }
  });
}

/// Header, stats and config blob only; used to rebuild the model before
/// loading tensors.
inline CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  auto in = checkpoint_detail::open_and_check(path);
  return checkpoint_detail::read_info(in);
}

/// Fills every registry tensor from the file. Names must match registration
/// order exactly and shapes must agree.
template <typename Scalar>
CheckpointInfo load_checkpoint(const std::filesystem::path& path,
                               ParamRegistry<Scalar>& reg) {
  auto in = checkpoint_detail::open_and_check(path);
  CheckpointInfo info = checkpoint_detail::read_info(in);

  const auto count = read_le<std::uint32_t>(in);
  if (count != reg.size())
    throw CorruptionError(cat("checkpoint holds ", count, " tensors, model has ",
                              reg.size()));
  for (std::size_t i = 0; i < reg.size(); ++i) {
    auto& p = reg.at(i);
    const auto name_len = read_le<std::uint32_t>(in);
    std::string name(name_len, '\0');
    if (name_len > 0 && !in.read(name.data(), static_cast<std::streamsize>(name_len)))
      throw CorruptionError("checkpoint truncated inside tensor name");
    if (name != p.name)
      throw CorruptionError(cat("checkpoint tensor ", i, " is '", name,
                                "', model expects '", p.name, "'"));
    const auto rows = read_le<std::uint32_t>(in);
    const auto cols = read_le<std::uint32_t>(in);
    if (rows != static_cast<std::uint32_t>(p.value.rows()) ||
        cols != static_cast<std::uint32_t>(p.value.cols()))
      throw CorruptionError(cat("checkpoint tensor '", name, "' is ", rows, "x", cols,
                                ", model expects ", p.value.rows(), "x",
                                p.value.cols()));
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c) {
        if (info.scalar_size == 4)
          p.value(r, c) = static_cast<Scalar>(read_le<float>(in));
        else
          p.value(r, c) = static_cast<Scalar>(read_le<double>(in));
      }
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw CorruptionError(cat("checkpoint has trailing bytes: ", path.string()));
  return info;
}

}  // namespace pafs::model
