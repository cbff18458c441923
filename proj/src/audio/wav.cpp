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

#include "pafs/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "pafs/errors.hpp"
#include "pafs/io_util.hpp"

namespace pafs::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::string read_tag(std::istream& is) {
  char tag[4];
  is.read(tag, 4);
  if (!is) throw FormatError("truncated WAV chunk header");
  return std::string(tag, 4);
}

double decode_sample(const unsigned char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat && bits == 32) {
    float f;
    std::memcpy(&f, p, 4);
    return static_cast<double>(f);
  }
  switch (bits) {
    case 16: {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      return static_cast<double>(v) / 32768.0;
    }
    case 24: {
      std::int32_t v = (p[0] << 8) | (p[1] << 16) | (static_cast<std::int32_t>(p[2]) << 24);
      v >>= 8;  // sign extend
      return static_cast<double>(v) / 8388608.0;
    }
    case 32: {
      std::int32_t v;
      std::memcpy(&v, p, 4);
      return static_cast<double>(v) / 2147483648.0;
    }
    default:
      throw FormatError("unsupported WAV bit depth: " + std::to_string(bits));
  }
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open audio file: " + path.string());

  if (read_tag(is) != "RIFF") throw FormatError("not a RIFF file: " + path.string());
  read_le<std::uint32_t>(is);  // RIFF size, unused
  if (read_tag(is) != "WAVE") throw FormatError("not a WAVE file: " + path.string());

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<unsigned char> data;

  while (is.peek() != EOF) {
    const std::string tag = read_tag(is);
    const auto chunk_size = read_le<std::uint32_t>(is);
    if (tag == "fmt ") {
      if (chunk_size < 16) throw FormatError("malformed fmt chunk");
      format = read_le<std::uint16_t>(is);
      channels = read_le<std::uint16_t>(is);
      sample_rate = read_le<std::uint32_t>(is);
      read_le<std::uint32_t>(is);  // byte rate
      read_le<std::uint16_t>(is);  // block align
      bits = read_le<std::uint16_t>(is);
      is.seekg(chunk_size - 16, std::ios::cur);
      if (format == kFormatExtensible) {
        // Sub-format is the first field of the extension GUID; the common
        // PCM/float GUIDs start with the plain format code.
        format = bits == 32 ? kFormatFloat : kFormatPcm;
      }
      have_fmt = true;
    } else if (tag == "data") {
      data.resize(chunk_size);
      if (chunk_size > 0) read_bytes(is, data.data(), chunk_size);
    } else {
      is.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }

  if (!have_fmt) throw FormatError("WAV file missing fmt chunk: " + path.string());
  if (channels == 0 || sample_rate == 0)
    throw FormatError("WAV file has invalid fmt fields: " + path.string());
  if (format != kFormatPcm && format != kFormatFloat)
    throw FormatError("unsupported WAV encoding " + std::to_string(format));
  if (format == kFormatFloat && bits != 32)
    throw FormatError("float WAV must be 32-bit");

  const int bytes_per_sample = bits / 8;
  const std::size_t n_samples = data.size() / static_cast<std::size_t>(bytes_per_sample);
  if (n_samples == 0) throw EmptyInputError("zero-length audio: " + path.string());

  WavData out;
  out.sample_rate = static_cast<int>(sample_rate);
  out.channels = static_cast<int>(channels);
  out.interleaved.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    out.interleaved[i] =
        decode_sample(data.data() + i * static_cast<std::size_t>(bytes_per_sample), format, bits);
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const std::vector<double>& samples,
               int sample_rate) {
  const std::uint32_t n = static_cast<std::uint32_t>(samples.size());
  const std::uint32_t data_bytes = n * 2;
  atomic_write(path, [&](std::ostream& os) {
    write_bytes(os, "RIFF", 4);
    write_le<std::uint32_t>(os, 36 + data_bytes);
    write_bytes(os, "WAVE", 4);
    write_bytes(os, "fmt ", 4);
    write_le<std::uint32_t>(os, 16);
    write_le<std::uint16_t>(os, kFormatPcm);
    write_le<std::uint16_t>(os, 1);  // mono
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(sample_rate));
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(sample_rate) * 2);
    write_le<std::uint16_t>(os, 2);
    write_le<std::uint16_t>(os, 16);
    write_bytes(os, "data", 4);
    write_le<std::uint32_t>(os, data_bytes);
    for (double s : samples) {
      const double clamped = std::clamp(s, -1.0, 1.0);
      const auto v = static_cast<std::int16_t>(std::lrint(clamped * 32767.0));
      write_le<std::int16_t>(os, v);
    }
  });
}

}  // namespace pafs::audio
