// Copyright 2026 The varflow Authors
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

#include "varflow/data/wav.hpp"

#include <cmath>

#include "varflow/errors.hpp"
#include "varflow/util/binary_io.hpp"

namespace varflow::data {

void write_wav(const std::string& path, const signal::Waveform& w) {
  if (w.sample_rate <= 0) throw DataError("cannot write a WAV with a non-positive sample rate");
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  io::ByteWriter b;
  b.put_bytes("RIFF");
  b.put<std::uint32_t>(36 + 4 * n);
  b.put_bytes("WAVE");
  b.put_bytes("fmt ");
  b.put<std::uint32_t>(16);
  b.put<std::uint16_t>(3);  // IEEE float
  b.put<std::uint16_t>(1);
  b.put<std::uint32_t>(static_cast<std::uint32_t>(w.sample_rate));
  b.put<std::uint32_t>(static_cast<std::uint32_t>(w.sample_rate) * 4);
  b.put<std::uint16_t>(4);
  b.put<std::uint16_t>(32);
  b.put_bytes("data");
  b.put<std::uint32_t>(4 * n);
  for (double s : w.samples) b.put(static_cast<float>(s));
  io::write_file(path, b.bytes());
}

signal::Waveform read_wav(const std::string& path) {
  const std::vector<std::uint8_t> bytes = io::read_file(path);
  io::ByteReader r(bytes, "wav '" + path + "'");
  if (r.get_bytes(4) != "RIFF") throw DataError(path + ": not a RIFF file");
  r.get<std::uint32_t>();
  if (r.get_bytes(4) != "WAVE") throw DataError(path + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    const std::string id = r.get_bytes(4);
    const auto size = r.get<std::uint32_t>();
    if (id == "fmt ") {
      format = r.get<std::uint16_t>();
      channels = r.get<std::uint16_t>();
      rate = r.get<std::uint32_t>();
      r.get<std::uint32_t>();
      r.get<std::uint16_t>();
      bits = r.get<std::uint16_t>();
      if (size > 16) r.get_bytes(size - 16);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw DataError(path + ": data chunk before fmt chunk");
      if (channels == 0) throw DataError(path + ": zero channels");
      const bool is_float = format == 3 && bits == 32;
      const bool is_pcm16 = format == 1 && bits == 16;
      if (!is_float && !is_pcm16) {
        throw DataError(path + ": unsupported sample format " + std::to_string(format) + "/" + std::to_string(bits));
      }
      const std::size_t width = bits / 8;
      const std::size_t frames = size / (width * channels);
      signal::Waveform w;
      w.sample_rate = static_cast<int>(rate);
      w.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
          acc += is_float ? static_cast<double>(r.get<float>()) : r.get<std::int16_t>() / 32768.0;
        }
        w.samples[i] = acc / channels;
      }
      return w;
    } else {
      r.get_bytes(size + (size & 1u));
    }
  }
  throw DataError(path + ": no data chunk");
}

}  // namespace varflow::data
