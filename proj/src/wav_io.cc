// vprivacy/wav_io.cc

// Copyright 2026 The vprivacy Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstring>

#include "binary_io.h"
#include "vprivacy/formant_shift.h"

namespace vprivacy {

using internal::GetLe;
using internal::PutLe;

WaveBuffer ReadWav(const std::string &path) {
  auto is = internal::OpenForRead(path, true);
  auto fail = [&](const std::string &msg) -> Error {
    return Error(path + ": " + msg);
  };
  char tag[4];
  if (!is.read(tag, 4) || std::memcmp(tag, "RIFF", 4) != 0)
    throw fail("not a RIFF file");
  GetLe<uint32_t>(is, "RIFF size");
  if (!is.read(tag, 4) || std::memcmp(tag, "WAVE", 4) != 0)
    throw fail("not a WAVE file");

  bool have_fmt = false;
  uint32_t sample_rate = 0;
  while (is.read(tag, 4)) {
    uint32_t size = GetLe<uint32_t>(is, "chunk size");
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw fail("fmt chunk too short");
      uint16_t format = GetLe<uint16_t>(is, "format");
      uint16_t channels = GetLe<uint16_t>(is, "channels");
      sample_rate = GetLe<uint32_t>(is, "sample rate");
      GetLe<uint32_t>(is, "byte rate");
      GetLe<uint16_t>(is, "block align");
      uint16_t bits = GetLe<uint16_t>(is, "bits per sample");
      if (format != 1) throw fail("only PCM WAV is supported");
      if (channels != 1) throw fail("only mono WAV is supported");
      if (bits != 16) throw fail("only 16-bit WAV is supported");
      if (sample_rate == 0) throw fail("sample rate is zero");
      is.ignore(size - 16 + (size & 1));
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      WaveBuffer wave;
      wave.sample_rate = static_cast<int>(sample_rate);
      wave.samples.resize(size / 2);
      for (double &s : wave.samples)
        s = static_cast<int16_t>(GetLe<uint16_t>(is, "samples")) / 32768.0;
      return wave;
    } else {
      is.ignore(size + (size & 1));
    }
  }
  throw fail("no data chunk");
}

void WriteWav(const WaveBuffer &wave, const std::string &path) {
  if (wave.sample_rate <= 0) throw Error("sample rate must be positive");
  auto os = internal::OpenForWrite(path, true);
  const uint32_t data_bytes = static_cast<uint32_t>(wave.samples.size() * 2);
  os.write("RIFF", 4);
  PutLe<uint32_t>(os, 36 + data_bytes);
  os.write("WAVEfmt ", 8);
  PutLe<uint32_t>(os, 16);
  PutLe<uint16_t>(os, 1);  // PCM
  PutLe<uint16_t>(os, 1);  // mono
  PutLe<uint32_t>(os, static_cast<uint32_t>(wave.sample_rate));
  PutLe<uint32_t>(os, static_cast<uint32_t>(wave.sample_rate) * 2);
  PutLe<uint16_t>(os, 2);
  PutLe<uint16_t>(os, 16);
  os.write("data", 4);
  PutLe<uint32_t>(os, data_bytes);
  for (double s : wave.samples) {
    double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
    PutLe<int16_t>(os, static_cast<int16_t>(scaled));
  }
  internal::FinishWrite(os, path);
}

}  // namespace vprivacy
