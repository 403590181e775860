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

#pragma once

#include <string>

#include "varflow/signal/spectral.hpp"

namespace varflow::data {

/// Mono 32-bit float WAV.
void write_wav(const std::string& path, const signal::Waveform& w);

/// Reads 16-bit PCM or 32-bit float WAV; multi-channel input is averaged.
signal::Waveform read_wav(const std::string& path);

}  // namespace varflow::data
