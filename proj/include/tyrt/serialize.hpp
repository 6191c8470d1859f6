/* Copyright 2026 The tyrt Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
/// \file
/// \brief The TYRT model container and its text manifest.
///
/// Layout (little-endian):
///   "TYRT" u16 format_version u16 flags
///   graph block   : header fields, u32 layer count, layer records
///   float block   : present when flags & kHasFloat
///   quant block   : present when flags & kHasQuant; activation qparams then
///                   int8 conv weights, int32 bias and weight qparams
/// Strings are u32 length + bytes.

#ifndef TYRT_SERIALIZE_HPP
#define TYRT_SERIALIZE_HPP

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "tyrt/graph.hpp"
#include "tyrt/program.hpp"

namespace tyrt {

inline constexpr uint16_t kFormatVersion = 1;
inline constexpr uint16_t kHasFloat = 1u << 0;
inline constexpr uint16_t kHasQuant = 1u << 1;

/// Malformed or unsupported model file.
class FormatError : public Error {
 public:
  using Error::Error;
};

struct Model {
  GraphSpec graph;
  WeightStore weights;
};

std::vector<uint8_t> encode_model(const Model& m);
Model decode_model(const std::vector<uint8_t>& bytes);

void save_model(const std::filesystem::path& path, const Model& m);
Model load_model(const std::filesystem::path& path);

/// Layer names, kinds, output shapes, params and MACs, plus totals.
void write_manifest(std::ostream& os, const Model& m);

}  // namespace tyrt

#endif  // TYRT_SERIALIZE_HPP
