/*
 * Copyright 2026 The LegalLens Pipeline Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Single-file model archive:
//   {"format": "legallens-checkpoint", "version": 1, "kind": "...",
//    "config": {...}, "meta": {...},
//    "tensors": [{"name": ..., "rows": r, "cols": c, "data": [...]}, ...]}
// Tensor data is row-major and written with round-trip double precision.

#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "legallens/nn/params.hpp"

namespace legallens::checkpoint {

inline constexpr int kFormatVersion = 1;

nlohmann::json tensors_to_json(const nn::ParamStore<double>& params);
nn::ParamStore<double> tensors_from_json(const nlohmann::json& tensors);

// Writes {format, version, kind} plus the given body fields.
void write(const std::filesystem::path& path, std::string_view kind,
           nlohmann::json body);
// Reads and checks format, version and kind; throws CheckpointMismatch.
nlohmann::json read(const std::filesystem::path& path, std::string_view kind);

}  // namespace legallens::checkpoint
