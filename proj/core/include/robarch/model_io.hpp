/*
 * Copyright 2026 The robarch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "robarch/archetypes.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace robarch {

/// A model together with the labels of the data it was fitted on.
struct ModelFile {
  ArchetypalModel model;
  std::vector<std::string> record_labels;
  std::vector<std::string> column_labels;
};

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const ModelFile& file);
/// Throws InputError when fields are missing or inconsistent.
ModelFile model_from_json(const nlohmann::json& doc);

void write_model_json(const std::filesystem::path& path, const ModelFile& file);
ModelFile read_model_json(const std::filesystem::path& path);

/// Writes text to a file, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace robarch
