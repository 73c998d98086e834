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

#include <filesystem>
#include <string>
#include <vector>

namespace robarch::cli {

/// Collects a run's outputs in a hidden sibling directory and moves them into
/// the output directory only on commit(), so failed runs leave nothing behind.
class Staging {
 public:
  explicit Staging(std::filesystem::path output_dir);
  ~Staging();
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  /// Path inside the staging area; the name is recorded as an output.
  std::filesystem::path file(const std::string& name);
  /// Staging directory itself, for writers that lay out several files.
  const std::filesystem::path& root() const noexcept { return stage_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  void commit();

 private:
  std::filesystem::path output_dir_;
  std::filesystem::path stage_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

}  // namespace robarch::cli
