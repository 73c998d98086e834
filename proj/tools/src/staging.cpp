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

#include "robarch_cli/staging.hpp"

#include "robarch/common.hpp"

#include <atomic>
#include <system_error>
#include <unistd.h>

namespace robarch::cli {

namespace fs = std::filesystem;

Staging::Staging(fs::path output_dir) : output_dir_(std::move(output_dir)) {
  static std::atomic<unsigned> counter{0};
  const fs::path parent = fs::absolute(output_dir_).parent_path();
  std::error_code ec;
  fs::create_directories(parent, ec);
  stage_ = parent / (".robarch-stage-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(stage_, ec);
  if (ec) throw IoError("cannot create staging directory " + stage_.string() + ": " + ec.message());
}

Staging::~Staging() {
  std::error_code ec;
  fs::remove_all(stage_, ec);
}

fs::path Staging::file(const std::string& name) {
  names_.push_back(name);
  return stage_ / name;
}

void Staging::commit() {
  if (committed_) return;
  std::error_code ec;
  fs::create_directories(output_dir_, ec);
  if (ec) throw IoError("cannot create output directory " + output_dir_.string() + ": " + ec.message());
  for (const auto& entry : fs::directory_iterator(stage_)) {
    const fs::path target = output_dir_ / entry.path().filename();
    fs::remove_all(target, ec);
    fs::rename(entry.path(), target, ec);
    if (ec) {
      fs::copy(entry.path(), target, fs::copy_options::recursive | fs::copy_options::overwrite_existing, ec);
      if (ec) throw IoError("cannot move output to " + target.string() + ": " + ec.message());
    }
  }
  committed_ = true;
}

}  // namespace robarch::cli
