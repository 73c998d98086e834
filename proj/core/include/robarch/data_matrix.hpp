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

#include "robarch/common.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace robarch {

/// n x m observation matrix with row and column labels. Entries are finite,
/// labels unique; the constructor enforces both.
class DataMatrix {
 public:
  /// Empty labels are replaced by "r1".."rn" / "v1".."vm".
  explicit DataMatrix(Matrix values, std::vector<std::string> row_labels = {},
                      std::vector<std::string> col_labels = {});

  const Matrix& values() const noexcept { return values_; }
  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }
  const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
  const std::vector<std::string>& col_labels() const noexcept { return col_labels_; }

  /// Header row carries the column labels (its first cell is ignored); the
  /// first column of every later row is the row label.
  static DataMatrix read_csv(const std::filesystem::path& path);
  void write_csv(const std::filesystem::path& path) const;

 private:
  Matrix values_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
};

/// Writes a bare matrix with the given labels (same layout as DataMatrix CSV).
void write_matrix_csv(const std::filesystem::path& path, const Matrix& values,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels);

std::vector<std::string> default_labels(const std::string& prefix, Index count);

}  // namespace robarch
