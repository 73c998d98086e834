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

#include "robarch/data_matrix.hpp"

#include "robarch/csv.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace robarch {

namespace csv {

Row split_line(std::string_view line) {
  Row out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::vector<Row> read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(split_line(line));
  }
  return rows;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string join(const Row& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n") != std::string::npos) {
      out.push_back('"');
      for (char ch : f) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
      }
      out.push_back('"');
    } else {
      out += f;
    }
  }
  return out;
}

}  // namespace csv

std::vector<std::string> default_labels(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i + 1));
  return out;
}

namespace {

void check_unique(const std::vector<std::string>& labels, const char* what) {
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw InputError(std::string("duplicate ") + what + " label '" + l + "'");
    }
  }
}

}  // namespace

DataMatrix::DataMatrix(Matrix values, std::vector<std::string> row_labels,
                       std::vector<std::string> col_labels)
    : values_(std::move(values)),
      row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw InputError("data matrix must have at least one row and one column");
  }
  if (!values_.allFinite()) throw InputError("data matrix contains non-finite entries");
  if (row_labels_.empty()) row_labels_ = default_labels("r", values_.rows());
  if (col_labels_.empty()) col_labels_ = default_labels("v", values_.cols());
  if (static_cast<Index>(row_labels_.size()) != values_.rows() ||
      static_cast<Index>(col_labels_.size()) != values_.cols()) {
    throw InputError("label count does not match matrix shape");
  }
  check_unique(row_labels_, "row");
  check_unique(col_labels_, "column");
}

DataMatrix DataMatrix::read_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.size() < 2) throw InputError(path.string() + ": need a header and at least one data row");
  const auto& header = rows.front();
  if (header.size() < 2) throw InputError(path.string() + ": header needs a label column and one variable");
  const std::size_t m = header.size() - 1;
  Matrix values(static_cast<Index>(rows.size() - 1), static_cast<Index>(m));
  std::vector<std::string> row_labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != m + 1) {
      std::ostringstream msg;
      msg << path.string() << ": line " << r + 1 << " has " << row.size() << " fields, expected "
          << m + 1;
      throw InputError(msg.str());
    }
    row_labels.push_back(row[0]);
    for (std::size_t c = 0; c < m; ++c) {
      double v = 0;
      if (!csv::parse_double(row[c + 1], v)) {
        throw InputError(path.string() + ": line " + std::to_string(r + 1) +
                         ": cannot parse '" + row[c + 1] + "'");
      }
      values(static_cast<Index>(r - 1), static_cast<Index>(c)) = v;
    }
  }
  return DataMatrix(std::move(values), std::move(row_labels),
                    std::vector<std::string>(header.begin() + 1, header.end()));
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& values,
                      const std::vector<std::string>& row_labels,
                      const std::vector<std::string>& col_labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  csv::Row header{"id"};
  header.insert(header.end(), col_labels.begin(), col_labels.end());
  out << csv::join(header) << '\n';
  for (Index i = 0; i < values.rows(); ++i) {
    csv::Row row{row_labels[static_cast<std::size_t>(i)]};
    for (Index j = 0; j < values.cols(); ++j) row.push_back(csv::format_double(values(i, j)));
    out << csv::join(row) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void DataMatrix::write_csv(const std::filesystem::path& path) const {
  write_matrix_csv(path, values_, row_labels_, col_labels_);
}

}  // namespace robarch
