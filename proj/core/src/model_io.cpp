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

#include "robarch/model_io.hpp"

#include <fstream>
#include <sstream>

namespace robarch {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, const char* name) {
  if (!rows.is_array()) throw InputError(std::string("model field '") + name + "' must be an array");
  const auto n = static_cast<Index>(rows.size());
  const Index m = n > 0 ? static_cast<Index>(rows[0].size()) : 0;
  Matrix out(n, m);
  for (Index i = 0; i < n; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != m) {
      throw InputError(std::string("model field '") + name + "' is not rectangular");
    }
    for (Index j = 0; j < m; ++j) out(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return out;
}

}  // namespace

json model_to_json(const ModelFile& file) {
  const ArchetypalModel& model = file.model;
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = model.is_archetypoid() ? "archetypoids" : "archetypes";
  doc["k"] = model.k();
  doc["objective"] = model.objective;
  json loss;
  loss["family"] = model.loss.is_robust() ? "bisquare" : "squared";
  if (model.loss.is_robust()) loss["policy"] = model.loss.policy.to_string();
  loss["resolved_c"] = model.loss.resolved_c ? json(*model.loss.resolved_c) : json(nullptr);
  doc["loss"] = loss;
  if (model.members) {
    json idx = json::array();
    json labels = json::array();
    for (Index m : *model.members) {
      idx.push_back(m);
      labels.push_back(file.record_labels.at(static_cast<std::size_t>(m)));
    }
    doc["member_indices"] = idx;
    doc["member_labels"] = labels;
  }
  doc["record_labels"] = file.record_labels;
  doc["column_labels"] = file.column_labels;
  doc["archetypes"] = matrix_to_json(model.archetypes);
  doc["alpha"] = matrix_to_json(model.alpha);
  doc["beta"] = matrix_to_json(model.beta);
  return doc;
}

ModelFile model_from_json(const json& doc) {
  try {
    ModelFile file;
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw InputError("unsupported model format version");
    }
    file.record_labels = doc.at("record_labels").get<std::vector<std::string>>();
    file.column_labels = doc.at("column_labels").get<std::vector<std::string>>();
    ArchetypalModel& model = file.model;
    model.archetypes = matrix_from_json(doc.at("archetypes"), "archetypes");
    model.alpha = matrix_from_json(doc.at("alpha"), "alpha");
    model.beta = matrix_from_json(doc.at("beta"), "beta");
    model.objective = doc.at("objective").get<double>();
    const json& loss = doc.at("loss");
    const std::string family = loss.at("family").get<std::string>();
    if (family == "bisquare") {
      model.loss = LossSpec::bisquare(TuningPolicy::parse(loss.at("policy").get<std::string>()));
    } else if (family != "squared") {
      throw InputError("unknown loss family '" + family + "'");
    }
    if (loss.contains("resolved_c") && !loss["resolved_c"].is_null()) {
      model.loss.resolved_c = loss["resolved_c"].get<double>();
    }
    if (doc.contains("member_indices")) {
      model.members = doc["member_indices"].get<std::vector<Index>>();
    }
    const Index k = doc.at("k").get<Index>();
    const auto n = static_cast<Index>(file.record_labels.size());
    if (model.archetypes.rows() != k || model.alpha.rows() != n || model.alpha.cols() != k ||
        model.beta.rows() != k || model.beta.cols() != n ||
        model.archetypes.cols() != static_cast<Index>(file.column_labels.size()) ||
        (model.members && static_cast<Index>(model.members->size()) != k)) {
      throw InputError("model dimensions are inconsistent");
    }
    if (model.members) {
      for (Index m : *model.members) {
        if (m < 0 || m >= n) throw InputError("archetypoid index out of range");
      }
    }
    return file;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_model_json(const std::filesystem::path& path, const ModelFile& file) {
  write_text(path, model_to_json(file).dump(2) + "\n");
}

ModelFile read_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace robarch
