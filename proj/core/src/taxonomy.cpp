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

#include "robarch/taxonomy.hpp"

#include "robarch/csv.hpp"
#include "robarch/model_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace robarch {

void TaxonomyConfig::validate() const {
  if (!(threshold > 0.5 && threshold <= 1.0)) {
    throw InputError("taxonomy threshold U must lie in (0.5, 1], got " + csv::format_double(threshold));
  }
}

std::string ClusterLabel::to_string() const {
  switch (kind) {
    case ClusterKind::pure:
      return "pure(" + std::to_string(first + 1) + ")";
    case ClusterKind::pair:
      return "pair(" + std::to_string(first + 1) + "," + std::to_string(second + 1) + ")";
    case ClusterKind::mixture:
      return "mixture";
    case ClusterKind::unassigned:
      break;
  }
  return "unassigned";
}

ClusterAssignment assign_clusters(const Matrix& alpha, const TaxonomyConfig& config) {
  config.validate();
  const Index n = alpha.rows();
  const Index k = alpha.cols();
  ClusterAssignment out;
  out.k = k;
  out.pure.resize(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) {
    for (Index l = j + 1; l < k; ++l) out.pairs[{j, l}];
  }
  const double u = config.threshold;
  for (Index i = 0; i < n; ++i) {
    ClusterLabel label;
    Index top = 0;
    alpha.row(i).maxCoeff(&top);
    if (alpha(i, top) >= u) {
      label = {ClusterKind::pure, top, -1};
      out.pure[static_cast<std::size_t>(top)].push_back(i);
    } else {
      int hits = 0;
      for (Index j = 0; j < k; ++j) {
        for (Index l = j + 1; l < k; ++l) {
          if (alpha(i, j) + alpha(i, l) >= u) {
            if (++hits == 1) label = {ClusterKind::pair, j, l};
          }
        }
      }
      if (hits == 1) {
        out.pairs[{label.first, label.second}].push_back(i);
      } else if (hits > 1) {
        label = {ClusterKind::mixture, -1, -1};
        out.mixtures.push_back(i);
      } else {
        out.unassigned.push_back(i);
      }
    }
    out.labels.push_back(label);
  }
  return out;
}

SectorWeights sector_weights(const Matrix& alpha, const std::vector<std::string>& sectors) {
  if (static_cast<Index>(sectors.size()) != alpha.rows()) {
    throw InputError("sector labels must match the records of alpha");
  }
  if (sectors.empty()) throw InputError("sector_weights needs at least one record");
  std::map<std::string, Vector> sums;
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    auto [it, inserted] = sums.try_emplace(sectors[i], Vector::Zero(alpha.cols()));
    it->second += alpha.row(static_cast<Index>(i)).transpose();
  }
  SectorWeights out;
  out.weights.resize(static_cast<Index>(sums.size()), alpha.cols());
  Index row = 0;
  for (const auto& [sector, sum] : sums) {
    const double total = sum.sum();
    if (!(total > 0.0)) throw NumericError("sector '" + sector + "' has zero total weight");
    out.sectors.push_back(sector);
    out.weights.row(row++) = (sum / total).transpose();
  }
  return out;
}

void write_sector_weights(const std::filesystem::path& path, const SectorWeights& weights) {
  std::vector<std::string> cols;
  for (Index j = 0; j < weights.weights.cols(); ++j) cols.push_back("archetype" + std::to_string(j + 1));
  write_matrix_csv(path, weights.weights, weights.sectors, cols);
}

NetworkFormat parse_network_format(const std::string& text) {
  if (text == "dot") return NetworkFormat::dot;
  if (text == "json") return NetworkFormat::json;
  throw InputError("network format must be dot or json, got '" + text + "'");
}

namespace {

struct Edge {
  std::string from;
  std::string to;
  std::string cluster;
};

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void export_network(const ClusterAssignment& assignment, const ArchetypalModel& model,
                    const std::vector<std::string>& record_labels,
                    const std::vector<std::string>& sectors, const std::filesystem::path& path,
                    NetworkFormat format) {
  const std::size_t n = assignment.labels.size();
  if (record_labels.size() != n || sectors.size() != n) {
    throw InputError("network export: labels and sectors must match the assignment");
  }
  if (model.k() != assignment.k) throw InputError("network export: model and assignment differ in k");
  std::vector<int> archetypoid_of(n, 0);
  std::vector<std::string> targets;
  for (Index j = 0; j < model.k(); ++j) {
    if (model.members) {
      const auto m = static_cast<std::size_t>((*model.members)[static_cast<std::size_t>(j)]);
      archetypoid_of[m] = static_cast<int>(j + 1);
      targets.push_back(record_labels[m]);
    } else {
      targets.push_back("A" + std::to_string(j + 1));
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    const ClusterLabel& label = assignment.labels[i];
    auto link = [&](Index j) {
      const std::string& to = targets[static_cast<std::size_t>(j)];
      if (to != record_labels[i]) edges.push_back({record_labels[i], to, label.to_string()});
    };
    if (label.kind == ClusterKind::pure) {
      link(label.first);
    } else if (label.kind == ClusterKind::pair) {
      link(label.first);
      link(label.second);
    }
  }

  std::ostringstream out;
  if (format == NetworkFormat::dot) {
    out << "graph archetypes {\n";
    for (std::size_t i = 0; i < n; ++i) {
      out << "  " << dot_quote(record_labels[i]) << " [sector=" << dot_quote(sectors[i])
          << ", label_type=" << dot_quote(assignment.labels[i].to_string())
          << ", archetypoid=" << (archetypoid_of[i] ? "true" : "false");
      if (archetypoid_of[i]) out << ", shape=box, style=filled";
      out << "];\n";
    }
    if (!model.members) {
      for (const auto& t : targets) out << "  " << dot_quote(t) << " [archetype=true, shape=diamond];\n";
    }
    for (const auto& e : edges) {
      out << "  " << dot_quote(e.from) << " -- " << dot_quote(e.to) << " [cluster=" << dot_quote(e.cluster)
          << "];\n";
    }
    out << "}\n";
  } else {
    nlohmann::json doc;
    doc["nodes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
      nlohmann::json node{{"id", record_labels[i]},
                          {"sector", sectors[i]},
                          {"label_type", assignment.labels[i].to_string()},
                          {"archetypoid", archetypoid_of[i] != 0}};
      if (archetypoid_of[i]) node["archetypoid_index"] = archetypoid_of[i];
      doc["nodes"].push_back(node);
    }
    if (!model.members) {
      for (const auto& t : targets) doc["nodes"].push_back({{"id", t}, {"archetype", true}});
    }
    doc["edges"] = nlohmann::json::array();
    for (const auto& e : edges) doc["edges"].push_back({{"source", e.from}, {"target", e.to}, {"cluster", e.cluster}});
    out << doc.dump(2) << "\n";
  }
  write_text(path, out.str());
}

}  // namespace robarch
