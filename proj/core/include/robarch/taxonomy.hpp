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

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace robarch {

struct TaxonomyConfig {
  double threshold = 0.8;  // U, must lie in (0.5, 1]
  void validate() const;
};

enum class ClusterKind { pure, pair, mixture, unassigned };

/// Archetype indices are 0-based; `second` is only set for pairs.
struct ClusterLabel {
  ClusterKind kind = ClusterKind::unassigned;
  Index first = -1;
  Index second = -1;
  /// "pure(1)", "pair(1,2)", "mixture", "unassigned" with 1-based indices.
  std::string to_string() const;
  bool operator==(const ClusterLabel&) const = default;
};

struct ClusterAssignment {
  Index k = 0;
  std::vector<ClusterLabel> labels;              // one per record
  std::vector<std::vector<Index>> pure;          // k lists
  std::map<std::pair<Index, Index>, std::vector<Index>> pairs;  // all C(k,2) keys
  std::vector<Index> mixtures;
  std::vector<Index> unassigned;
};

/// Pure if some alpha_ij >= U; otherwise pair if exactly one unordered pair
/// reaches U, mixture if several do, unassigned if none.
ClusterAssignment assign_clusters(const Matrix& alpha, const TaxonomyConfig& config);

/// Per-sector column sums of alpha, normalized to one. Sectors appear in
/// sorted order; sectors without records are omitted.
struct SectorWeights {
  std::vector<std::string> sectors;
  Matrix weights;  // sectors x k
};
SectorWeights sector_weights(const Matrix& alpha, const std::vector<std::string>& sectors);
void write_sector_weights(const std::filesystem::path& path, const SectorWeights& weights);

enum class NetworkFormat { dot, json };
NetworkFormat parse_network_format(const std::string& text);

/// Record nodes carry sector, label and an archetypoid flag. Pure records get
/// one edge to their archetypoid, pair records one edge to each; mixtures and
/// unassigned records get none. Models without archetypoids export extra
/// nodes A1..Ak as edge targets.
void export_network(const ClusterAssignment& assignment, const ArchetypalModel& model,
                    const std::vector<std::string>& record_labels,
                    const std::vector<std::string>& sectors, const std::filesystem::path& path,
                    NetworkFormat format);

}  // namespace robarch
