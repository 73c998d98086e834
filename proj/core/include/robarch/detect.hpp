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
#include "robarch/fdbasis.hpp"
#include "robarch/simgen.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace robarch {

inline constexpr double kFenceMultiplier = 1.5;

/// Outcome of archetypoid-based outlier detection. flags[i] holds exactly
/// when residual_norms[i] > fence.
struct OutlierReport {
  Vector residual_norms;
  double q1 = 0.0;
  double q3 = 0.0;
  double fence = 0.0;
  std::vector<bool> flags;
  ArchetypalModel model;
};

/// Upper box-plot fence Q3 + 1.5 IQR (interpolated quartiles).
double upper_fence(std::span<const double> values, double* q1 = nullptr, double* q3 = nullptr);

/// Robust archetypoids with c = P50 of the nonzero residual norms, then the
/// upper box-plot fence on the residual norms.
OutlierReport radab(const FunctionalDataset& dataset, Index k, const FitOptions& opts);
/// Same on a matrix whose Euclidean row norms are the norms of interest.
OutlierReport radab(const DataMatrix& data, Index k, const FitOptions& opts);

struct DetectionMetrics {
  double tpr = 0.0;
  double fpr = 0.0;
  double mcc = 0.0;
};

/// TPR, FPR and Matthews correlation of flags against truth. TPR is 1 when
/// truth has no positives, FPR 0 when it has no negatives, and MCC 0 when
/// any confusion-matrix margin is empty.
DetectionMetrics score(const std::vector<bool>& flags, const std::vector<bool>& truth);

/// How simulated curves are turned into the matrix the fitters see.
struct CurveRepresentation {
  enum class Kind { grid, basis };
  Kind kind = Kind::grid;
  BasisFamily family = BasisFamily::cubic_bspline;
  Index m = 0;

  static CurveRepresentation grid() { return {}; }
  static CurveRepresentation basis(BasisFamily family, Index m) { return {Kind::basis, family, m}; }
  std::string to_string() const;
  static CurveRepresentation parse(const std::string& text);
};

/// Grid values as-is, or basis coefficients rotated by the Gram factor.
DataMatrix represent_curves(const ContaminatedData& data, const CurveRepresentation& repr);

/// One row of an experiment table.
struct ExperimentRow {
  std::string policy;  // "squared" or a tuning-policy string
  double cr = 0.0;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
  std::vector<std::uint64_t> seeds;

  /// Columns policy,cr,metric,mean,sd.
  void write_csv(const std::filesystem::path& path) const;
  const ExperimentRow* find(const std::string& policy, const std::string& metric) const;
};

struct ExperimentConfig {
  ContaminationSpec spec;
  Index k = 2;
  Index replicates = 100;
  std::uint64_t base_seed = 1;
  FitOptions fit;
  CurveRepresentation representation;
};

/// Percentage of replicates in which some contaminated curve is selected as
/// an archetypoid: squared-loss ADA first, then robust ADA per policy.
/// Replicate r uses data seed base_seed + r.
ExperimentTable inclusion_experiment(const ExperimentConfig& config,
                                     const std::vector<TuningPolicy>& policies);

/// Mean and sd of TPR, FPR (both in percent) and MCC of RADAB over replicates.
ExperimentTable radab_experiment(const ExperimentConfig& config);

}  // namespace robarch
