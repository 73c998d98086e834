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

#include <vector>

namespace robarch {

/// The three BUILD starting sets derived from an AA solution.
struct CandidateSets {
  std::vector<Index> ns;     // case nearest to each archetype
  std::vector<Index> alpha;  // case with the largest alpha for each archetype
  std::vector<Index> beta;   // case with the largest beta for each archetype
};

/// Builds the three candidate sets. Within a set, an index already taken by
/// an earlier archetype is replaced by that archetype's next-best case.
CandidateSets candidate_sets(const DataMatrix& data, const ArchetypalModel& aa_model);
CandidateSets candidate_sets(const Matrix& x, const ArchetypalModel& aa_model);

/// Archetypoid analysis: AA for BUILD, then first-improvement SWAP from each
/// candidate set; the best refined set wins and alpha is refit against it.
/// A bisquare loss dispatches to fit_robust_ada.
ArchetypalModel fit_ada(const DataMatrix& data, Index k, const FitOptions& opts,
                        const LossSpec& loss = LossSpec::squared());

namespace detail {

/// Objective of archetypoid member sets, evaluated through the case Gram
/// matrix: alpha is refit for every case, then the loss is summed over the
/// residual norms.
class MemberObjective {
 public:
  MemberObjective(const Matrix& x, const CaseGram& gram, LossSpec loss, double penalty_weight);

  double operator()(const std::vector<Index>& members) const;
  /// Residual norms and alpha for a member set.
  Vector residual_norms(const std::vector<Index>& members, Matrix* alpha = nullptr) const;

  const LossSpec& loss() const noexcept { return loss_; }

 private:
  const Matrix& x_;
  const CaseGram& gram_;
  LossSpec loss_;
  double penalty_weight_;
};

struct SwapResult {
  std::vector<Index> members;
  double objective = 0.0;
  int accepted_swaps = 0;
};

/// First-improvement SWAP: positions in order, candidates in ascending index
/// order; only strictly improving exchanges are taken. Repeats full passes
/// until a pass accepts nothing.
SwapResult swap_refine(const MemberObjective& objective, std::vector<Index> members, Index n);

/// Runs SWAP from each candidate set and assembles the best model. Identical
/// candidate sets are refined once.
ArchetypalModel build_and_swap(const Matrix& x, const CaseGram& gram,
                               const ArchetypalModel& aa_model, const LossSpec& loss,
                               double penalty_weight,
                               std::vector<SwapResult>* per_candidate = nullptr);

/// Model for a fixed member set (alpha refit, beta indicators, Z = rows).
ArchetypalModel archetypoid_model(const Matrix& x, const CaseGram& gram,
                                  const std::vector<Index>& members, const LossSpec& loss,
                                  double penalty_weight);

}  // namespace detail

}  // namespace robarch
