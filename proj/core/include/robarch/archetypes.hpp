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
#include "robarch/data_matrix.hpp"
#include "robarch/loss.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace robarch {

/// A fitted archetype (AA) or archetypoid (ADA) decomposition X ~ alpha * Z
/// with Z = beta * X.
struct ArchetypalModel {
  Matrix archetypes;  // k x m
  Matrix alpha;       // n x k, rows on the simplex
  Matrix beta;        // k x n, rows on the simplex (unit indicators for ADA)
  double objective = 0.0;
  LossSpec loss;
  std::optional<std::vector<Index>> members;  // archetypoid row indices

  Index k() const noexcept { return archetypes.rows(); }
  bool is_archetypoid() const noexcept { return members.has_value(); }
};

struct FitOptions {
  int restarts = 10;
  int max_iters = 100;
  double rel_tol = 1e-6;
  std::uint64_t seed = 1;
  double penalty_weight = 200.0;

  void validate() const;
};

/// Best of opts.restarts alternating-minimization runs (squared loss).
/// Each restart draws beta rows from a flat Dirichlet. Throws InputError for
/// k outside [1, n].
ArchetypalModel fit_aa(const DataMatrix& data, Index k, const FitOptions& opts);

/// As fit_aa, plus one extra restart per supplied k x n starting beta.
ArchetypalModel fit_aa(const DataMatrix& data, Index k, const FitOptions& opts,
                       const std::vector<Matrix>& initial_betas);

/// Sum over cases of |x_i - sum_j alpha_ij z_j|^2.
double compute_rss(const DataMatrix& data, const ArchetypalModel& model);

/// Euclidean norms |x_i - sum_j alpha_ij z_j| for every case.
Vector residual_norms(const Matrix& x, const Matrix& alpha, const Matrix& archetypes);

struct ElbowPoint {
  Index k = 0;
  double objective = 0.0;
};

struct ElbowCurve {
  std::vector<ElbowPoint> points;
  // k at the largest second difference of log(objective) (of the raw curve
  // when some objective is zero); unset when the scan has fewer than three
  // points. Advisory only.
  std::optional<Index> suggested_k;
};

/// Fits k = k_min..k_max, warm-starting each k from the previous solution
/// plus one random case, so objectives do not increase with k.
ElbowCurve elbow_scan(const DataMatrix& data, Index k_min, Index k_max, const FitOptions& opts);

/// Frobenius norm of Z_a - P Z_b where P is the archetype matching that
/// minimizes total Euclidean distance.
double model_distance(const ArchetypalModel& a, const ArchetypalModel& b);

/// Minimum-cost perfect matching on a square cost matrix; result[i] is the
/// column assigned to row i.
std::vector<Index> solve_assignment(const Matrix& cost);

namespace detail {

struct AlternatingState {
  Matrix alpha;       // n x k
  Matrix beta;        // k x n
  Matrix archetypes;  // k x m
};

/// Workspace shared by the alternating steps of one fit: the case Gram X X'.
struct CaseGram {
  explicit CaseGram(const Matrix& x) : gram(x * x.transpose()) {}
  Matrix gram;
};

Matrix dirichlet_rows(Index rows, Index cols, std::mt19937_64& rng);

/// Best alpha for fixed archetypes, case by case. Rows whose new weights
/// would not lower their residual keep the old ones.
void alpha_step(const Matrix& x, AlternatingState& state, double penalty_weight);

/// Block-coordinate update of each archetype under case weights w
/// (weighted RSS sum_i w_i |r_i|^2). Updates that would raise the weighted
/// RSS are rejected.
void beta_step(const Matrix& x, const CaseGram& gram, const Vector& weights,
               AlternatingState& state, double penalty_weight);

double weighted_rss(const Matrix& x, const Vector& weights, const AlternatingState& state);

/// One squared-loss run from a starting beta. `trace`, when given, receives
/// the objective after every iteration.
AlternatingState run_alternating(const Matrix& x, const CaseGram& gram, Matrix start_beta,
                                 const FitOptions& opts, std::vector<double>* trace = nullptr);

}  // namespace detail

}  // namespace robarch
