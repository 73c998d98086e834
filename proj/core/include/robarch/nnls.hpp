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

namespace robarch {

/// Least squares over the probability simplex: find w >= 0, sum(w) = 1
/// minimizing |design * w - target|. Columns of the design are the atoms.
struct SimplexLsProblem {
  Matrix design;
  Vector target;
  double penalty_weight = 200.0;
};

struct SimplexLsResult {
  Vector weights;
  int iterations = 0;
  // Set when the design is identically zero; weights are then uniform.
  bool degenerate = false;
};

/// Iteration budget shared by the active-set phases: 3 * atoms + 30.
int simplex_iteration_cap(Index atoms);

/// Penalized Lawson-Hanson NNLS on the design augmented with a row of
/// penalty_weight (target penalty_weight), followed by an exact active-set
/// refinement of the sum-to-one constraint on the recovered support.
///
/// Throws InputError on shape problems or a non-positive penalty weight and
/// NumericError (carrying the iteration count) when the cap is exceeded.
SimplexLsResult solve_simplex_ls(const SimplexLsProblem& problem);

/// Same solver in normal-equation form: gram = A'A, cross = A'b. Used by the
/// fitters, which solve many small problems against one set of atoms.
SimplexLsResult solve_simplex_gram(const Matrix& gram, const Vector& cross,
                                   double penalty_weight = 200.0);

}  // namespace robarch
