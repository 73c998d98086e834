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
#include "robarch/loss.hpp"

#include <vector>

namespace robarch {

/// Robust AA: alternating fits with case weights w_i = bisquare_weight(|r_i|, c),
/// c re-resolved from the residual norms at every outer iteration. Stops
/// when the relative change of sum rho_c within an iteration falls below
/// opts.rel_tol, or after 50 outer iterations. model.objective is
/// sum rho_c at the final residuals with c resolved from them.
ArchetypalModel fit_robust_aa(const DataMatrix& data, Index k, const FitOptions& opts,
                              const LossSpec& loss);

/// Where the BUILD phase of robust ADA takes its AA solution from.
enum class RobustBuild { robust_aa, squared_aa };

/// Robust ADA: BUILD from an AA fit, c resolved once from that fit's
/// residual norms, then SWAP on sum rho_c with c held fixed.
ArchetypalModel fit_robust_ada(const DataMatrix& data, Index k, const FitOptions& opts,
                               const LossSpec& loss, RobustBuild build = RobustBuild::robust_aa);

inline constexpr int kMaxOuterIterations = 50;

namespace detail {

/// sum rho_c before and after one weighted pass, both at that pass's c.
struct IrlsStep {
  double c = 0.0;
  double before = 0.0;
  double after = 0.0;
};

/// One robust AA run from a starting beta.
AlternatingState run_irls(const Matrix& x, const CaseGram& gram, Matrix start_beta,
                          const FitOptions& opts, const LossSpec& loss,
                          std::vector<IrlsStep>* trace = nullptr);

/// Same fit on a raw matrix (used by the functional layer).
ArchetypalModel fit_robust_aa(const Matrix& x, Index k, const FitOptions& opts,
                              const LossSpec& loss);

}  // namespace detail

}  // namespace robarch
