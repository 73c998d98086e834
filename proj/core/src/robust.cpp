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

#include "robarch/robust.hpp"

#include "robarch/archetypoids.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace robarch {

namespace {

void require_bisquare(const LossSpec& loss) {
  if (!loss.is_robust()) throw InputError("robust fits need the bisquare loss");
}

void check_k(Index k, Index n) {
  if (k < 1 || k > n) {
    std::ostringstream msg;
    msg << "k = " << k << " must lie in [1, " << n << "]";
    throw InputError(msg.str());
  }
}

double rho_sum(const Vector& norms, double c) {
  double s = 0.0;
  for (Index i = 0; i < norms.size(); ++i) s += bisquare_loss(norms(i), c);
  return s;
}

ArchetypalModel finish(const Matrix& x, detail::AlternatingState state, const LossSpec& loss) {
  ArchetypalModel model;
  model.archetypes = state.beta * x;
  model.alpha = std::move(state.alpha);
  model.beta = std::move(state.beta);
  const Vector norms = residual_norms(x, model.alpha, model.archetypes);
  if (norms.maxCoeff() <= 0.0) {
    // Exact fit: c is undefined and the squared objective is already zero.
    model.loss = LossSpec::squared();
    model.objective = 0.0;
    return model;
  }
  model.loss = loss;
  model.loss.resolved_c = resolve_tuning(norms, loss.policy);
  model.objective = model.loss.total(norms);
  return model;
}

}  // namespace

namespace detail {

AlternatingState run_irls(const Matrix& x, const CaseGram& gram, Matrix start_beta,
                          const FitOptions& opts, const LossSpec& loss,
                          std::vector<IrlsStep>* trace) {
  AlternatingState state;
  state.beta = std::move(start_beta);
  state.archetypes = state.beta * x;
  alpha_step(x, state, opts.penalty_weight);
  Vector norms = residual_norms(x, state.alpha, state.archetypes);
  for (int outer = 0; outer < kMaxOuterIterations; ++outer) {
    if (norms.maxCoeff() <= 0.0) break;
    const double c = resolve_tuning(norms, loss.policy);
    Vector weights(norms.size());
    for (Index i = 0; i < norms.size(); ++i) weights(i) = bisquare_weight(norms(i), c);
    const double before = rho_sum(norms, c);
    beta_step(x, gram, weights, state, opts.penalty_weight);
    alpha_step(x, state, opts.penalty_weight);
    norms = residual_norms(x, state.alpha, state.archetypes);
    const double after = rho_sum(norms, c);
    if (trace) trace->push_back({c, before, after});
    const double change = std::abs(before - after) / std::max(before, std::numeric_limits<double>::min());
    if (change < opts.rel_tol) break;
  }
  return state;
}

ArchetypalModel fit_robust_aa(const Matrix& x, Index k, const FitOptions& opts,
                              const LossSpec& loss) {
  require_bisquare(loss);
  opts.validate();
  check_k(k, x.rows());
  const CaseGram gram(x);
  const auto runs = static_cast<std::size_t>(opts.restarts);
  std::vector<ArchetypalModel> fits(runs);
  parallel_for(runs, [&](std::size_t r) {
    std::mt19937_64 rng(derive_seed(opts.seed, r));
    Matrix start = dirichlet_rows(k, x.rows(), rng);
    fits[r] = finish(x, run_irls(x, gram, std::move(start), opts, loss), loss);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs; ++r) {
    if (fits[r].objective < fits[best].objective) best = r;
  }
  return std::move(fits[best]);
}

}  // namespace detail

ArchetypalModel fit_robust_aa(const DataMatrix& data, Index k, const FitOptions& opts,
                              const LossSpec& loss) {
  return detail::fit_robust_aa(data.values(), k, opts, loss);
}

ArchetypalModel fit_robust_ada(const DataMatrix& data, Index k, const FitOptions& opts,
                               const LossSpec& loss, RobustBuild build) {
  require_bisquare(loss);
  opts.validate();
  check_k(k, data.rows());
  const Matrix& x = data.values();
  const ArchetypalModel aa = build == RobustBuild::robust_aa ? detail::fit_robust_aa(x, k, opts, loss)
                                                             : fit_aa(data, k, opts);
  const detail::CaseGram gram(x);
  const Vector norms = residual_norms(x, aa.alpha, aa.archetypes);
  if (norms.maxCoeff() <= 0.0) {
    return detail::build_and_swap(x, gram, aa, LossSpec::squared(), opts.penalty_weight);
  }
  LossSpec resolved = loss;
  resolved.resolved_c = resolve_tuning(norms, loss.policy);
  return detail::build_and_swap(x, gram, aa, resolved, opts.penalty_weight);
}

}  // namespace robarch
