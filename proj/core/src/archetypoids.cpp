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

#include "robarch/archetypoids.hpp"

#include "robarch/nnls.hpp"
#include "robarch/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace robarch {

namespace {

// Orders cases by `score` (ascending or descending) with ties on the lower
// index, then takes the first not yet used.
Index pick_unused(const Vector& score, bool descending, const std::vector<bool>& used) {
  std::vector<Index> order(static_cast<std::size_t>(score.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return descending ? score(a) > score(b) : score(a) < score(b);
  });
  for (Index i : order) {
    if (!used[static_cast<std::size_t>(i)]) return i;
  }
  throw InputError("candidate set needs k distinct cases");
}

std::vector<Index> pick_set(Index k, Index n, const std::function<Vector(Index)>& score,
                            bool descending) {
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Index> out;
  for (Index j = 0; j < k; ++j) {
    const Index i = pick_unused(score(j), descending, used);
    used[static_cast<std::size_t>(i)] = true;
    out.push_back(i);
  }
  return out;
}

}  // namespace

CandidateSets candidate_sets(const DataMatrix& data, const ArchetypalModel& aa_model) {
  return candidate_sets(data.values(), aa_model);
}

CandidateSets candidate_sets(const Matrix& x, const ArchetypalModel& aa_model) {
  const Index n = x.rows();
  const Index k = aa_model.k();
  if (aa_model.archetypes.cols() != x.cols() || aa_model.alpha.rows() != n ||
      aa_model.alpha.cols() != k || aa_model.beta.rows() != k || aa_model.beta.cols() != n) {
    throw InputError("candidate sets: model shape does not match the data");
  }
  if (k > n) throw InputError("candidate sets: k exceeds the number of cases");
  CandidateSets sets;
  sets.ns = pick_set(
      k, n,
      [&](Index j) -> Vector {
        return (x.rowwise() - aa_model.archetypes.row(j)).rowwise().squaredNorm();
      },
      false);
  sets.alpha = pick_set(k, n, [&](Index j) -> Vector { return aa_model.alpha.col(j); }, true);
  sets.beta =
      pick_set(k, n, [&](Index j) -> Vector { return aa_model.beta.row(j).transpose(); }, true);
  return sets;
}

namespace detail {

MemberObjective::MemberObjective(const Matrix& x, const CaseGram& gram, LossSpec loss,
                                 double penalty_weight)
    : x_(x), gram_(gram), loss_(std::move(loss)), penalty_weight_(penalty_weight) {
  if (loss_.is_robust() && !loss_.resolved_c) {
    throw InputError("member objective needs a resolved tuning constant");
  }
}

Vector MemberObjective::residual_norms(const std::vector<Index>& members, Matrix* alpha) const {
  const Index n = x_.rows();
  const Index k = static_cast<Index>(members.size());
  const Matrix& g = gram_.gram;
  const Matrix gs = g(members, members);
  Vector norms(n);
  if (alpha) alpha->resize(n, k);
  for (Index i = 0; i < n; ++i) {
    const Vector c = g(i, members).transpose();
    Vector a;
    if (k == 1) {
      a = Vector::Ones(1);
    } else {
      a = solve_simplex_gram(gs, c, penalty_weight_).weights;
    }
    const double sq = g(i, i) - 2.0 * a.dot(c) + a.dot(gs * a);
    norms(i) = std::sqrt(std::max(sq, 0.0));
    if (alpha) alpha->row(i) = a.transpose();
  }
  return norms;
}

double MemberObjective::operator()(const std::vector<Index>& members) const {
  return loss_.total(residual_norms(members));
}

SwapResult swap_refine(const MemberObjective& objective, std::vector<Index> members, Index n) {
  SwapResult result;
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  for (Index m : members) chosen[static_cast<std::size_t>(m)] = true;
  double best = objective(members);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      for (Index cand = 0; cand < n; ++cand) {
        if (chosen[static_cast<std::size_t>(cand)]) continue;
        const Index previous = members[pos];
        members[pos] = cand;
        const double value = objective(members);
        if (value < best - 1e-12 * std::abs(best)) {
          chosen[static_cast<std::size_t>(previous)] = false;
          chosen[static_cast<std::size_t>(cand)] = true;
          best = value;
          improved = true;
          ++result.accepted_swaps;
        } else {
          members[pos] = previous;
        }
      }
    }
  }
  result.members = std::move(members);
  result.objective = best;
  return result;
}

ArchetypalModel archetypoid_model(const Matrix& x, const CaseGram& gram,
                                  const std::vector<Index>& members, const LossSpec& loss,
                                  double penalty_weight) {
  const Index n = x.rows();
  const Index k = static_cast<Index>(members.size());
  MemberObjective objective(x, gram, loss, penalty_weight);
  ArchetypalModel model;
  objective.residual_norms(members, &model.alpha);
  model.beta = Matrix::Zero(k, n);
  for (Index j = 0; j < k; ++j) model.beta(j, members[static_cast<std::size_t>(j)]) = 1.0;
  model.archetypes = x(members, Eigen::all);
  // Residuals evaluated directly so exact fits report exact zeros.
  model.objective = loss.total(robarch::residual_norms(x, model.alpha, model.archetypes));
  model.loss = loss;
  model.members = members;
  return model;
}

ArchetypalModel build_and_swap(const Matrix& x, const CaseGram& gram,
                               const ArchetypalModel& aa_model, const LossSpec& loss,
                               double penalty_weight, std::vector<SwapResult>* per_candidate) {
  const CandidateSets sets = candidate_sets(x, aa_model);
  const MemberObjective objective(x, gram, loss, penalty_weight);
  const std::vector<std::vector<Index>> starts{sets.ns, sets.alpha, sets.beta};
  std::vector<SwapResult> refined(starts.size());
  std::vector<std::set<Index>> seen;
  std::vector<std::size_t> source(starts.size());
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::set<Index> key(starts[s].begin(), starts[s].end());
    source[s] = s;
    for (std::size_t t = 0; t < s; ++t) {
      if (std::set<Index>(starts[t].begin(), starts[t].end()) == key) {
        source[s] = source[t];
        break;
      }
    }
  }
  parallel_for(starts.size(), [&](std::size_t s) {
    if (source[s] == s) refined[s] = swap_refine(objective, starts[s], x.rows());
  });
  for (std::size_t s = 0; s < starts.size(); ++s) refined[s] = refined[source[s]];
  std::size_t best = 0;
  for (std::size_t s = 1; s < refined.size(); ++s) {
    if (refined[s].objective < refined[best].objective) best = s;
  }
  if (per_candidate) *per_candidate = refined;
  return archetypoid_model(x, gram, refined[best].members, loss, penalty_weight);
}

}  // namespace detail

ArchetypalModel fit_ada(const DataMatrix& data, Index k, const FitOptions& opts,
                        const LossSpec& loss) {
  if (loss.is_robust()) return fit_robust_ada(data, k, opts, loss);
  opts.validate();
  if (k < 1 || k > data.rows()) {
    std::ostringstream msg;
    msg << "archetypoid count k = " << k << " must lie in [1, " << data.rows() << "]";
    throw InputError(msg.str());
  }
  const Matrix& x = data.values();
  const detail::CaseGram gram(x);
  const ArchetypalModel aa = fit_aa(data, k, opts);
  return detail::build_and_swap(x, gram, aa, LossSpec::squared(), opts.penalty_weight);
}

}  // namespace robarch
