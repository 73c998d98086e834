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

#include "robarch/archetypes.hpp"

#include "robarch/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace robarch {

void FitOptions::validate() const {
  if (restarts < 1) throw InputError("restarts must be at least 1");
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(rel_tol > 0.0)) throw InputError("rel_tol must be positive");
  if (!(penalty_weight > 0.0)) throw InputError("penalty_weight must be positive");
}

namespace detail {

Matrix dirichlet_rows(Index rows, Index cols, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Matrix out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) out(r, c) = expo(rng);
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

void alpha_step(const Matrix& x, AlternatingState& state, double penalty_weight) {
  const Matrix& z = state.archetypes;
  const Index n = x.rows();
  const Index k = z.rows();
  const Matrix gram = z * z.transpose();
  const Matrix cross = x * z.transpose();  // n x k
  const bool guard = state.alpha.rows() == n && state.alpha.cols() == k;
  Matrix alpha(n, k);
  for (Index i = 0; i < n; ++i) {
    const Vector c = cross.row(i).transpose();
    Vector a = solve_simplex_gram(gram, c, penalty_weight).weights;
    if (guard) {
      const Vector old = state.alpha.row(i).transpose();
      const double f_new = a.dot(gram * a) - 2.0 * c.dot(a);
      const double f_old = old.dot(gram * old) - 2.0 * c.dot(old);
      if (f_old < f_new) a = old;
    }
    alpha.row(i) = a.transpose();
  }
  state.alpha = std::move(alpha);
}

void beta_step(const Matrix& x, const CaseGram& gram, const Vector& weights,
               AlternatingState& state, double penalty_weight) {
  const Index k = state.archetypes.rows();
  Matrix resid = x - state.alpha * state.archetypes;
  for (Index j = 0; j < k; ++j) {
    const Vector a = state.alpha.col(j);
    const Vector wa = weights.cwiseProduct(a);
    const double s = wa.dot(a);
    const Vector z_old = state.archetypes.row(j).transpose();
    const Vector pull = resid.transpose() * wa;  // sum_i w_i a_ij r_i
    Vector beta_row;
    if (s <= 1e-14 * std::max(1.0, weights.sum())) {
      // Unused archetype: move it onto the worst-fit case.
      Index worst = 0;
      const double misfit = resid.rowwise().squaredNorm().cwiseProduct(weights).maxCoeff(&worst);
      if (!(misfit > 0.0)) continue;
      beta_row = Vector::Zero(x.rows());
      beta_row(worst) = 1.0;
    } else {
      const Vector target = z_old + pull / s;
      beta_row = solve_simplex_gram(gram.gram, x * target, penalty_weight).weights;
    }
    const Vector z_new = x.transpose() * beta_row;
    // Change of the weighted RSS as a function of z_j alone.
    const double delta = s * (z_new.squaredNorm() - z_old.squaredNorm()) -
                         2.0 * (z_new - z_old).dot(s * z_old + pull);
    if (delta > 0.0) continue;
    state.beta.row(j) = beta_row.transpose();
    state.archetypes.row(j) = z_new.transpose();
    resid.noalias() += a * (z_old - z_new).transpose();
  }
}

double weighted_rss(const Matrix& x, const Vector& weights, const AlternatingState& state) {
  const Vector sq = (x - state.alpha * state.archetypes).rowwise().squaredNorm();
  return weights.dot(sq);
}

AlternatingState run_alternating(const Matrix& x, const CaseGram& gram, Matrix start_beta,
                                 const FitOptions& opts, std::vector<double>* trace) {
  AlternatingState state;
  state.beta = std::move(start_beta);
  state.archetypes = state.beta * x;
  alpha_step(x, state, opts.penalty_weight);
  const Vector ones = Vector::Ones(x.rows());
  double obj = weighted_rss(x, ones, state);
  if (trace) trace->push_back(obj);
  for (int it = 0; it < opts.max_iters && obj > 0.0; ++it) {
    beta_step(x, gram, ones, state, opts.penalty_weight);
    alpha_step(x, state, opts.penalty_weight);
    const double next = weighted_rss(x, ones, state);
    if (trace) trace->push_back(next);
    const double improvement = (obj - next) / std::max(obj, std::numeric_limits<double>::min());
    obj = next;
    if (improvement < opts.rel_tol) break;
  }
  return state;
}

}  // namespace detail

namespace {

void check_k(Index k, Index n) {
  if (k < 1 || k > n) {
    std::ostringstream msg;
    msg << "archetype count k = " << k << " must lie in [1, " << n << "]";
    throw InputError(msg.str());
  }
}

ArchetypalModel to_model(const Matrix& x, detail::AlternatingState state) {
  ArchetypalModel model;
  model.archetypes = state.beta * x;
  model.alpha = std::move(state.alpha);
  model.beta = std::move(state.beta);
  model.objective = residual_norms(x, model.alpha, model.archetypes).squaredNorm();
  model.loss = LossSpec::squared();
  return model;
}

}  // namespace

ArchetypalModel fit_aa(const DataMatrix& data, Index k, const FitOptions& opts) {
  return fit_aa(data, k, opts, {});
}

ArchetypalModel fit_aa(const DataMatrix& data, Index k, const FitOptions& opts,
                       const std::vector<Matrix>& initial_betas) {
  opts.validate();
  const Matrix& x = data.values();
  const Index n = x.rows();
  check_k(k, n);
  for (const auto& b : initial_betas) {
    if (b.rows() != k || b.cols() != n) throw InputError("initial beta must be k x n");
  }
  const detail::CaseGram gram(x);
  const std::size_t runs = static_cast<std::size_t>(opts.restarts) + initial_betas.size();
  std::vector<ArchetypalModel> fits(runs);
  parallel_for(runs, [&](std::size_t r) {
    Matrix start;
    if (r < static_cast<std::size_t>(opts.restarts)) {
      std::mt19937_64 rng(derive_seed(opts.seed, r));
      start = detail::dirichlet_rows(k, n, rng);
    } else {
      start = initial_betas[r - static_cast<std::size_t>(opts.restarts)];
    }
    fits[r] = to_model(x, detail::run_alternating(x, gram, std::move(start), opts));
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs; ++r) {
    if (fits[r].objective < fits[best].objective) best = r;
  }
  return std::move(fits[best]);
}

Vector residual_norms(const Matrix& x, const Matrix& alpha, const Matrix& archetypes) {
  if (alpha.rows() != x.rows() || alpha.cols() != archetypes.rows() ||
      archetypes.cols() != x.cols()) {
    throw InputError("residual norms: model shape does not match the data");
  }
  return (x - alpha * archetypes).rowwise().norm();
}

double compute_rss(const DataMatrix& data, const ArchetypalModel& model) {
  return residual_norms(data.values(), model.alpha, model.archetypes).squaredNorm();
}

ElbowCurve elbow_scan(const DataMatrix& data, Index k_min, Index k_max, const FitOptions& opts) {
  const Index n = data.rows();
  if (k_min < 1 || k_min > k_max || k_max > n) {
    throw InputError("elbow scan needs 1 <= k_min <= k_max <= n");
  }
  ElbowCurve curve;
  std::optional<Matrix> previous_beta;
  std::mt19937_64 rng(derive_seed(opts.seed, 0xe1b0));
  for (Index k = k_min; k <= k_max; ++k) {
    FitOptions step = opts;
    step.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(k));
    std::vector<Matrix> warm;
    if (previous_beta) {
      Matrix b = Matrix::Zero(k, n);
      b.topRows(k - 1) = *previous_beta;
      std::uniform_int_distribution<Index> pick(0, n - 1);
      b(k - 1, pick(rng)) = 1.0;
      warm.push_back(std::move(b));
    }
    const ArchetypalModel model = fit_aa(data, k, step, warm);
    curve.points.push_back({k, model.objective});
    previous_beta = model.beta;
  }
  if (curve.points.size() >= 3) {
    // Second differences of log(objective), which weigh every relative drop
    // alike; the raw curve is used once an objective reaches zero.
    bool use_log = true;
    for (const auto& p : curve.points) use_log = use_log && p.objective > 0.0;
    auto value = [&](std::size_t i) {
      return use_log ? std::log(curve.points[i].objective) : curve.points[i].objective;
    };
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
      const double d2 = value(i - 1) - 2.0 * value(i) + value(i + 1);
      if (d2 > best) {
        best = d2;
        curve.suggested_k = curve.points[i].k;
      }
    }
  }
  return curve;
}

double model_distance(const ArchetypalModel& a, const ArchetypalModel& b) {
  if (a.archetypes.rows() != b.archetypes.rows() || a.archetypes.cols() != b.archetypes.cols()) {
    throw InputError("model distance needs models with equal k and m");
  }
  const Index k = a.archetypes.rows();
  Matrix cost(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) cost(i, j) = (a.archetypes.row(i) - b.archetypes.row(j)).norm();
  }
  const auto match = solve_assignment(cost);
  double sq = 0.0;
  for (Index i = 0; i < k; ++i) {
    sq += (a.archetypes.row(i) - b.archetypes.row(match[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace robarch
