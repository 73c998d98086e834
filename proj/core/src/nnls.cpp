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

#include "robarch/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace robarch {

namespace {

using IndexList = std::vector<Index>;

Vector solve_spd(const Matrix& a, const Vector& b) {
  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Vector x = ldlt.solve(b);
    if (x.allFinite()) return x;
  }
  return a.completeOrthogonalDecomposition().solve(b);
}

// gram * x touching only the nonzero entries of x.
Vector sparse_product(const Matrix& gram, const Vector& x) {
  Vector out = Vector::Zero(gram.rows());
  for (Index j = 0; j < x.size(); ++j) {
    if (x(j) != 0.0) out.noalias() += x(j) * gram.col(j);
  }
  return out;
}

[[noreturn]] void fail_cap(int iterations, const char* phase) {
  std::ostringstream msg;
  msg << "simplex least squares did not converge in " << iterations << " iterations (" << phase
      << ")";
  throw NumericError(msg.str(), iterations);
}

// Lawson-Hanson on the penalized normal equations gram + mu2 * 11',
// cross + mu2 * 1; the rank-one penalty term is applied implicitly.
Vector penalized_nnls(const Matrix& gram, const Vector& cross, double mu2, int cap,
                      int& iterations) {
  const Index k = gram.rows();
  Vector x = Vector::Zero(k);
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  const double scale = std::max({1.0, gram.diagonal().maxCoeff() + mu2,
                                 cross.cwiseAbs().maxCoeff() + mu2});
  const double tol = 1e-12 * scale;
  auto gradient = [&] {
    return Vector((cross - sparse_product(gram, x)).array() + mu2 * (1.0 - x.sum()));
  };

  Vector w = gradient();
  while (true) {
    Index best = -1;
    double best_w = tol;
    for (Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    if (++iterations > cap) fail_cap(iterations, "penalized phase");
    passive[static_cast<std::size_t>(best)] = true;

    while (true) {
      IndexList p;
      for (Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)]) p.push_back(j);
      }
      if (p.empty()) break;
      const Vector sp = solve_spd(Matrix(gram(p, p).array() + mu2), Vector(cross(p).array() + mu2));
      bool feasible = true;
      for (Index t = 0; t < sp.size(); ++t) feasible = feasible && sp(t) > 0.0;
      if (feasible) {
        x.setZero();
        x(p) = sp;
        break;
      }
      if (++iterations > cap) fail_cap(iterations, "penalized phase");
      double step = 1.0;
      Index blocking = -1;
      for (Index t = 0; t < sp.size(); ++t) {
        if (sp(t) <= 0.0) {
          const double xj = x(p[static_cast<std::size_t>(t)]);
          const double r = xj / (xj - sp(t));
          if (blocking < 0 || r < step) {
            step = std::min(step, r);
            blocking = p[static_cast<std::size_t>(t)];
          }
        }
      }
      for (Index t = 0; t < sp.size(); ++t) {
        const Index j = p[static_cast<std::size_t>(t)];
        x(j) += step * (sp(t) - x(j));
      }
      x(blocking) = 0.0;
      for (Index j : p) {
        if (x(j) <= 1e-15) {
          x(j) = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
    w = gradient();
    // A variable that leaves immediately after entering makes no progress.
    if (!passive[static_cast<std::size_t>(best)]) break;
  }
  return x;
}

// Minimizer of x'Gx - 2c'x subject to sum(x) = 1 with support restricted to p.
Vector equality_ls(const Matrix& gram, const Vector& cross, const IndexList& p) {
  const Index s = static_cast<Index>(p.size());
  Matrix kkt = Matrix::Zero(s + 1, s + 1);
  kkt.topLeftCorner(s, s) = gram(p, p);
  kkt.block(0, s, s, 1).setOnes();
  kkt.block(s, 0, 1, s).setOnes();
  Vector rhs(s + 1);
  rhs.head(s) = cross(p);
  rhs(s) = 1.0;
  Vector sol = kkt.fullPivLu().solve(rhs);
  if (!sol.allFinite() || std::abs(sol.head(s).sum() - 1.0) > 1e-8) {
    sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  }
  return sol.head(s);
}

double simplex_objective(const Matrix& gram, const Vector& cross, const Vector& x) {
  return x.dot(sparse_product(gram, x)) - 2.0 * cross.dot(x);
}

// Active-set method for the exactly constrained problem, warm-started from
// a feasible simplex point x.
Vector refine_on_simplex(const Matrix& gram, const Vector& cross, Vector x, int cap,
                         int& iterations) {
  const Index k = gram.rows();
  std::vector<bool> passive(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) passive[static_cast<std::size_t>(j)] = x(j) > 0.0;
  const double scale = std::max({1.0, gram.diagonal().maxCoeff(), cross.cwiseAbs().maxCoeff()});
  const double tol = 1e-12 * scale;
  Index last_added = -1;

  while (true) {
    // Solve on the passive set, stepping back toward feasibility as needed.
    while (true) {
      IndexList p;
      for (Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)]) p.push_back(j);
      }
      const Vector sp = equality_ls(gram, cross, p);
      bool feasible = true;
      for (Index t = 0; t < sp.size(); ++t) feasible = feasible && sp(t) >= 0.0;
      if (feasible) {
        x.setZero();
        x(p) = sp;
        break;
      }
      if (++iterations > cap) fail_cap(iterations, "refinement phase");
      double step = 1.0;
      Index blocking = -1;
      for (Index t = 0; t < sp.size(); ++t) {
        if (sp(t) < 0.0) {
          const double xj = x(p[static_cast<std::size_t>(t)]);
          const double r = xj / (xj - sp(t));
          if (r < step || blocking < 0) {
            step = std::min(step, r);
            blocking = p[static_cast<std::size_t>(t)];
          }
        }
      }
      for (Index t = 0; t < sp.size(); ++t) {
        const Index j = p[static_cast<std::size_t>(t)];
        x(j) += step * (sp(t) - x(j));
        if (x(j) <= 1e-15) x(j) = 0.0;
      }
      x(blocking) = 0.0;
      for (Index j = 0; j < k; ++j) {
        if (x(j) <= 0.0) passive[static_cast<std::size_t>(j)] = false;
      }
      x /= x.sum();
    }

    // Multiplier of the sum constraint, then the most violated inactive atom.
    const Vector grad = cross - sparse_product(gram, x);
    double mult = 0.0;
    int support = 0;
    for (Index j = 0; j < k; ++j) {
      if (passive[static_cast<std::size_t>(j)]) {
        mult += grad(j);
        ++support;
      }
    }
    mult /= std::max(1, support);
    Index enter = -1;
    double best = tol;
    for (Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) - mult > best) {
        best = grad(j) - mult;
        enter = j;
      }
    }
    if (enter < 0 || enter == last_added) break;
    if (++iterations > cap) fail_cap(iterations, "refinement phase");
    passive[static_cast<std::size_t>(enter)] = true;
    last_added = enter;
  }
  return x;
}

}  // namespace

int simplex_iteration_cap(Index atoms) { return 3 * static_cast<int>(atoms) + 30; }

SimplexLsResult solve_simplex_gram(const Matrix& gram, const Vector& cross, double penalty_weight) {
  const Index k = gram.rows();
  if (k < 1 || gram.cols() != k || cross.size() != k) {
    throw InputError("simplex least squares: inconsistent gram/cross dimensions");
  }
  if (!(penalty_weight > 0.0) || !std::isfinite(penalty_weight)) {
    throw InputError("simplex least squares: penalty weight must be positive");
  }
  SimplexLsResult result;
  // A Gram matrix is zero exactly when its diagonal is.
  if (gram.diagonal().isZero(0.0)) {
    result.weights = Vector::Constant(k, 1.0 / static_cast<double>(k));
    result.degenerate = true;
    return result;
  }
  if (k == 1) {
    result.weights = Vector::Ones(1);
    return result;
  }
  if (k == 2) {
    // Closed form on the segment between the two atoms.
    const double span = gram(0, 0) - 2.0 * gram(0, 1) + gram(1, 1);
    double w = 0.5;
    if (span > 1e-14 * std::max(gram(0, 0), gram(1, 1))) {
      w = std::clamp((cross(0) - cross(1) - gram(0, 1) + gram(1, 1)) / span, 0.0, 1.0);
    }
    result.weights = Vector(2);
    result.weights << w, 1.0 - w;
    result.iterations = 1;
    return result;
  }

  const int cap = simplex_iteration_cap(k);
  const double mu2 = penalty_weight * penalty_weight;
  Vector x = penalized_nnls(gram, cross, mu2, cap, result.iterations);

  if (x.sum() <= 0.0) {
    // Nothing entered: start from the best single atom.
    Index best = 0;
    (gram.diagonal() - 2.0 * cross).minCoeff(&best);
    x.setZero();
    x(best) = 1.0;
  } else {
    x /= x.sum();
  }
  const Vector start = x;
  x = refine_on_simplex(gram, cross, x, cap, result.iterations);
  x = x.cwiseMax(0.0);
  x /= x.sum();
  if (simplex_objective(gram, cross, start) < simplex_objective(gram, cross, x)) x = start;
  result.weights = std::move(x);
  return result;
}

SimplexLsResult solve_simplex_ls(const SimplexLsProblem& problem) {
  const Matrix& a = problem.design;
  if (a.cols() < 1) throw InputError("simplex least squares: design needs at least one column");
  if (a.rows() != problem.target.size()) {
    std::ostringstream msg;
    msg << "simplex least squares: target length " << problem.target.size()
        << " does not match design rows " << a.rows();
    throw InputError(msg.str());
  }
  return solve_simplex_gram(a.transpose() * a, a.transpose() * problem.target,
                            problem.penalty_weight);
}

}  // namespace robarch
