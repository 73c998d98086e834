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

#include <optional>
#include <span>
#include <string>

namespace robarch {

enum class LossFamily { squared, bisquare };

/// How the bisquare tuning constant c is obtained from residual norms.
///   fixed(c)        c as given
///   median6         6 * median of the nonzero norms
///   percentile(j)   j-th percentile of the nonzero norms
///   percentile6(j)  6 * j-th percentile of the nonzero norms
struct TuningPolicy {
  enum class Kind { fixed, median6, percentile, percentile6 };

  Kind kind = Kind::median6;
  double value = 0.0;  // c for fixed, j for the percentile kinds

  static TuningPolicy fixed(double c);
  static TuningPolicy median6() { return {Kind::median6, 50.0}; }
  static TuningPolicy percentile(double j);
  static TuningPolicy percentile6(double j);

  /// Accepts "median6", "fixed:<c>", "p<j>" and "6p<j>" (e.g. "p50", "6p25").
  static TuningPolicy parse(const std::string& text);
  std::string to_string() const;

  bool operator==(const TuningPolicy&) const = default;
};

struct LossSpec {
  LossFamily family = LossFamily::squared;
  TuningPolicy policy = TuningPolicy::median6();
  std::optional<double> resolved_c;

  static LossSpec squared() { return {}; }
  static LossSpec bisquare(TuningPolicy policy) { return {LossFamily::bisquare, policy, {}}; }

  bool is_robust() const noexcept { return family == LossFamily::bisquare; }

  /// Loss of one residual norm: norm^2, or rho_c(norm) with the resolved c.
  double evaluate(double norm) const;
  /// Sum of evaluate() over the norms.
  double total(std::span<const double> norms) const;
  double total(const Vector& norms) const;

  std::string describe() const;
};

/// Tukey bisquare loss: c^2/6 (1 - (1 - r^2/c^2)^3) for r <= c, c^2/6 beyond.
double bisquare_loss(double norm, double c);

/// rho'(r)/r = (1 - r^2/c^2)^2 inside [0, c], 0 beyond; 1 at r = 0.
double bisquare_weight(double norm, double c);

/// Sample quantile with linear interpolation between order statistics
/// (R type 7). prob in [0, 1]. Throws InputError on empty input.
double quantile(std::span<const double> values, double prob);

/// Resolves c from residual norms; zero norms are excluded. Throws
/// NumericError when every norm is zero.
double resolve_tuning(std::span<const double> residual_norms, const TuningPolicy& policy);
double resolve_tuning(const Vector& residual_norms, const TuningPolicy& policy);

}  // namespace robarch
