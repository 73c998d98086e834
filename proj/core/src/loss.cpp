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

#include "robarch/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace robarch {

namespace {

void check_percentile(double j) {
  if (!(j > 0.0 && j < 100.0)) throw InputError("percentile must lie in (0, 100)");
}

void check_args(double norm, double c) {
  if (!(norm >= 0.0)) throw InputError("residual norm must be nonnegative");
  if (!(c > 0.0)) throw InputError("tuning constant c must be positive");
}

}  // namespace

TuningPolicy TuningPolicy::fixed(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InputError("fixed tuning constant must be positive");
  return {Kind::fixed, c};
}

TuningPolicy TuningPolicy::percentile(double j) {
  check_percentile(j);
  return {Kind::percentile, j};
}

TuningPolicy TuningPolicy::percentile6(double j) {
  check_percentile(j);
  return {Kind::percentile6, j};
}

TuningPolicy TuningPolicy::parse(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw InputError("bad tuning policy '" + text + "'");
    return v;
  };
  if (text == "median6") return median6();
  if (text.rfind("fixed:", 0) == 0) return fixed(number(text.substr(6)));
  if (text.rfind("6p", 0) == 0) return percentile6(number(text.substr(2)));
  if (text.rfind("p", 0) == 0) return percentile(number(text.substr(1)));
  throw InputError("bad tuning policy '" + text + "' (expected median6, fixed:<c>, p<j> or 6p<j>)");
}

std::string TuningPolicy::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::fixed: out << "fixed:" << value; break;
    case Kind::median6: out << "median6"; break;
    case Kind::percentile: out << 'p' << value; break;
    case Kind::percentile6: out << "6p" << value; break;
  }
  return out.str();
}

double bisquare_loss(double norm, double c) {
  check_args(norm, c);
  const double cap = c * c / 6.0;
  if (norm > c) return cap;
  const double u = 1.0 - (norm * norm) / (c * c);
  return cap * (1.0 - u * u * u);
}

double bisquare_weight(double norm, double c) {
  check_args(norm, c);
  if (norm > c) return 0.0;
  const double u = 1.0 - (norm * norm) / (c * c);
  return u * u;
}

double LossSpec::evaluate(double norm) const {
  if (family == LossFamily::squared) return norm * norm;
  if (!resolved_c) throw InputError("bisquare loss evaluated before c was resolved");
  return bisquare_loss(norm, *resolved_c);
}

double LossSpec::total(std::span<const double> norms) const {
  double sum = 0.0;
  for (double r : norms) sum += evaluate(r);
  return sum;
}

double LossSpec::total(const Vector& norms) const {
  return total(std::span<const double>(norms.data(), static_cast<std::size_t>(norms.size())));
}

std::string LossSpec::describe() const {
  if (family == LossFamily::squared) return "squared";
  std::ostringstream out;
  out << "bisquare(" << policy.to_string();
  if (resolved_c) out << ", c=" << *resolved_c;
  out << ')';
  return out.str();
}

double quantile(std::span<const double> values, double prob) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw InputError("quantile probability outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double resolve_tuning(std::span<const double> residual_norms, const TuningPolicy& policy) {
  if (policy.kind == TuningPolicy::Kind::fixed) return policy.value;
  std::vector<double> nonzero;
  nonzero.reserve(residual_norms.size());
  for (double r : residual_norms) {
    if (r < 0.0 || !std::isfinite(r)) throw InputError("residual norms must be finite and nonnegative");
    if (r > 0.0) nonzero.push_back(r);
  }
  if (nonzero.empty()) throw NumericError("tuning constant undefined: all residual norms are zero");
  switch (policy.kind) {
    case TuningPolicy::Kind::median6: return 6.0 * quantile(nonzero, 0.5);
    case TuningPolicy::Kind::percentile: return quantile(nonzero, policy.value / 100.0);
    case TuningPolicy::Kind::percentile6: return 6.0 * quantile(nonzero, policy.value / 100.0);
    case TuningPolicy::Kind::fixed: break;
  }
  return policy.value;
}

double resolve_tuning(const Vector& residual_norms, const TuningPolicy& policy) {
  return resolve_tuning(
      std::span<const double>(residual_norms.data(), static_cast<std::size_t>(residual_norms.size())),
      policy);
}

}  // namespace robarch
