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

#include "robarch/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace robarch {

double waveform_h1(double t) { return std::max(6.0 - std::abs(t - 11.0), 0.0); }
double waveform_h2(double t) { return waveform_h1(t - 4.0); }
double waveform_h3(double t) { return waveform_h1(t + 4.0); }

std::vector<double> waveform_grid() {
  std::vector<double> grid(101);
  for (int i = 0; i < 101; ++i) grid[static_cast<std::size_t>(i)] = 1.0 + 0.2 * i;
  return grid;
}

WaveformData gen_waveform(const WaveformSpec& spec) {
  if (spec.n_per_class < 1) throw InputError("waveform needs at least one curve per class");
  if (!(spec.noise_sd >= 0.0)) throw InputError("waveform noise sd must be nonnegative");
  if (spec.fixed_mix && !(*spec.fixed_mix >= 0.0 && *spec.fixed_mix <= 1.0)) {
    throw InputError("waveform mixing weight must lie in [0, 1]");
  }
  WaveformData out;
  out.grid = waveform_grid();
  const auto points = static_cast<Index>(out.grid.size());
  out.templates.resize(3, points);
  for (Index g = 0; g < points; ++g) {
    const double t = out.grid[static_cast<std::size_t>(g)];
    out.templates(0, g) = waveform_h1(t);
    out.templates(1, g) = waveform_h2(t);
    out.templates(2, g) = waveform_h3(t);
  }
  // Template pairs mixed by classes 1, 2 and 3.
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  out.curves.resize(3 * spec.n_per_class, points);
  Index row = 0;
  for (int cls = 0; cls < 3; ++cls) {
    for (Index i = 0; i < spec.n_per_class; ++i, ++row) {
      const double u = spec.fixed_mix ? *spec.fixed_mix : unif(rng);
      for (Index g = 0; g < points; ++g) {
        const double eps = noise(rng);
        out.curves(row, g) = u * out.templates(pairs[cls][0], g) +
                             (1.0 - u) * out.templates(pairs[cls][1], g) + spec.noise_sd * eps;
      }
      out.classes.push_back(cls + 1);
    }
  }
  return out;
}

double main_mean(double t) { return 30.0 * t * std::pow(1.0 - t, 1.5); }
double contaminated_mean(double t) { return 30.0 * std::pow(t, 1.5) * (1.0 - t); }

std::vector<double> unit_grid(Index points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (Index i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

Index ContaminationSpec::outlier_count() const {
  return static_cast<Index>(std::ceil(cr * static_cast<double>(n) - 1e-9));
}

void ContaminationSpec::validate() const {
  if (n < 1) throw InputError("contamination model needs n >= 1");
  if (!(cr >= 0.0 && cr < 1.0)) throw InputError("contamination rate must lie in [0, 1)");
  if (outlier_count() >= n) throw InputError("contamination leaves no regular curves");
  if (grid_points < 2) throw InputError("contamination grid needs at least two points");
  if (!(gp_scale > 0.0 && gp_range > 0.0)) throw InputError("process scale and range must be positive");
  if (!(noise_scale >= 0.0)) throw InputError("noise scale must be nonnegative");
}

Matrix gp_covariance(const std::vector<double>& grid, double scale, double range) {
  const auto g = static_cast<Index>(grid.size());
  Matrix cov(g, g);
  for (Index s = 0; s < g; ++s) {
    for (Index t = 0; t < g; ++t) {
      cov(s, t) = scale * std::exp(-std::abs(grid[static_cast<std::size_t>(s)] -
                                              grid[static_cast<std::size_t>(t)]) /
                                   range);
    }
  }
  return cov;
}

ContaminatedData gen_contaminated(const ContaminationSpec& spec) {
  spec.validate();
  ContaminatedData out;
  out.grid = unit_grid(spec.grid_points);
  Matrix cov = gp_covariance(out.grid, spec.gp_scale, spec.gp_range);
  cov.diagonal().array() += kGpJitter;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError("process covariance is not positive definite");
  const Matrix lower = llt.matrixL();

  std::mt19937_64 rng(spec.seed);
  out.outliers.assign(static_cast<std::size_t>(spec.n), false);
  std::fill_n(out.outliers.begin(), spec.outlier_count(), true);
  std::shuffle(out.outliers.begin(), out.outliers.end(), rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  out.curves.resize(spec.n, spec.grid_points);
  Vector z(spec.grid_points);
  for (Index i = 0; i < spec.n; ++i) {
    for (Index g = 0; g < spec.grid_points; ++g) z(g) = normal(rng);
    const Vector eps = spec.noise_scale * (lower * z);
    const bool outlier = out.outliers[static_cast<std::size_t>(i)];
    for (Index g = 0; g < spec.grid_points; ++g) {
      const double t = out.grid[static_cast<std::size_t>(g)];
      out.curves(i, g) = (outlier ? contaminated_mean(t) : main_mean(t)) + eps(g);
    }
  }
  return out;
}

}  // namespace robarch
