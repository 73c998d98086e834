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

#include <cstdint>
#include <optional>
#include <vector>

namespace robarch {

/// Functional waveform data: three classes of two-triangle mixtures
/// u*h_a + (1-u)*h_b + noise on t = 1, 1.2, ..., 21.
struct WaveformSpec {
  Index n_per_class = 150;
  std::uint64_t seed = 1;
  double noise_sd = 1.0;             // 0 suppresses the noise (test hook)
  std::optional<double> fixed_mix;   // forces u for every curve (test hook)
};

struct WaveformData {
  std::vector<double> grid;  // 101 points
  Matrix curves;             // (3 * n_per_class) x 101
  std::vector<int> classes;  // 1, 2 or 3 per curve
  Matrix templates;          // 3 x 101: h1, h2, h3 on the grid
};

double waveform_h1(double t);
double waveform_h2(double t);
double waveform_h3(double t);
std::vector<double> waveform_grid();

WaveformData gen_waveform(const WaveformSpec& spec);

/// Gaussian-process curves on [0, 1]: a main model 30 t (1-t)^{3/2} and a
/// contaminating model 30 t^{3/2} (1-t), both plus a zero-mean process with
/// covariance gp_scale * exp(-|s-t| / gp_range).
struct ContaminationSpec {
  Index n = 100;
  double cr = 0.1;
  Index grid_points = 50;
  double gp_scale = 0.3;
  double gp_range = 0.3;
  std::uint64_t seed = 1;
  double noise_scale = 1.0;  // 0 suppresses the process noise (test hook)

  Index outlier_count() const;  // ceil(cr * n)
  void validate() const;
};

struct ContaminatedData {
  std::vector<double> grid;
  Matrix curves;               // n x grid_points
  std::vector<bool> outliers;  // true for contaminated curves
};

double main_mean(double t);
double contaminated_mean(double t);
std::vector<double> unit_grid(Index points);

/// Covariance of the noise process on a grid.
Matrix gp_covariance(const std::vector<double>& grid, double scale, double range);

ContaminatedData gen_contaminated(const ContaminationSpec& spec);

inline constexpr double kGpJitter = 1e-10;

}  // namespace robarch
