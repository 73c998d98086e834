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
#include "robarch/data_matrix.hpp"
#include "robarch/loss.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace robarch {

enum class BasisFamily { fourier, cubic_bspline };

std::string to_string(BasisFamily family);
BasisFamily parse_basis_family(const std::string& text);

/// Default number of Simpson nodes for Gram entries.
inline constexpr int kGramNodes = 2001;

/// A basis of m functions on [a, b] with its Gram matrix W (W_pq = int B_p B_q).
///
/// Fourier: orthonormal constant, sin, cos, sin, ... terms with period b - a;
/// W is the identity. Cubic B-spline: m >= 4 elements on equally spaced
/// knots with m - 4 interior knots; W by composite Simpson quadrature.
class BasisSystem {
 public:
  BasisSystem(BasisFamily family, Index m, double lower, double upper);

  BasisFamily family() const noexcept { return family_; }
  Index size() const noexcept { return m_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  const Matrix& gram() const noexcept { return gram_; }
  /// Lower Cholesky factor L of W; a coefficient row b maps to b * L.
  const Matrix& gram_factor() const noexcept { return factor_; }

  /// Values of all m basis functions at t (t within [lower, upper]).
  Vector evaluate(double t) const;
  /// points x m evaluation matrix.
  Matrix evaluate(std::span<const double> t) const;

  bool operator==(const BasisSystem& other) const;

 private:
  BasisFamily family_;
  Index m_;
  double lower_;
  double upper_;
  std::vector<double> knots_;
  Matrix gram_;
  Matrix factor_;
};

/// W for a basis family; Fourier is returned analytically.
Matrix gram_matrix(BasisFamily family, Index m, double lower, double upper);

/// W by composite Simpson on `nodes` equispaced points (odd, >= 3).
Matrix gram_by_simpson(const BasisSystem& basis, int nodes = kGramNodes);

/// One discretely observed curve. Time grids may differ between records.
struct SampledCurve {
  std::string label;
  std::vector<double> t;
  std::vector<double> y;
};

/// Least-squares basis coefficients per record (n x m). A record with fewer
/// than m points, or with points outside the domain, is rejected by name.
/// Rank-deficient records (e.g. a partial domain) get the minimum-norm fit.
Matrix smooth(std::span<const SampledCurve> samples, const BasisSystem& basis);

struct BasisSelection {
  Index m = 0;
  std::vector<std::pair<Index, double>> variance_curve;  // (m, residual variance)
};

/// Pooled unbiased residual variance sum(res^2) / sum(points_i - m) for each
/// feasible m in [m_min, m_max]. Selects the m after which the relative
/// variance decrease first drops below 5%; the largest m if it never does.
BasisSelection select_basis_count(std::span<const SampledCurve> samples, BasisFamily family,
                                  Index m_min, Index m_max, double lower, double upper);

inline constexpr double kBasisPlateau = 0.05;

/// Centering vector and divisor applied to one variable block.
struct VariableScale {
  Vector mean;
  double scale = 1.0;
};

/// n records of P functional variables, each expanded on the same basis; the
/// coefficient matrix holds P contiguous blocks of m columns.
class FunctionalDataset {
 public:
  FunctionalDataset(Matrix coefficients, Index variables, BasisSystem basis,
                    std::vector<std::string> variable_labels = {},
                    std::vector<std::string> record_labels = {});

  const Matrix& coefficients() const noexcept { return coefficients_; }
  Index records() const noexcept { return coefficients_.rows(); }
  Index variables() const noexcept { return variables_; }
  const BasisSystem& basis() const noexcept { return basis_; }
  const std::vector<std::string>& variable_labels() const noexcept { return variable_labels_; }
  const std::vector<std::string>& record_labels() const noexcept { return record_labels_; }
  const std::vector<VariableScale>& scales() const noexcept { return scales_; }
  void set_scales(std::vector<VariableScale> scales);

  /// Coefficients with every block multiplied by the Gram factor, so that
  /// Euclidean norms of rows equal functional norms.
  Matrix rotated() const;

  /// CSV of record label + P*m coefficient columns, and a JSON sidecar with
  /// the basis, variable labels and standardization scales.
  void write(const std::filesystem::path& csv_path) const;
  static FunctionalDataset read(const std::filesystem::path& csv_path);
  static std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

  std::vector<std::string> column_labels() const;

 private:
  Matrix coefficients_;
  Index variables_;
  BasisSystem basis_;
  std::vector<std::string> variable_labels_;
  std::vector<std::string> record_labels_;
  std::vector<VariableScale> scales_;
};

/// Centers each variable block and divides it by sqrt(mean_i a_i' W a_i),
/// giving unit mean integrated squared deviation per variable.
FunctionalDataset standardize(const FunctionalDataset& dataset,
                              std::vector<VariableScale>* scales = nullptr);

/// Undoes standardize() on a coefficient matrix with the same layout.
Matrix unstandardize(const Matrix& coefficients, const std::vector<VariableScale>& scales);

enum class FitMode { aa, ada };

/// AA/ADA (squared or bisquare) under the W-weighted norm. Archetypes are
/// returned as coefficient rows in the dataset's own coordinates.
ArchetypalModel functional_fit(const FunctionalDataset& dataset, Index k, const FitOptions& opts,
                               const LossSpec& loss, FitMode mode);

/// Functional norms |x_i - sum_j alpha_ij z_j| of a fitted model.
Vector functional_residual_norms(const FunctionalDataset& dataset, const ArchetypalModel& model);

}  // namespace robarch
