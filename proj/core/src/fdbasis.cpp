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

#include "robarch/fdbasis.hpp"

#include "robarch/archetypoids.hpp"
#include "robarch/csv.hpp"
#include "robarch/robust.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace robarch {

std::string to_string(BasisFamily family) {
  return family == BasisFamily::fourier ? "fourier" : "cubic_bspline";
}

BasisFamily parse_basis_family(const std::string& text) {
  if (text == "fourier") return BasisFamily::fourier;
  if (text == "cubic_bspline" || text == "bspline") return BasisFamily::cubic_bspline;
  throw InputError("unknown basis family '" + text + "' (expected fourier or cubic_bspline)");
}

namespace {

constexpr int kOrder = 4;

std::vector<double> bspline_knots(Index m, double lower, double upper) {
  const Index spans = m - kOrder + 1;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(m + kOrder));
  for (int r = 0; r < kOrder - 1; ++r) knots.push_back(lower);
  for (Index i = 0; i <= spans; ++i) {
    knots.push_back(i == spans ? upper
                               : lower + (upper - lower) * static_cast<double>(i) /
                                             static_cast<double>(spans));
  }
  for (int r = 0; r < kOrder - 1; ++r) knots.push_back(upper);
  return knots;
}

}  // namespace

BasisSystem::BasisSystem(BasisFamily family, Index m, double lower, double upper)
    : family_(family), m_(m), lower_(lower), upper_(upper) {
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw InputError("basis domain must satisfy a < b");
  }
  if (m < 1) throw InputError("basis needs at least one element");
  if (family == BasisFamily::cubic_bspline) {
    if (m < kOrder) throw InputError("a cubic B-spline basis needs m >= 4");
    knots_ = bspline_knots(m, lower, upper);
    gram_ = gram_by_simpson(*this);
  } else {
    gram_ = Matrix::Identity(m, m);
  }
  Eigen::LLT<Matrix> llt(gram_);
  if (llt.info() != Eigen::Success) throw NumericError("Gram matrix is not positive definite");
  factor_ = llt.matrixL();
}

Vector BasisSystem::evaluate(double t) const {
  Vector out = Vector::Zero(m_);
  if (family_ == BasisFamily::fourier) {
    const double period = upper_ - lower_;
    const double phase = 2.0 * std::numbers::pi * (t - lower_) / period;
    out(0) = 1.0 / std::sqrt(period);
    const double amp = std::sqrt(2.0 / period);
    for (Index h = 1; h < m_; ++h) {
      const double freq = static_cast<double>((h + 1) / 2);
      out(h) = (h % 2 == 1) ? amp * std::sin(freq * phase) : amp * std::cos(freq * phase);
    }
    return out;
  }
  // Cox-de Boor on the span containing t; t == upper uses the last span.
  const double tt = std::clamp(t, lower_, upper_);
  auto it = std::upper_bound(knots_.begin(), knots_.end(), tt);
  Index span = static_cast<Index>(it - knots_.begin()) - 1;
  span = std::min<Index>(span, m_ - 1);
  double basis[kOrder] = {1.0, 0.0, 0.0, 0.0};
  double left[kOrder];
  double right[kOrder];
  for (int d = 1; d < kOrder; ++d) {
    left[d] = tt - knots_[static_cast<std::size_t>(span + 1 - d)];
    right[d] = knots_[static_cast<std::size_t>(span + d)] - tt;
    double saved = 0.0;
    for (int r = 0; r < d; ++r) {
      const double denom = right[r + 1] + left[d - r];
      const double tmp = denom > 0.0 ? basis[r] / denom : 0.0;
      basis[r] = saved + right[r + 1] * tmp;
      saved = left[d - r] * tmp;
    }
    basis[d] = saved;
  }
  for (int r = 0; r < kOrder; ++r) out(span - kOrder + 1 + r) = basis[r];
  return out;
}

Matrix BasisSystem::evaluate(std::span<const double> t) const {
  Matrix out(static_cast<Index>(t.size()), m_);
  for (std::size_t i = 0; i < t.size(); ++i) out.row(static_cast<Index>(i)) = evaluate(t[i]).transpose();
  return out;
}

bool BasisSystem::operator==(const BasisSystem& other) const {
  return family_ == other.family_ && m_ == other.m_ && lower_ == other.lower_ &&
         upper_ == other.upper_;
}

Matrix gram_by_simpson(const BasisSystem& basis, int nodes) {
  if (nodes < 3 || nodes % 2 == 0) throw InputError("Simpson rule needs an odd node count >= 3");
  const double a = basis.lower();
  const double h = (basis.upper() - a) / static_cast<double>(nodes - 1);
  std::vector<double> t(static_cast<std::size_t>(nodes));
  Vector w(nodes);
  for (int i = 0; i < nodes; ++i) {
    t[static_cast<std::size_t>(i)] = i == nodes - 1 ? basis.upper() : a + h * i;
    w(i) = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
  }
  w *= h / 3.0;
  const Matrix phi = basis.evaluate(t);
  Matrix gram = phi.transpose() * w.asDiagonal() * phi;
  return 0.5 * (gram + gram.transpose());
}

Matrix gram_matrix(BasisFamily family, Index m, double lower, double upper) {
  return BasisSystem(family, m, lower, upper).gram();
}

namespace {

void check_curve(const SampledCurve& curve, const BasisSystem& basis) {
  if (curve.t.size() != curve.y.size()) {
    throw InputError("record '" + curve.label + "': time and value counts differ");
  }
  if (static_cast<Index>(curve.t.size()) < basis.size()) {
    std::ostringstream msg;
    msg << "record '" << curve.label << "' has " << curve.t.size() << " points, fewer than m = "
        << basis.size();
    throw InputError(msg.str());
  }
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    if (!std::isfinite(curve.t[i]) || !std::isfinite(curve.y[i])) {
      throw InputError("record '" + curve.label + "' has non-finite samples");
    }
    if (curve.t[i] < basis.lower() || curve.t[i] > basis.upper()) {
      throw InputError("record '" + curve.label + "' has points outside the basis domain");
    }
  }
}

Vector fit_curve(const SampledCurve& curve, const BasisSystem& basis) {
  const Matrix phi = basis.evaluate(curve.t);
  const Eigen::Map<const Vector> y(curve.y.data(), static_cast<Index>(curve.y.size()));
  return phi.completeOrthogonalDecomposition().solve(y);
}

}  // namespace

Matrix smooth(std::span<const SampledCurve> samples, const BasisSystem& basis) {
  for (const auto& curve : samples) check_curve(curve, basis);
  Matrix coefficients(static_cast<Index>(samples.size()), basis.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    coefficients.row(static_cast<Index>(i)) = fit_curve(samples[i], basis).transpose();
  });
  return coefficients;
}

BasisSelection select_basis_count(std::span<const SampledCurve> samples, BasisFamily family,
                                  Index m_min, Index m_max, double lower, double upper) {
  if (samples.empty()) throw InputError("basis selection needs at least one record");
  std::size_t min_points = samples.front().t.size();
  for (const auto& c : samples) min_points = std::min(min_points, c.t.size());
  const Index family_min = family == BasisFamily::cubic_bspline ? kOrder : 1;
  const Index lo = std::max(m_min, family_min);
  const Index hi = std::min<Index>(m_max, static_cast<Index>(min_points) - 1);
  if (lo > hi) throw InputError("basis selection: no feasible basis size in the requested range");

  BasisSelection out;
  for (Index m = lo; m <= hi; ++m) {
    const BasisSystem basis(family, m, lower, upper);
    double sse = 0.0;
    double dof = 0.0;
    for (const auto& curve : samples) {
      check_curve(curve, basis);
      const Vector coef = fit_curve(curve, basis);
      const Eigen::Map<const Vector> y(curve.y.data(), static_cast<Index>(curve.y.size()));
      sse += (basis.evaluate(curve.t) * coef - y).squaredNorm();
      dof += static_cast<double>(curve.t.size()) - static_cast<double>(m);
    }
    out.variance_curve.emplace_back(m, sse / dof);
  }
  out.m = out.variance_curve.back().first;
  const double reference = out.variance_curve.front().second;
  for (std::size_t i = 1; i < out.variance_curve.size(); ++i) {
    const double prev = out.variance_curve[i - 1].second;
    const double cur = out.variance_curve[i].second;
    const bool flat = prev <= 1e-12 * std::max(reference, 1e-300) ||
                      (prev - cur) / prev < kBasisPlateau;
    if (flat) {
      out.m = out.variance_curve[i - 1].first;
      break;
    }
  }
  return out;
}

FunctionalDataset::FunctionalDataset(Matrix coefficients, Index variables, BasisSystem basis,
                                     std::vector<std::string> variable_labels,
                                     std::vector<std::string> record_labels)
    : coefficients_(std::move(coefficients)),
      variables_(variables),
      basis_(std::move(basis)),
      variable_labels_(std::move(variable_labels)),
      record_labels_(std::move(record_labels)) {
  if (variables_ < 1) throw InputError("functional dataset needs at least one variable");
  if (coefficients_.cols() != variables_ * basis_.size()) {
    std::ostringstream msg;
    msg << "functional dataset has " << coefficients_.cols() << " columns, expected P*m = "
        << variables_ * basis_.size();
    throw InputError(msg.str());
  }
  if (coefficients_.rows() < 1) throw InputError("functional dataset needs at least one record");
  if (!coefficients_.allFinite()) throw InputError("functional dataset has non-finite coefficients");
  if (variable_labels_.empty()) variable_labels_ = default_labels("x", variables_);
  if (record_labels_.empty()) record_labels_ = default_labels("r", coefficients_.rows());
  if (static_cast<Index>(variable_labels_.size()) != variables_ ||
      static_cast<Index>(record_labels_.size()) != coefficients_.rows()) {
    throw InputError("functional dataset label counts do not match its shape");
  }
}

void FunctionalDataset::set_scales(std::vector<VariableScale> scales) {
  if (!scales.empty() && static_cast<Index>(scales.size()) != variables_) {
    throw InputError("one scale record per variable expected");
  }
  scales_ = std::move(scales);
}

Matrix FunctionalDataset::rotated() const {
  const Index m = basis_.size();
  Matrix out(coefficients_.rows(), coefficients_.cols());
  for (Index p = 0; p < variables_; ++p) {
    out.middleCols(p * m, m) = coefficients_.middleCols(p * m, m) * basis_.gram_factor();
  }
  return out;
}

std::vector<std::string> FunctionalDataset::column_labels() const {
  std::vector<std::string> out;
  for (const auto& v : variable_labels_) {
    for (Index h = 0; h < basis_.size(); ++h) out.push_back(v + "_" + std::to_string(h + 1));
  }
  return out;
}

std::filesystem::path FunctionalDataset::sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".basis.json");
  return p;
}

void FunctionalDataset::write(const std::filesystem::path& csv_path) const {
  write_matrix_csv(csv_path, coefficients_, record_labels_, column_labels());
  nlohmann::ordered_json j;
  j["family"] = to_string(basis_.family());
  j["m"] = basis_.size();
  j["domain"] = {basis_.lower(), basis_.upper()};
  j["variables"] = variable_labels_;
  nlohmann::ordered_json scales = nlohmann::ordered_json::array();
  for (std::size_t p = 0; p < scales_.size(); ++p) {
    scales.push_back({{"variable", variable_labels_[p]},
                      {"mean", std::vector<double>(scales_[p].mean.data(),
                                                   scales_[p].mean.data() + scales_[p].mean.size())},
                      {"scale", scales_[p].scale}});
  }
  j["scales"] = scales;
  std::ofstream out(sidecar_path(csv_path));
  if (!out) throw IoError("cannot write " + sidecar_path(csv_path).string());
  out << j.dump(2) << '\n';
}

FunctionalDataset FunctionalDataset::read(const std::filesystem::path& csv_path) {
  const auto side = sidecar_path(csv_path);
  std::ifstream in(side);
  if (!in) throw IoError("missing basis sidecar " + side.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(side.string() + ": " + e.what());
  }
  try {
    const BasisSystem basis(parse_basis_family(j.at("family").get<std::string>()),
                            j.at("m").get<Index>(), j.at("domain").at(0).get<double>(),
                            j.at("domain").at(1).get<double>());
    auto variables = j.at("variables").get<std::vector<std::string>>();
    const auto count = static_cast<Index>(variables.size());
    const DataMatrix table = DataMatrix::read_csv(csv_path);
    FunctionalDataset ds(table.values(), count, basis,
                         std::move(variables), table.row_labels());
    std::vector<VariableScale> scales;
    if (j.contains("scales")) {
      for (const auto& s : j.at("scales")) {
        const auto mean = s.at("mean").get<std::vector<double>>();
        scales.push_back({Eigen::Map<const Vector>(mean.data(), static_cast<Index>(mean.size())),
                          s.at("scale").get<double>()});
      }
    }
    ds.set_scales(std::move(scales));
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(side.string() + ": " + e.what());
  }
}

FunctionalDataset standardize(const FunctionalDataset& dataset, std::vector<VariableScale>* scales) {
  const Index m = dataset.basis().size();
  const Matrix& w = dataset.basis().gram();
  Matrix out = dataset.coefficients();
  std::vector<VariableScale> record;
  for (Index p = 0; p < dataset.variables(); ++p) {
    auto block = out.middleCols(p * m, m);
    const Vector mean = block.colwise().mean().transpose();
    block.rowwise() -= mean.transpose();
    const double msd = (block * w).cwiseProduct(block).sum() / static_cast<double>(block.rows());
    if (!(msd > 0.0)) {
      throw InputError("variable '" + dataset.variable_labels()[static_cast<std::size_t>(p)] +
                       "' has zero variance");
    }
    const double scale = std::sqrt(msd);
    block /= scale;
    record.push_back({mean, scale});
  }
  FunctionalDataset result(std::move(out), dataset.variables(), dataset.basis(),
                           dataset.variable_labels(), dataset.record_labels());
  result.set_scales(record);
  if (scales) *scales = std::move(record);
  return result;
}

Matrix unstandardize(const Matrix& coefficients, const std::vector<VariableScale>& scales) {
  if (scales.empty()) return coefficients;
  const Index m = scales.front().mean.size();
  if (coefficients.cols() != m * static_cast<Index>(scales.size())) {
    throw InputError("scale record does not match the coefficient layout");
  }
  Matrix out = coefficients;
  for (std::size_t p = 0; p < scales.size(); ++p) {
    auto block = out.middleCols(static_cast<Index>(p) * m, m);
    block *= scales[p].scale;
    block.rowwise() += scales[p].mean.transpose();
  }
  return out;
}

ArchetypalModel functional_fit(const FunctionalDataset& dataset, Index k, const FitOptions& opts,
                               const LossSpec& loss, FitMode mode) {
  const DataMatrix rotated(dataset.rotated(), dataset.record_labels());
  ArchetypalModel model;
  if (mode == FitMode::ada) {
    model = fit_ada(rotated, k, opts, loss);
  } else if (loss.is_robust()) {
    model = fit_robust_aa(rotated, k, opts, loss);
  } else {
    model = fit_aa(rotated, k, opts);
  }
  model.archetypes = model.beta * dataset.coefficients();
  return model;
}

Vector functional_residual_norms(const FunctionalDataset& dataset, const ArchetypalModel& model) {
  const Matrix x = dataset.rotated();
  return residual_norms(x, model.alpha, model.beta * x);
}

}  // namespace robarch
