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

#include "robarch/detect.hpp"

#include "robarch/archetypoids.hpp"
#include "robarch/csv.hpp"
#include "robarch/robust.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace robarch {

double upper_fence(std::span<const double> values, double* q1, double* q3) {
  const double lo = quantile(values, 0.25);
  const double hi = quantile(values, 0.75);
  if (q1) *q1 = lo;
  if (q3) *q3 = hi;
  return hi + kFenceMultiplier * (hi - lo);
}

OutlierReport radab(const DataMatrix& data, Index k, const FitOptions& opts) {
  if (k < 1) throw InputError("radab needs k >= 1");
  OutlierReport report;
  report.model = fit_robust_ada(data, k, opts, LossSpec::bisquare(TuningPolicy::percentile(50)));
  report.residual_norms = residual_norms(data.values(), report.model.alpha, report.model.archetypes);
  const std::span<const double> norms(report.residual_norms.data(),
                                      static_cast<std::size_t>(report.residual_norms.size()));
  report.fence = upper_fence(norms, &report.q1, &report.q3);
  report.flags.resize(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) report.flags[i] = norms[i] > report.fence;
  return report;
}

OutlierReport radab(const FunctionalDataset& dataset, Index k, const FitOptions& opts) {
  OutlierReport report = radab(DataMatrix(dataset.rotated(), dataset.record_labels()), k, opts);
  report.model.archetypes = report.model.beta * dataset.coefficients();
  return report;
}

DetectionMetrics score(const std::vector<bool>& flags, const std::vector<bool>& truth) {
  if (flags.size() != truth.size()) throw InputError("score: flags and truth differ in length");
  double tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (truth[i]) {
      (flags[i] ? tp : fn) += 1;
    } else {
      (flags[i] ? fp : tn) += 1;
    }
  }
  DetectionMetrics m;
  m.tpr = tp + fn > 0 ? tp / (tp + fn) : 1.0;
  m.fpr = fp + tn > 0 ? fp / (fp + tn) : 0.0;
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  m.mcc = denom > 0 ? (tp * tn - fp * fn) / std::sqrt(denom) : 0.0;
  return m;
}

std::string CurveRepresentation::to_string() const {
  if (kind == Kind::grid) return "grid";
  return robarch::to_string(family) + ":" + std::to_string(m);
}

CurveRepresentation CurveRepresentation::parse(const std::string& text) {
  if (text == "grid") return grid();
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InputError("bad representation '" + text + "'");
  Index m = 0;
  try {
    m = std::stol(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("bad representation '" + text + "'");
  }
  return basis(parse_basis_family(text.substr(0, colon)), m);
}

DataMatrix represent_curves(const ContaminatedData& data, const CurveRepresentation& repr) {
  if (repr.kind == CurveRepresentation::Kind::grid) return DataMatrix(data.curves);
  const BasisSystem basis(repr.family, repr.m, data.grid.front(), data.grid.back());
  std::vector<SampledCurve> samples;
  samples.reserve(static_cast<std::size_t>(data.curves.rows()));
  for (Index i = 0; i < data.curves.rows(); ++i) {
    SampledCurve c{"r" + std::to_string(i + 1), data.grid, std::vector<double>(data.grid.size())};
    for (std::size_t g = 0; g < c.y.size(); ++g) c.y[g] = data.curves(i, static_cast<Index>(g));
    samples.push_back(std::move(c));
  }
  const FunctionalDataset ds(smooth(samples, basis), 1, basis);
  return DataMatrix(ds.rotated());
}

void ExperimentTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "policy,cr,metric,mean,sd\n";
  for (const auto& r : rows) {
    out << csv::join({r.policy, csv::format_double(r.cr), r.metric, csv::format_double(r.mean),
                      csv::format_double(r.sd)})
        << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

const ExperimentRow* ExperimentTable::find(const std::string& policy,
                                           const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.policy == policy && r.metric == metric) return &r;
  }
  return nullptr;
}

namespace {

void check_config(const ExperimentConfig& config) {
  if (config.replicates < 1) throw InputError("experiments need at least one replicate");
  if (config.k < 1) throw InputError("experiments need k >= 1");
  config.spec.validate();
  config.fit.validate();
}

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

ContaminatedData replicate_data(const ExperimentConfig& config, Index r) {
  ContaminationSpec spec = config.spec;
  spec.seed = config.base_seed + static_cast<std::uint64_t>(r);
  return gen_contaminated(spec);
}

bool includes_outlier(const ArchetypalModel& model, const std::vector<bool>& outliers) {
  for (Index m : *model.members) {
    if (outliers[static_cast<std::size_t>(m)]) return true;
  }
  return false;
}

}  // namespace

ExperimentTable inclusion_experiment(const ExperimentConfig& config,
                                     const std::vector<TuningPolicy>& policies) {
  check_config(config);
  const auto reps = static_cast<std::size_t>(config.replicates);
  const std::size_t columns = policies.size() + 1;
  std::vector<std::vector<double>> hits(columns, std::vector<double>(reps, 0.0));
  parallel_for(reps, [&](std::size_t r) {
    const ContaminatedData data = replicate_data(config, static_cast<Index>(r));
    const DataMatrix x = represent_curves(data, config.representation);
    FitOptions fit = config.fit;
    fit.seed = derive_seed(config.fit.seed, r);
    hits[0][r] = includes_outlier(fit_ada(x, config.k, fit), data.outliers) ? 100.0 : 0.0;
    for (std::size_t p = 0; p < policies.size(); ++p) {
      const ArchetypalModel model = fit_robust_ada(x, config.k, fit, LossSpec::bisquare(policies[p]));
      hits[p + 1][r] = includes_outlier(model, data.outliers) ? 100.0 : 0.0;
    }
  });
  ExperimentTable table;
  for (std::size_t r = 0; r < reps; ++r) table.seeds.push_back(config.base_seed + r);
  for (std::size_t p = 0; p < columns; ++p) {
    const auto [mean, sd] = mean_sd(hits[p]);
    table.rows.push_back({p == 0 ? "squared" : policies[p - 1].to_string(), config.spec.cr,
                          "inclusion_pct", mean, sd});
  }
  return table;
}

ExperimentTable radab_experiment(const ExperimentConfig& config) {
  check_config(config);
  const auto reps = static_cast<std::size_t>(config.replicates);
  std::vector<double> tpr(reps), fpr(reps), mcc(reps);
  parallel_for(reps, [&](std::size_t r) {
    const ContaminatedData data = replicate_data(config, static_cast<Index>(r));
    const DataMatrix x = represent_curves(data, config.representation);
    FitOptions fit = config.fit;
    fit.seed = derive_seed(config.fit.seed, r);
    const OutlierReport report = radab(x, config.k, fit);
    const DetectionMetrics m = score(report.flags, data.outliers);
    tpr[r] = 100.0 * m.tpr;
    fpr[r] = 100.0 * m.fpr;
    mcc[r] = m.mcc;
  });
  ExperimentTable table;
  for (std::size_t r = 0; r < reps; ++r) table.seeds.push_back(config.base_seed + r);
  const std::string policy = TuningPolicy::percentile(50).to_string();
  auto add = [&](const char* name, const std::vector<double>& v) {
    const auto [mean, sd] = mean_sd(v);
    table.rows.push_back({policy, config.spec.cr, name, mean, sd});
  };
  add("tpr_pct", tpr);
  add("fpr_pct", fpr);
  add("mcc", mcc);
  return table;
}

}  // namespace robarch
