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

#include "robarch_cli/commands.hpp"

#include "robarch/archetypoids.hpp"
#include "robarch/csv.hpp"
#include "robarch/detect.hpp"
#include "robarch/finance.hpp"
#include "robarch/model_io.hpp"
#include "robarch/robust.hpp"
#include "robarch/simgen.hpp"
#include "robarch/taxonomy.hpp"
#include "robarch_cli/staging.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

namespace robarch::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Shared fitting flags.
struct FitFlags {
  int restarts = 10;
  int max_iters = 100;
  double rel_tol = 1e-6;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--restarts", restarts, "Random restarts per fit")->capture_default_str();
    app->add_option("--max-iters", max_iters, "Iteration cap per restart")->capture_default_str();
    app->add_option("--tol", rel_tol, "Relative convergence tolerance")->capture_default_str();
    app->add_option("--seed", seed, "Base random seed")->capture_default_str();
  }
  FitOptions options() const {
    FitOptions o;
    o.restarts = restarts;
    o.max_iters = max_iters;
    o.rel_tol = rel_tol;
    o.seed = seed;
    o.validate();
    return o;
  }
  json to_json() const {
    return {{"restarts", restarts}, {"max_iters", max_iters}, {"tol", rel_tol}, {"seed", seed}};
  }
};

LossSpec make_loss(const std::string& family, const std::string& policy) {
  if (family == "squared") return LossSpec::squared();
  if (family == "bisquare") return LossSpec::bisquare(TuningPolicy::parse(policy));
  throw InputError("loss must be squared or bisquare, got '" + family + "'");
}

FitMode parse_mode(const std::string& mode) {
  if (mode == "aa") return FitMode::aa;
  if (mode == "ada") return FitMode::ada;
  throw InputError("mode must be aa or ada, got '" + mode + "'");
}

json loss_json(const LossSpec& loss) {
  json j{{"family", loss.is_robust() ? "bisquare" : "squared"}};
  if (loss.is_robust()) j["policy"] = loss.policy.to_string();
  j["resolved_c"] = loss.resolved_c ? json(*loss.resolved_c) : json(nullptr);
  return j;
}

void write_manifest(Staging& stage, const std::string& command, const json& parameters,
                    const json& results) {
  const fs::path path = stage.file("manifest.json");
  std::vector<std::string> outputs = stage.names();
  std::sort(outputs.begin(), outputs.end());
  json doc{{"tool", "robarch"},
           {"version", version()},
           {"command", command},
           {"parameters", parameters},
           {"results", results},
           {"outputs", outputs}};
  write_text(path, doc.dump(2) + "\n");
}

// A dataset as read from disk: plain matrix or functional coefficients.
struct LoadedData {
  std::optional<FunctionalDataset> functional;
  std::optional<DataMatrix> plain;

  const std::vector<std::string>& record_labels() const {
    return functional ? functional->record_labels() : plain->row_labels();
  }
  std::vector<std::string> column_labels() const {
    return functional ? functional->column_labels() : plain->col_labels();
  }
  Index rows() const { return functional ? functional->records() : plain->rows(); }
};

LoadedData load_data(const fs::path& path) {
  LoadedData d;
  if (fs::exists(FunctionalDataset::sidecar_path(path))) {
    d.functional = FunctionalDataset::read(path);
  } else {
    d.plain = DataMatrix::read_csv(path);
  }
  return d;
}

ArchetypalModel fit_loaded(const LoadedData& data, Index k, const FitOptions& opts,
                           const LossSpec& loss, FitMode mode, RobustBuild build) {
  if (data.functional) {
    if (mode == FitMode::ada && loss.is_robust()) {
      const DataMatrix rotated(data.functional->rotated(), data.functional->record_labels());
      ArchetypalModel m = fit_robust_ada(rotated, k, opts, loss, build);
      m.archetypes = m.beta * data.functional->coefficients();
      return m;
    }
    return functional_fit(*data.functional, k, opts, loss, mode);
  }
  if (mode == FitMode::ada) {
    return loss.is_robust() ? fit_robust_ada(*data.plain, k, opts, loss, build)
                            : fit_ada(*data.plain, k, opts);
  }
  return loss.is_robust() ? fit_robust_aa(*data.plain, k, opts, loss) : fit_aa(*data.plain, k, opts);
}

Vector loaded_residuals(const LoadedData& data, const ArchetypalModel& model) {
  if (data.functional) return functional_residual_norms(*data.functional, model);
  return residual_norms(data.plain->values(), model.alpha, model.archetypes);
}

std::vector<std::string> archetype_labels(const ArchetypalModel& model,
                                          const std::vector<std::string>& records) {
  std::vector<std::string> out;
  for (Index j = 0; j < model.k(); ++j) {
    out.push_back(model.members ? records[static_cast<std::size_t>((*model.members)[static_cast<std::size_t>(j)])]
                                : "archetype" + std::to_string(j + 1));
  }
  return out;
}

void write_model_outputs(Staging& stage, const std::string& stem, const ArchetypalModel& model,
                         const std::vector<std::string>& records,
                         const std::vector<std::string>& columns) {
  write_model_json(stage.file(stem + ".json"), {model, records, columns});
  const auto arch = archetype_labels(model, records);
  std::vector<std::string> alpha_cols;
  for (Index j = 0; j < model.k(); ++j) alpha_cols.push_back("alpha" + std::to_string(j + 1));
  write_matrix_csv(stage.file(stem + "_alpha.csv"), model.alpha, records, alpha_cols);
  write_matrix_csv(stage.file(stem + "_beta.csv"), model.beta, arch, records);
  write_matrix_csv(stage.file(stem + "_archetypes.csv"), model.archetypes, arch, columns);
}

std::string join_labels(const std::vector<std::string>& labels, char sep) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += sep;
    out += labels[i];
  }
  return out;
}

// ---- fit ----------------------------------------------------------------

struct FitConfig {
  fs::path input;
  fs::path out;
  std::string mode = "ada";
  Index k = 2;
  std::string loss = "squared";
  std::string policy = "median6";
  std::string build = "robust";
  FitFlags fit;
};

RobustBuild parse_build(const std::string& s) {
  if (s == "robust") return RobustBuild::robust_aa;
  if (s == "squared") return RobustBuild::squared_aa;
  throw InputError("build must be robust or squared, got '" + s + "'");
}

int cmd_fit(const FitConfig& c, std::ostream& out) {
  const FitMode mode = parse_mode(c.mode);
  const LossSpec loss = make_loss(c.loss, c.policy);
  const RobustBuild build = parse_build(c.build);
  const FitOptions opts = c.fit.options();
  const LoadedData data = load_data(c.input);

  const ArchetypalModel model = fit_loaded(data, c.k, opts, loss, mode, build);
  const Vector norms = loaded_residuals(data, model);

  Staging stage(c.out);
  write_model_outputs(stage, "model", model, data.record_labels(), data.column_labels());
  write_matrix_csv(stage.file("residuals.csv"), norms, data.record_labels(), {"residual_norm"});
  json params{{"input", c.input.string()}, {"mode", c.mode}, {"k", c.k}, {"loss", c.loss},
              {"policy", c.policy},         {"build", c.build}, {"functional", data.functional.has_value()},
              {"fit", c.fit.to_json()}};
  json results{{"objective", model.objective}, {"loss", loss_json(model.loss)}};
  if (model.members) results["members"] = archetype_labels(model, data.record_labels());
  write_manifest(stage, "fit", params, results);
  stage.commit();
  out << "objective " << csv::format_double(model.objective) << "\n";
  if (model.members) out << "archetypoids " << join_labels(archetype_labels(model, data.record_labels()), ' ') << "\n";
  return kExitOk;
}

// ---- simulate -----------------------------------------------------------

struct SimulateConfig {
  std::string experiment;
  fs::path out;
  std::uint64_t seed = 1;
  Index replicates = 100;
  double cr = 0.1;
  Index n = 100;
  Index k = 2;
  Index n_per_class = 150;
  std::vector<std::string> policies{"median6", "p25", "p50", "p75", "6p25", "6p50", "6p75"};
  std::string representation = "grid";
  Index symbols = 20;
  Index days = 700;
  double missing = 0.0;
  FitFlags fit;
};

json seeds_json(const std::vector<std::uint64_t>& seeds) { return json(seeds); }

int cmd_simulate(const SimulateConfig& c, std::ostream& out) {
  json params{{"experiment", c.experiment}, {"seed", c.seed}, {"fit", c.fit.to_json()}};
  const std::string& e = c.experiment;
  if (e == "waveform") {
    if (c.n_per_class < 1) throw InputError("--n-per-class must be >= 1");
    WaveformSpec spec;
    spec.n_per_class = c.n_per_class;
    spec.seed = c.seed;
    params["n_per_class"] = c.n_per_class;
    params["k"] = 3;
    const FitOptions opts = c.fit.options();
    const WaveformData data = gen_waveform(spec);
    std::vector<std::string> cols;
    for (double t : data.grid) cols.push_back("t" + csv::format_double(t));
    const DataMatrix x(data.curves, {}, cols);
    const ArchetypalModel model = fit_aa(x, 3, opts);
    Matrix corr(3, 3);
    for (Index a = 0; a < 3; ++a) {
      for (Index h = 0; h < 3; ++h) {
        const Vector u = model.archetypes.row(a).transpose().array() - model.archetypes.row(a).mean();
        const Vector v = data.templates.row(h).transpose().array() - data.templates.row(h).mean();
        corr(a, h) = u.dot(v) / (u.norm() * v.norm());
      }
    }
    Staging stage(c.out);
    x.write_csv(stage.file("curves.csv"));
    Matrix classes(data.curves.rows(), 1);
    for (Index i = 0; i < classes.rows(); ++i) classes(i, 0) = data.classes[static_cast<std::size_t>(i)];
    write_matrix_csv(stage.file("classes.csv"), classes, x.row_labels(), {"class"});
    write_matrix_csv(stage.file("templates.csv"), data.templates, {"h1", "h2", "h3"}, cols);
    write_matrix_csv(stage.file("archetypes.csv"), model.archetypes, default_labels("archetype", 3), cols);
    write_matrix_csv(stage.file("correlations.csv"), corr, default_labels("archetype", 3), {"h1", "h2", "h3"});
    write_manifest(stage, "simulate", params, {{"objective", model.objective}});
    stage.commit();
    out << "objective " << csv::format_double(model.objective) << "\n";
    return kExitOk;
  }

  if (e == "market") {
    SyntheticMarketSpec spec;
    spec.symbols = c.symbols;
    spec.days = c.days;
    spec.seed = c.seed;
    spec.missing_fraction = c.missing;
    params["symbols"] = c.symbols;
    params["days"] = c.days;
    params["missing"] = c.missing;
    const OhlcvPanel panel = synthetic_market(spec);
    Staging stage(c.out);
    write_panel(panel, stage.root());
    for (const char* name : {"prices", "index.csv", "sectors.csv"}) stage.file(name);
    write_manifest(stage, "simulate", params, json::object());
    stage.commit();
    return kExitOk;
  }

  ContaminationSpec spec;
  spec.n = c.n;
  spec.cr = c.cr;
  spec.seed = c.seed;
  spec.validate();
  params["cr"] = c.cr;
  params["n"] = c.n;
  if (e == "contamination") {
    const ContaminatedData data = gen_contaminated(spec);
    std::vector<std::string> cols;
    for (double t : data.grid) cols.push_back("t" + csv::format_double(t));
    Matrix flags(data.curves.rows(), 1);
    for (Index i = 0; i < flags.rows(); ++i) flags(i, 0) = data.outliers[static_cast<std::size_t>(i)] ? 1 : 0;
    const DataMatrix x(data.curves, {}, cols);
    Staging stage(c.out);
    x.write_csv(stage.file("curves.csv"));
    write_matrix_csv(stage.file("truth.csv"), flags, x.row_labels(), {"outlier"});
    write_manifest(stage, "simulate", params, {{"outliers", spec.outlier_count()}});
    stage.commit();
    return kExitOk;
  }
  if (e != "contamination-inclusion" && e != "radab-metrics") {
    throw InputError("unknown experiment '" + e + "'");
  }
  if (c.replicates < 1) throw InputError("--replicates must be >= 1");
  ExperimentConfig config;
  config.spec = spec;
  config.k = c.k;
  config.replicates = c.replicates;
  config.base_seed = c.seed;
  config.fit = c.fit.options();
  config.representation = CurveRepresentation::parse(c.representation);
  params["replicates"] = c.replicates;
  params["k"] = c.k;
  params["representation"] = config.representation.to_string();
  ExperimentTable table;
  if (e == "contamination-inclusion") {
    std::vector<TuningPolicy> policies;
    for (const auto& p : c.policies) policies.push_back(TuningPolicy::parse(p));
    params["policies"] = c.policies;
    table = inclusion_experiment(config, policies);
  } else {
    table = radab_experiment(config);
  }
  Staging stage(c.out);
  table.write_csv(stage.file("table.csv"));
  write_text(stage.file("seeds.json"), json{{"data_seeds", seeds_json(table.seeds)},
                                            {"fit_seed", c.fit.seed}}.dump(2) + "\n");
  write_manifest(stage, "simulate", params, json::object());
  stage.commit();
  for (const auto& r : table.rows) {
    out << r.policy << " " << r.metric << " " << csv::format_double(r.mean) << " (" << csv::format_double(r.sd)
        << ")\n";
  }
  return kExitOk;
}

// ---- detect -------------------------------------------------------------

struct DetectConfig {
  fs::path input;
  fs::path out;
  std::optional<fs::path> truth;
  Index k = 2;
  FitFlags fit;
};

int cmd_detect(const DetectConfig& c, std::ostream& out) {
  const FitOptions opts = c.fit.options();
  const LoadedData data = load_data(c.input);
  std::optional<std::vector<bool>> truth;
  if (c.truth) {
    const DataMatrix t = DataMatrix::read_csv(*c.truth);
    if (t.rows() != data.rows() || t.cols() < 1 || t.row_labels() != data.record_labels()) {
      throw InputError("truth file must list the input's records in order with one flag column");
    }
    truth.emplace();
    for (Index i = 0; i < t.rows(); ++i) truth->push_back(t.values()(i, 0) != 0.0);
  }
  const OutlierReport report =
      data.functional ? radab(*data.functional, c.k, opts) : radab(*data.plain, c.k, opts);

  Staging stage(c.out);
  Matrix table(report.residual_norms.size(), 2);
  table.col(0) = report.residual_norms;
  for (Index i = 0; i < table.rows(); ++i) table(i, 1) = report.flags[static_cast<std::size_t>(i)] ? 1 : 0;
  write_matrix_csv(stage.file("outliers.csv"), table, data.record_labels(), {"residual_norm", "outlier"});
  write_model_outputs(stage, "model", report.model, data.record_labels(), data.column_labels());
  json results{{"fence", report.fence}, {"q1", report.q1}, {"q3", report.q3},
               {"flagged", std::count(report.flags.begin(), report.flags.end(), true)},
               {"loss", loss_json(report.model.loss)}};
  if (truth) {
    const DetectionMetrics m = score(report.flags, *truth);
    results["metrics"] = {{"tpr", m.tpr}, {"fpr", m.fpr}, {"mcc", m.mcc}};
  }
  json params{{"input", c.input.string()}, {"k", c.k}, {"fit", c.fit.to_json()}};
  if (c.truth) params["truth"] = c.truth->string();
  write_manifest(stage, "detect", params, results);
  stage.commit();
  out << "flagged " << results["flagged"].get<long>() << " fence " << csv::format_double(report.fence) << "\n";
  return kExitOk;
}

// ---- taxonomy -----------------------------------------------------------

struct TaxonomyFlags {
  double threshold = 0.8;
  std::string format = "dot";
};

std::map<std::string, std::string> read_sector_map(const fs::path& path) {
  std::map<std::string, std::string> map;
  const auto rows = csv::read_file(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() < 2) throw InputError(path.string() + ": every row needs symbol,sector");
    if (i == 0 && (rows[i][0] == "symbol" || rows[i][0] == "id")) continue;
    map[rows[i][0]] = normalize_sector(rows[i][1]);
  }
  return map;
}

json run_taxonomy(Staging& stage, const ArchetypalModel& model, const std::vector<std::string>& records,
                  const std::vector<std::string>& sectors, const TaxonomyFlags& flags) {
  const NetworkFormat format = parse_network_format(flags.format);
  const ClusterAssignment assignment = assign_clusters(model.alpha, {flags.threshold});
  {
    std::ostringstream csvout;
    csvout << "id,sector,cluster\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
      csvout << csv::join({records[i], sectors[i], assignment.labels[i].to_string()}) << "\n";
    }
    write_text(stage.file("clusters.csv"), csvout.str());
  }
  export_network(assignment, model, records, sectors,
                 stage.file(format == NetworkFormat::dot ? "network.dot" : "network.json"), format);
  write_sector_weights(stage.file("sector_weights.csv"), sector_weights(model.alpha, sectors));
  std::size_t pure = 0, pairs = 0;
  for (const auto& p : assignment.pure) pure += p.size();
  for (const auto& [key, members] : assignment.pairs) pairs += members.size();
  return {{"threshold", flags.threshold},
          {"pure", pure},
          {"pair", pairs},
          {"mixture", assignment.mixtures.size()},
          {"unassigned", assignment.unassigned.size()}};
}

struct TaxonomyConfigCli {
  fs::path model;
  fs::path out;
  std::optional<fs::path> sectors;
  TaxonomyFlags flags;
};

int cmd_taxonomy(const TaxonomyConfigCli& c, std::ostream& out) {
  TaxonomyConfig{c.flags.threshold}.validate();
  parse_network_format(c.flags.format);
  const ModelFile file = read_model_json(c.model);
  std::map<std::string, std::string> map;
  if (c.sectors) map = read_sector_map(*c.sectors);
  std::vector<std::string> sectors;
  for (const auto& r : file.record_labels) {
    const auto it = map.find(r);
    sectors.push_back(it == map.end() ? "unknown" : it->second);
  }
  Staging stage(c.out);
  const json results = run_taxonomy(stage, file.model, file.record_labels, sectors, c.flags);
  json params{{"model", c.model.string()}, {"threshold", c.flags.threshold}, {"format", c.flags.format}};
  if (c.sectors) params["sectors"] = c.sectors->string();
  write_manifest(stage, "taxonomy", params, results);
  stage.commit();
  out << results.dump() << "\n";
  return kExitOk;
}

// ---- smooth -------------------------------------------------------------

struct SmoothConfig {
  fs::path input;
  fs::path out;
  std::string basis = "cubic_bspline";
  Index m = 0;
  Index m_min = 4;
  Index m_max = 22;
  std::optional<double> lower;
  std::optional<double> upper;
  bool standardize_blocks = false;
};

int cmd_smooth(const SmoothConfig& c, std::ostream& out) {
  const BasisFamily family = parse_basis_family(c.basis);
  const auto rows = csv::read_file(c.input);
  if (rows.size() < 2) throw InputError(c.input.string() + ": no data rows");
  int rec = -1, var = -1, tcol = -1, ycol = -1;
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    const std::string& h = rows[0][i];
    if (h == "id" || h == "record") rec = static_cast<int>(i);
    else if (h == "variable") var = static_cast<int>(i);
    else if (h == "t") tcol = static_cast<int>(i);
    else if (h == "value" || h == "y") ycol = static_cast<int>(i);
  }
  if (rec < 0 || tcol < 0 || ycol < 0) throw InputError(c.input.string() + ": header needs id, t and value columns");
  std::vector<std::string> records, variables;
  std::map<std::pair<std::string, std::string>, SampledCurve> curves;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) throw InputError(c.input.string() + ": line " + std::to_string(r + 1) + " has the wrong field count");
    double t = 0, y = 0;
    if (!csv::parse_double(row[static_cast<std::size_t>(tcol)], t) || !csv::parse_double(row[static_cast<std::size_t>(ycol)], y)) {
      throw InputError(c.input.string() + ": line " + std::to_string(r + 1) + " has a bad number");
    }
    const std::string& id = row[static_cast<std::size_t>(rec)];
    const std::string v = var >= 0 ? row[static_cast<std::size_t>(var)] : "x";
    if (std::find(records.begin(), records.end(), id) == records.end()) records.push_back(id);
    if (std::find(variables.begin(), variables.end(), v) == variables.end()) variables.push_back(v);
    auto& curve = curves[{id, v}];
    curve.label = id + ":" + v;
    curve.t.push_back(t);
    curve.y.push_back(y);
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto& [key, curve] : curves) {
    std::vector<std::size_t> order(curve.t.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return curve.t[a] < curve.t[b]; });
    SampledCurve sorted{curve.label, {}, {}};
    for (auto i : order) {
      sorted.t.push_back(curve.t[i]);
      sorted.y.push_back(curve.y[i]);
    }
    curve = std::move(sorted);
    lo = std::min(lo, curve.t.front());
    hi = std::max(hi, curve.t.back());
  }
  if (c.lower) lo = *c.lower;
  if (c.upper) hi = *c.upper;
  if (!(hi > lo)) throw InputError("smoothing domain is empty");
  std::vector<std::vector<SampledCurve>> blocks(variables.size());
  for (std::size_t v = 0; v < variables.size(); ++v) {
    for (const auto& id : records) {
      const auto it = curves.find({id, variables[v]});
      if (it == curves.end()) throw InputError("record " + id + " has no values for variable " + variables[v]);
      blocks[v].push_back(it->second);
    }
  }
  Index m = c.m;
  std::optional<BasisSelection> selection;
  if (m == 0) {
    std::vector<SampledCurve> pool;
    for (const auto& b : blocks) pool.insert(pool.end(), b.begin(), b.end());
    selection = select_basis_count(pool, family, c.m_min, c.m_max, lo, hi);
    m = selection->m;
  }
  const BasisSystem basis(family, m, lo, hi);
  Matrix coeffs(static_cast<Index>(records.size()), m * static_cast<Index>(variables.size()));
  for (std::size_t v = 0; v < variables.size(); ++v) {
    coeffs.middleCols(static_cast<Index>(v) * m, m) = smooth(blocks[v], basis);
  }
  FunctionalDataset ds(std::move(coeffs), static_cast<Index>(variables.size()), basis, variables, records);
  if (c.standardize_blocks) ds = standardize(ds);

  Staging stage(c.out);
  ds.write(stage.file("dataset.csv"));
  stage.file(FunctionalDataset::sidecar_path("dataset.csv").string());
  json results{{"m", m}, {"records", records.size()}, {"variables", variables}};
  if (selection) {
    std::ostringstream sel;
    sel << "m,residual_variance\n";
    for (const auto& [mm, v] : selection->variance_curve) sel << mm << "," << csv::format_double(v) << "\n";
    write_text(stage.file("basis_selection.csv"), sel.str());
  }
  json params{{"input", c.input.string()}, {"basis", c.basis}, {"m", c.m}, {"m_min", c.m_min},
              {"m_max", c.m_max}, {"lower", lo}, {"upper", hi}, {"standardize", c.standardize_blocks}};
  write_manifest(stage, "smooth", params, results);
  stage.commit();
  out << "m " << m << " records " << records.size() << "\n";
  return kExitOk;
}

// ---- finance ------------------------------------------------------------

struct FinanceConfig {
  fs::path prices;
  std::string format = "csv-per-symbol";
  fs::path index;
  std::optional<fs::path> sectors;
  fs::path out;
  std::string start = "2000-01-01";
  double max_missing = 0.2;
  Index window = 250;
  std::string basis = "cubic_bspline";
  Index m = kDefaultFinanceBasis;
  Index k_min = 3;
  Index k_max = 5;
  std::optional<Index> taxonomy_k;
  std::string loss = "squared";
  std::string policy = "median6";
  TaxonomyFlags taxonomy;
  FitFlags fit;
};

// Runs one pipeline stage and prefixes its errors with the stage name.
template <typename F>
auto stage_run(const char* name, F&& f) {
  try {
    return f();
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what(), e.iterations());
  } catch (const IoError& e) {
    throw IoError(std::string(name) + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(std::string(name) + ": " + e.what());
  }
}

int cmd_finance(const FinanceConfig& c, std::ostream& out) {
  const auto start = parse_date(c.start);
  if (!start) throw InputError("--start must be YYYY-MM-DD");
  if (c.k_min < 1 || c.k_max < c.k_min) throw InputError("k range must satisfy 1 <= k-min <= k-max");
  const Index tax_k = c.taxonomy_k.value_or(c.k_min);
  if (tax_k < c.k_min || tax_k > c.k_max) throw InputError("--taxonomy-k must lie in the k range");
  TaxonomyConfig{c.taxonomy.threshold}.validate();
  parse_network_format(c.taxonomy.format);
  const BasisFamily family = parse_basis_family(c.basis);
  const LossSpec loss = make_loss(c.loss, c.policy);
  const FitOptions opts = c.fit.options();
  if (c.window < 2) throw InputError("--window must be >= 2");

  PanelSources sources{c.prices, parse_panel_format(c.format), c.index, c.sectors};
  const OhlcvPanel panel = stage_run("load", [&] { return load_panel(sources); });
  const FilterResult filtered = stage_run("filter", [&] { return filter_missing(panel, *start, c.max_missing); });
  const FeaturePanel features = stage_run("features", [&] { return compute_features(filtered.panel, c.window); });
  const FunctionalPanel fpanel = stage_run("smooth", [&] { return build_functional_panel(features, family, c.m); });
  const FunctionalDataset& ds = fpanel.dataset;
  if (c.k_max > ds.records()) throw InputError("k-max exceeds the number of retained symbols");

  std::vector<ArchetypalModel> models;
  for (Index k = c.k_min; k <= c.k_max; ++k) {
    models.push_back(stage_run("fit", [&] { return functional_fit(ds, k, opts, loss, FitMode::ada); }));
  }

  Staging stage(c.out);
  ds.write(stage.file("dataset.csv"));
  stage.file(FunctionalDataset::sidecar_path("dataset.csv").string());
  std::vector<DroppedSymbol> dropped = filtered.dropped;
  dropped.insert(dropped.end(), fpanel.dropped.begin(), fpanel.dropped.end());
  write_dropped(stage.file("dropped.csv"), dropped);
  write_rejects(stage.file("rejects.csv"), panel.rejects);
  std::ostringstream summary;
  summary << "k,objective,archetypoids\n";
  json per_k = json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const Index k = c.k_min + static_cast<Index>(i);
    const auto labels = archetype_labels(models[i], ds.record_labels());
    write_model_json(stage.file("model_k" + std::to_string(k) + ".json"),
                     {models[i], ds.record_labels(), ds.column_labels()});
    summary << csv::join({std::to_string(k), csv::format_double(models[i].objective), join_labels(labels, ' ')})
            << "\n";
    per_k.push_back({{"k", k}, {"objective", models[i].objective}, {"archetypoids", labels}});
  }
  write_text(stage.file("archetypoids_by_k.csv"), summary.str());
  const json tax = stage_run("taxonomy", [&] {
    return run_taxonomy(stage, models[static_cast<std::size_t>(tax_k - c.k_min)], ds.record_labels(),
                        fpanel.sectors, c.taxonomy);
  });
  json params{{"prices", c.prices.string()},
              {"format", c.format},
              {"index", c.index.string()},
              {"sectors", c.sectors ? json(c.sectors->string()) : json(nullptr)},
              {"start", c.start},
              {"max_missing", c.max_missing},
              {"window", c.window},
              {"basis", c.basis},
              {"m", c.m},
              {"k_min", c.k_min},
              {"k_max", c.k_max},
              {"taxonomy_k", tax_k},
              {"loss", c.loss},
              {"policy", c.policy},
              {"threshold", c.taxonomy.threshold},
              {"network_format", c.taxonomy.format},
              {"fit", c.fit.to_json()}};
  json results{{"symbols_loaded", panel.symbols.size()},
               {"symbols_retained", ds.records()},
               {"dropped", dropped.size()},
               {"rejects", panel.rejects.size()},
               {"m", ds.basis().size()},
               {"models", per_k},
               {"taxonomy", tax}};
  write_manifest(stage, "finance", params, results);
  stage.commit();
  out << "records " << ds.records() << " columns " << ds.coefficients().cols() << "\n";
  for (const auto& row : per_k) out << "k=" << row["k"].get<long>() << " " << row["archetypoids"].dump() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Archetype and archetypoid analysis for multivariate and functional data", "robarch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  FitConfig fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit archetypes (aa) or archetypoids (ada)");
  fit_cmd->add_option("--input", fit.input, "DataMatrix CSV, or FunctionalDataset CSV with sidecar")
      ->required()
      ->check(CLI::ExistingFile);
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();
  fit_cmd->add_option("--mode", fit.mode, "aa or ada")->capture_default_str();
  fit_cmd->add_option("--k", fit.k, "Number of archetypes")->capture_default_str();
  fit_cmd->add_option("--loss", fit.loss, "squared or bisquare")->capture_default_str();
  fit_cmd->add_option("--policy", fit.policy, "Tuning policy: median6, fixed:<c>, p<j>, 6p<j>")
      ->capture_default_str();
  fit_cmd->add_option("--build", fit.build, "Robust ADA BUILD source: robust or squared")->capture_default_str();
  fit.fit.add(fit_cmd);

  SimulateConfig sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate simulated data and replicated experiments");
  sim_cmd->add_option("--experiment", sim.experiment,
                      "waveform, contamination, contamination-inclusion, radab-metrics or market")
      ->required();
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim_cmd->add_option("--replicates", sim.replicates, "Replicate count")->capture_default_str();
  sim_cmd->add_option("--cr", sim.cr, "Contamination rate")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Curves per replicate")->capture_default_str();
  sim_cmd->add_option("--k", sim.k, "Archetypoids per fit")->capture_default_str();
  sim_cmd->add_option("--n-per-class", sim.n_per_class, "Waveform curves per class")->capture_default_str();
  sim_cmd->add_option("--policies", sim.policies, "Tuning policies for the inclusion table")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--representation", sim.representation, "grid or <basis>:<m>")->capture_default_str();
  sim_cmd->add_option("--symbols", sim.symbols, "Market symbols")->capture_default_str();
  sim_cmd->add_option("--days", sim.days, "Market trading days")->capture_default_str();
  sim_cmd->add_option("--missing", sim.missing, "Market per-day gap probability")->capture_default_str();
  sim.fit.add(sim_cmd);

  DetectConfig det;
  std::string det_truth;
  auto* det_cmd = app.add_subcommand("detect", "Flag outliers with robust archetypoids and a box-plot fence");
  det_cmd->add_option("--input", det.input, "DataMatrix or FunctionalDataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  det_cmd->add_option("--out", det.out, "Output directory")->required();
  det_cmd->add_option("--truth", det_truth, "CSV of id,outlier (1/0) for scoring")->check(CLI::ExistingFile);
  det_cmd->add_option("--k", det.k, "Archetypoids")->capture_default_str();
  det.fit.add(det_cmd);

  TaxonomyConfigCli tax;
  std::string tax_sectors;
  auto* tax_cmd = app.add_subcommand("taxonomy", "Cluster a fitted model by alpha thresholds");
  tax_cmd->add_option("--model", tax.model, "Model JSON")->required()->check(CLI::ExistingFile);
  tax_cmd->add_option("--out", tax.out, "Output directory")->required();
  tax_cmd->add_option("--sectors", tax_sectors, "CSV of symbol,sector")->check(CLI::ExistingFile);
  tax_cmd->add_option("--threshold", tax.flags.threshold, "Threshold U in (0.5, 1]")->capture_default_str();
  tax_cmd->add_option("--network-format", tax.flags.format, "dot or json")->capture_default_str();

  SmoothConfig sm;
  double sm_lower = 0, sm_upper = 0;
  auto* sm_cmd = app.add_subcommand("smooth", "Expand sampled curves on a basis");
  sm_cmd->add_option("--input", sm.input, "Long CSV with id, t, value and optional variable")
      ->required()
      ->check(CLI::ExistingFile);
  sm_cmd->add_option("--out", sm.out, "Output directory")->required();
  sm_cmd->add_option("--basis", sm.basis, "fourier or cubic_bspline")->capture_default_str();
  sm_cmd->add_option("--m", sm.m, "Basis size; 0 selects it")->capture_default_str();
  sm_cmd->add_option("--m-min", sm.m_min, "Smallest m tried")->capture_default_str();
  sm_cmd->add_option("--m-max", sm.m_max, "Largest m tried")->capture_default_str();
  auto* lower_opt = sm_cmd->add_option("--lower", sm_lower, "Domain start (default: smallest t)");
  auto* upper_opt = sm_cmd->add_option("--upper", sm_upper, "Domain end (default: largest t)");
  sm_cmd->add_flag("--standardize", sm.standardize_blocks, "Center and scale each variable");

  FinanceConfig fin;
  std::string fin_sectors;
  Index fin_tax_k = 0;
  auto* fin_cmd = app.add_subcommand("finance", "Returns/beta functional pipeline with archetypoids and taxonomy");
  fin_cmd->add_option("--prices", fin.prices, "Directory of <SYMBOL>.csv or one long CSV")
      ->required()
      ->check(CLI::ExistingPath);
  fin_cmd->add_option("--format", fin.format, "csv-per-symbol or single-csv")->capture_default_str();
  fin_cmd->add_option("--index", fin.index, "Index series CSV")->required()->check(CLI::ExistingFile);
  fin_cmd->add_option("--sectors", fin_sectors, "CSV of symbol,sector")->check(CLI::ExistingFile);
  fin_cmd->add_option("--out", fin.out, "Output directory")->required();
  fin_cmd->add_option("--start", fin.start, "First date kept")->capture_default_str();
  fin_cmd->add_option("--max-missing", fin.max_missing, "Largest missing fraction kept")->capture_default_str();
  fin_cmd->add_option("--window", fin.window, "Return and beta window N")->capture_default_str();
  fin_cmd->add_option("--basis", fin.basis, "fourier or cubic_bspline")->capture_default_str();
  fin_cmd->add_option("--m", fin.m, "Basis size; 0 selects it in [4, 22]")->capture_default_str();
  fin_cmd->add_option("--k-min", fin.k_min, "Smallest k")->capture_default_str();
  fin_cmd->add_option("--k-max", fin.k_max, "Largest k")->capture_default_str();
  auto* tax_k_opt = fin_cmd->add_option("--taxonomy-k", fin_tax_k, "k used for the taxonomy (default k-min)");
  fin_cmd->add_option("--loss", fin.loss, "squared or bisquare")->capture_default_str();
  fin_cmd->add_option("--policy", fin.policy, "Tuning policy for bisquare")->capture_default_str();
  fin_cmd->add_option("--threshold", fin.taxonomy.threshold, "Taxonomy threshold U")->capture_default_str();
  fin_cmd->add_option("--network-format", fin.taxonomy.format, "dot or json")->capture_default_str();
  fin.fit.add(fin_cmd);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*det_cmd) {
      if (!det_truth.empty()) det.truth = det_truth;
      return cmd_detect(det, out);
    }
    if (*tax_cmd) {
      if (!tax_sectors.empty()) tax.sectors = tax_sectors;
      return cmd_taxonomy(tax, out);
    }
    if (*sm_cmd) {
      if (lower_opt->count()) sm.lower = sm_lower;
      if (upper_opt->count()) sm.upper = sm_upper;
      return cmd_smooth(sm, out);
    }
    if (*fin_cmd) {
      if (!fin_sectors.empty()) fin.sectors = fin_sectors;
      if (tax_k_opt->count()) fin.taxonomy_k = fin_tax_k;
      return cmd_finance(fin, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace robarch::cli
