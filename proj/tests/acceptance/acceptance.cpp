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

// Acceptance checks. Prints one PASS/FAIL line per criterion; exits non-zero
// when any selected criterion fails. Usage: robarch_acceptance [--criterion N]...

#include "robarch/archetypes.hpp"
#include "robarch/archetypoids.hpp"
#include "robarch/detect.hpp"
#include "robarch/fdbasis.hpp"
#include "robarch/finance.hpp"
#include "robarch/loss.hpp"
#include "robarch/nnls.hpp"
#include "robarch/robust.hpp"
#include "robarch/simgen.hpp"
#include "robarch/taxonomy.hpp"
#include "robarch_cli/commands.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace robarch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// Squared distance from x to the segment [a, b].
double segment_rss(const Vector& x, const Vector& a, const Vector& b) {
  const Vector d = a - b;
  const double dd = d.squaredNorm();
  const double w = dd > 0.0 ? std::clamp((x - b).dot(d) / dd, 0.0, 1.0) : 0.0;
  return (x - (w * a + (1.0 - w) * b)).squaredNorm();
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = fs::temp_directory_path() / ("robarch-accept-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1. Analytic identities.
Outcome analytic() {
  Outcome o;
  const Matrix x = gaussian(30, 4, 1);
  const auto aa = fit_aa(DataMatrix(x), 1, {});
  const double mean_err = (aa.archetypes.row(0) - x.colwise().mean()).cwiseAbs().maxCoeff();
  o.require(mean_err <= 1e-8, "AA k=1 mean error " + fmt("%.2e", mean_err));

  Matrix three(3, 2);
  three << 0, 0, 1, 0, 10, 0;
  const auto ada = fit_ada(DataMatrix(three), 1, {});
  o.require(ada.members && (*ada.members)[0] == 1, "ADA k=1 medoid");

  double gram_err = 0.0;
  for (Index m = 1; m <= 15; ++m)
    gram_err = std::max(gram_err, (gram_matrix(BasisFamily::fourier, m, 0.0, 1.0) - Matrix::Identity(m, m))
                                      .cwiseAbs()
                                      .maxCoeff());
  o.require(gram_err <= 1e-8, "Fourier Gram error " + fmt("%.2e", gram_err));

  const double c = 3.0;
  const double bisq_err = std::max({std::abs(bisquare_loss(0.0, c)), std::abs(bisquare_loss(c, c) - c * c / 6.0),
                                    std::abs(bisquare_loss(2 * c, c) - c * c / 6.0),
                                    std::abs(bisquare_loss(1.0, 2.0) - 37.0 / 96.0)});
  o.require(bisq_err <= 1e-12, "bisquare error " + fmt("%.2e", bisq_err));

  Matrix rows(3, 4);
  rows << 0.85, 0.10, 0.05, 0.0, 0.45, 0.44, 0.10, 0.01, 0.70, 0.15, 0.15, 0.0;
  const auto labels = assign_clusters(rows, {}).labels;
  o.require(labels[0].to_string() == "pure(1)" && labels[1].to_string() == "pair(1,2)" &&
                labels[2].to_string() == "mixture",
            "taxonomy rows");
  return o;
}

// 2. Oracle equivalence.
Outcome oracles() {
  Outcome o;
  int agree = 0;
  for (int s = 0; s < 100; ++s) {
    const Index n = 3 + s % 6;  // 3..8
    const Matrix x = gaussian(n, 2, 5000 + static_cast<std::uint64_t>(s));
    double best = std::numeric_limits<double>::infinity();
    for (Index a = 0; a < n; ++a) {
      for (Index b = a + 1; b < n; ++b) {
        double rss = 0.0;
        for (Index i = 0; i < n; ++i) rss += segment_rss(x.row(i), x.row(a), x.row(b));
        best = std::min(best, rss);
      }
    }
    FitOptions opts;
    opts.seed = static_cast<std::uint64_t>(s);
    const auto m = fit_ada(DataMatrix(x), 2, opts);
    agree += m.objective <= best * (1.0 + 1e-9) + 1e-12;
  }
  o.require(agree >= 95, "ADA vs enumeration " + std::to_string(agree) + "/100");

  int grid_ok = 0;
  const int grid_cases = 200;
  for (int s = 0; s < grid_cases; ++s) {
    const Matrix a = gaussian(3, 2, 9000 + static_cast<std::uint64_t>(s)) * (1.0 + s % 4);
    const Vector b = gaussian(3, 1, 19000 + static_cast<std::uint64_t>(s)).col(0) * 2.0;
    double best = std::numeric_limits<double>::infinity();
    for (int q = 0; q <= 10000; ++q) {
      const double w = q / 10000.0;
      best = std::min(best, (w * a.col(0) + (1.0 - w) * a.col(1) - b).squaredNorm());
    }
    const Vector w = solve_simplex_ls({a, b}).weights;
    grid_ok += (a * w - b).squaredNorm() <= best + 1e-6;
  }
  o.require(grid_ok == grid_cases, "simplex LS vs grid " + std::to_string(grid_ok) + "/" + std::to_string(grid_cases));

  double rss_err = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Matrix x = gaussian(40, 5, 300 + static_cast<std::uint64_t>(s));
    const auto m = fit_aa(DataMatrix(x), 3, {});
    long double naive = 0.0L;
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < x.cols(); ++j) {
        long double fitted = 0.0L;
        for (Index h = 0; h < 3; ++h) fitted += static_cast<long double>(m.alpha(i, h)) * m.archetypes(h, j);
        const long double r = x(i, j) - fitted;
        naive += r * r;
      }
    }
    rss_err = std::max(rss_err, std::abs(compute_rss(DataMatrix(x), m) - static_cast<double>(naive)));
  }
  o.require(rss_err <= 1e-10, "RSS vs naive " + fmt("%.2e", rss_err));
  return o;
}

// 3. Functional reduction.
Outcome functional() {
  Outcome o;
  const BasisSystem fourier(BasisFamily::fourier, 7, 0.0, 1.0);
  const Matrix c = gaussian(30, 7, 2);
  const auto f = functional_fit(FunctionalDataset(c, 1, fourier), 3, {}, LossSpec::squared(), FitMode::aa);
  const auto p = fit_aa(DataMatrix(c), 3, {});
  const double diff = std::abs(f.objective - p.objective);
  o.require(diff <= 1e-10, "Fourier vs plain " + fmt("%.2e", diff));

  const BasisSystem spline(BasisFamily::cubic_bspline, 6, 0.0, 1.0);
  const Matrix s = gaussian(20, 6, 3);
  Matrix twice(20, 12);
  twice << s, s;
  const FunctionalDataset one(s, 1, spline);
  const FunctionalDataset two(twice, 2, spline);
  ArchetypalModel m = functional_fit(one, 3, {}, LossSpec::squared(), FitMode::aa);
  const double o2 = functional_residual_norms(two, m).squaredNorm();
  const double rel = std::abs(o2 - 2.0 * m.objective) / m.objective;
  o.require(rel <= 1e-12, "duplicated block ratio error " + fmt("%.2e", rel));

  // Trapezoid quadrature of the residual curves on 2e5 nodes.
  const Matrix res = s - m.alpha * m.archetypes;
  const int nodes = 200001;
  double quad = 0.0;
  for (int q = 0; q < nodes; ++q) {
    const double t = static_cast<double>(q) / (nodes - 1);
    const Vector b = spline.evaluate(t);
    const double w = (q == 0 || q == nodes - 1) ? 0.5 : 1.0;
    quad += w * (res * b).squaredNorm();
  }
  quad /= (nodes - 1);
  const double qerr = std::abs(quad - m.objective);
  o.require(qerr <= 1e-6, "B-spline vs quadrature " + fmt("%.2e", qerr));
  return o;
}

// 4. Outlier inclusion rates.
Outcome inclusion() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.k = 2;
  cfg.replicates = 100;
  cfg.base_seed = 1;

  cfg.spec.cr = 0.1;
  const std::vector<TuningPolicy> low{TuningPolicy::median6(), TuningPolicy::percentile(25),
                                      TuningPolicy::percentile(50), TuningPolicy::percentile(75)};
  const auto t10 = inclusion_experiment(cfg, low);
  cfg.spec.cr = 0.15;
  const std::vector<TuningPolicy> high{TuningPolicy::median6(), TuningPolicy::percentile6(25),
                                       TuningPolicy::percentile6(50), TuningPolicy::percentile6(75)};
  const auto t15 = inclusion_experiment(cfg, high);
  auto get = [](const ExperimentTable& t, const std::string& policy) {
    return t.find(policy, "inclusion_pct")->mean;
  };

  const double sq10 = get(t10, "squared"), sq15 = get(t15, "squared");
  o.require(std::abs(sq10 - 10.0) <= 10.0, "squared cr=0.1 " + fmt("%.0f%%", sq10) + " (target 10+-10)");
  o.require(std::abs(sq15 - 78.0) <= 10.0, "squared cr=0.15 " + fmt("%.0f%%", sq15) + " (target 78+-10)");
  const double me10 = get(t10, "median6"), me15 = get(t15, "median6");
  o.require(std::abs(me10 - 0.0) <= 5.0, "median6 cr=0.1 " + fmt("%.0f%%", me10) + " (target 0+-5)");
  o.require(std::abs(me15 - 32.0) <= 10.0, "median6 cr=0.15 " + fmt("%.0f%%", me15) + " (target 32+-10)");
  for (const char* p : {"p25", "p50", "p75"}) {
    const double v = get(t10, p);
    o.require(v <= 10.0, std::string(p) + " cr=0.1 " + fmt("%.0f%%", v) + " (target 0, slack 10)");
  }
  const double a = get(t15, "6p25"), b = get(t15, "6p50"), c = get(t15, "6p75");
  o.require(a <= b + 10.0 && b <= c + 10.0,
            "factor 6 ordering cr=0.15 " + fmt("%.0f", a) + " <= " + fmt("%.0f", b) + " <= " + fmt("%.0f", c));
  return o;
}

// 5. RADAB detection metrics.
Outcome radab_metrics() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.replicates = 100;
  auto run_at = [&](double cr) {
    cfg.spec.cr = cr;
    return radab_experiment(cfg);
  };
  const auto t10 = run_at(0.1);
  const double tpr = t10.find("p50", "tpr_pct")->mean;
  const double fpr = t10.find("p50", "fpr_pct")->mean;
  o.require(tpr >= 90.0, "cr=0.1 TPR " + fmt("%.1f%%", tpr));
  o.require(fpr <= 5.0, "cr=0.1 FPR " + fmt("%.2f%%", fpr));
  const double mcc = run_at(0.15).find("p50", "mcc")->mean;
  o.require(mcc >= 0.85, "cr=0.15 MCC " + fmt("%.3f", mcc));
  const double fpr0 = run_at(0.0).find("p50", "fpr_pct")->mean;
  o.require(fpr0 <= 10.0, "cr=0 FPR " + fmt("%.2f%%", fpr0));
  return o;
}

// 6. Robust fit stays near the clean fit: 2-D standard normal blob of 100
// points, plus 5 points on a circle of radius 15 around it.
Outcome robustness() {
  Outcome o;
  int wins = 0;
  std::string ratios;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix clean = gaussian(100, 2, seed);
    Matrix dirty(105, 2);
    dirty.topRows(100) = clean;
    std::mt19937_64 rng(seed + 1000);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.141592653589793);
    for (Index i = 100; i < 105; ++i) {
      const double a = angle(rng);
      dirty(i, 0) = 15.0 * std::cos(a);
      dirty(i, 1) = 15.0 * std::sin(a);
    }
    const auto base = fit_aa(DataMatrix(clean), 3, {});
    const auto squared = fit_aa(DataMatrix(dirty), 3, {});
    const auto robust = fit_robust_aa(DataMatrix(dirty), 3, {}, LossSpec::bisquare(TuningPolicy::median6()));
    const double ratio = model_distance(base, robust) / model_distance(base, squared);
    wins += ratio < 0.5;
    ratios += (ratios.empty() ? "" : " ") + fmt("%.2f", ratio);
  }
  o.require(wins >= 8, std::to_string(wins) + "/10 seeds with distance ratio < 0.5 [" + ratios + "]");
  return o;
}

// 7. Waveform recovery.
Outcome waveform() {
  Outcome o;
  Vector mean_corr = Vector::Zero(3);
  const int seeds = 5;
  for (int s = 1; s <= seeds; ++s) {
    WaveformSpec spec;
    spec.seed = static_cast<std::uint64_t>(s);
    const auto data = gen_waveform(spec);
    const auto model = fit_aa(DataMatrix(data.curves), 3, {});
    Matrix corr(3, 3);  // templates x archetypes
    for (Index h = 0; h < 3; ++h) {
      for (Index j = 0; j < 3; ++j) {
        const Vector a = data.templates.row(h).transpose().array() - data.templates.row(h).mean();
        const Vector b = model.archetypes.row(j).transpose().array() - model.archetypes.row(j).mean();
        corr(h, j) = a.dot(b) / (a.norm() * b.norm());
      }
    }
    const auto match = solve_assignment(-corr);
    for (Index h = 0; h < 3; ++h) mean_corr(h) += corr(h, match[static_cast<std::size_t>(h)]) / seeds;
  }
  for (Index h = 0; h < 3; ++h)
    o.require(mean_corr(h) >= 0.9, "h" + std::to_string(h + 1) + " mean correlation " + fmt("%.3f", mean_corr(h)));
  return o;
}

// 8. Finance pipeline determinism and shape.
Outcome pipeline() {
  Outcome o;
  TempDir dir("finance");
  SyntheticMarketSpec spec;
  spec.symbols = 20;
  spec.days = 700;
  spec.seed = 7;
  spec.missing_fraction = 0.02;
  write_panel(synthetic_market(spec), dir.path() / "market");
  auto run_once = [&](const std::string& name) {
    std::vector<std::string> args{"robarch", "finance",
                                  "--prices", (dir.path() / "market" / "prices").string(),
                                  "--index", (dir.path() / "market" / "index.csv").string(),
                                  "--sectors", (dir.path() / "market" / "sectors.csv").string(),
                                  "--out", (dir.path() / name).string(),
                                  "--seed", "7"};
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code;
  };
  const int a = run_once("a");
  const int b = run_once("b");
  o.require(a == 0 && b == 0, "both runs exit 0");
  if (a != 0 || b != 0) return o;

  std::size_t files = 0, identical = 0;
  for (const auto& e : fs::directory_iterator(dir.path() / "a")) {
    ++files;
    const fs::path other = dir.path() / "b" / e.path().filename();
    identical += fs::exists(other) && slurp(e.path()) == slurp(other);
  }
  o.require(files > 0 && identical == files,
            std::to_string(identical) + "/" + std::to_string(files) + " output files byte-identical");
  const auto ds = FunctionalDataset::read(dir.path() / "a" / "dataset.csv");
  const auto sym = static_cast<Index>(load_panel({dir.path() / "market" / "prices", PanelFormat::csv_per_symbol,
                                                  dir.path() / "market" / "index.csv", {}})
                                          .symbols.size());
  o.require(ds.basis().size() == kDefaultFinanceBasis && ds.coefficients().cols() == 2 * ds.basis().size() &&
                ds.records() <= sym,
            "dataset " + std::to_string(ds.records()) + " x " + std::to_string(ds.coefficients().cols()) +
                " (m = " + std::to_string(ds.basis().size()) + ")");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"analytic identities", analytic}},
      {2, {"oracle equivalence", oracles}},
      {3, {"functional reduction", functional}},
      {4, {"outlier inclusion rates", inclusion}},
      {5, {"RADAB detection metrics", radab_metrics}},
      {6, {"robustness to outliers", robustness}},
      {7, {"waveform recovery", waveform}},
      {8, {"pipeline determinism", pipeline}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      const int n = std::atoi(argv[++i]);
      if (!criteria.count(n)) {
        std::cerr << "unknown criterion " << argv[i] << "\n";
        return 2;
      }
      selected.push_back(n);
    } else {
      std::cerr << "usage: robarch_acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty())
    for (const auto& [n, c] : criteria) selected.push_back(n);

  bool all = true;
  for (int n : selected) {
    const auto& [name, fn] = criteria.at(n);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name << "): " << out.detail << " ["
              << fmt("%.1f", secs) << " s]" << std::endl;
  }
  return all ? 0 : 1;
}
