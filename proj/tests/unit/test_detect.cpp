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

#include "helpers.hpp"
#include "robarch/detect.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace robarch;

namespace {

std::vector<bool> bits(unsigned mask, int n) {
  std::vector<bool> out;
  for (int i = 0; i < n; ++i) out.push_back((mask >> i) & 1u);
  return out;
}

}  // namespace

TEST_SUITE("detect") {
  TEST_CASE("score examples") {
    const std::vector<bool> truth{true, false, true, false};
    auto m = score(truth, truth);
    CHECK(m.tpr == 1.0);
    CHECK(m.fpr == 0.0);
    CHECK(m.mcc == doctest::Approx(1.0));

    m = score({false, false, false, false}, {true, true, false, false});
    CHECK(m.tpr == 0.0);
    CHECK(m.fpr == 0.0);
    CHECK(m.mcc == 0.0);

    m = score({true, true, false, false}, {true, false, true, false});
    CHECK(m.tpr == 0.5);
    CHECK(m.fpr == 0.5);
    CHECK(m.mcc == doctest::Approx(0.0));

    m = score({false, true}, {false, false});
    CHECK(m.tpr == 1.0);
    CHECK(m.fpr == 0.5);

    CHECK_THROWS_AS(score({true}, {true, false}), InputError);
  }

  TEST_CASE("score matches a naive counter on all 4-element tables") {
    for (unsigned f = 0; f < 16; ++f) {
      for (unsigned t = 0; t < 16; ++t) {
        const auto flags = bits(f, 4);
        const auto truth = bits(t, 4);
        double tp = 0, fp = 0, tn = 0, fn = 0;
        for (int i = 0; i < 4; ++i) {
          if (flags[i] && truth[i]) ++tp;
          if (flags[i] && !truth[i]) ++fp;
          if (!flags[i] && !truth[i]) ++tn;
          if (!flags[i] && truth[i]) ++fn;
        }
        const auto m = score(flags, truth);
        CHECK(m.tpr == (tp + fn > 0 ? tp / (tp + fn) : 1.0));
        CHECK(m.fpr == (fp + tn > 0 ? fp / (fp + tn) : 0.0));
        const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
        const double mcc = denom > 0 ? (tp * tn - fp * fn) / std::sqrt(denom) : 0.0;
        CHECK(m.mcc == doctest::Approx(mcc));
        CHECK(m.mcc >= -1.0);
        CHECK(m.mcc <= 1.0);

        // Swapping labels on both sides turns TPR into the complement's TNR.
        std::vector<bool> nf, nt;
        for (int i = 0; i < 4; ++i) {
          nf.push_back(!flags[i]);
          nt.push_back(!truth[i]);
        }
        const auto s = score(nf, nt);
        if (tn + fp > 0) CHECK(s.tpr == doctest::Approx(1.0 - m.fpr));
        if (tp + fn > 0) CHECK(s.fpr == doctest::Approx(1.0 - m.tpr));
        CHECK(s.mcc == doctest::Approx(m.mcc));
      }
    }
  }

  TEST_CASE("upper fence") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    double q1 = 0, q3 = 0;
    CHECK(upper_fence(v, &q1, &q3) == doctest::Approx(4.0 + 1.5 * 2.0));
    CHECK(q1 == 2.0);
    CHECK(q3 == 4.0);
    CHECK_THROWS_AS(upper_fence(std::vector<double>{}), InputError);
  }

  TEST_CASE("exact archetypoid data gives no flags") {
    Matrix x(9, 2);
    x << 0, 0, 0, 0, 0, 0, 5, 1, 5, 1, 5, 1, 2, 7, 2, 7, 2, 7;
    const auto report = radab(DataMatrix(x), 3, {});
    CHECK(report.residual_norms.maxCoeff() <= 1e-10);
    CHECK(std::none_of(report.flags.begin(), report.flags.end(), [](bool b) { return b; }));
  }

  TEST_CASE("flags follow the residual ordering") {
    ContaminationSpec spec;
    spec.seed = 3;
    const auto data = gen_contaminated(spec);
    FitOptions opts;
    opts.restarts = 3;
    const auto report = radab(represent_curves(data, CurveRepresentation::grid()), 2, opts);
    REQUIRE(report.flags.size() == 100);
    for (Index i = 0; i < 100; ++i) {
      CHECK(report.flags[static_cast<std::size_t>(i)] == (report.residual_norms(i) > report.fence));
      for (Index j = 0; j < 100; ++j) {
        if (report.flags[static_cast<std::size_t>(j)] && report.residual_norms(i) >= report.residual_norms(j))
          CHECK(report.flags[static_cast<std::size_t>(i)]);
      }
    }
    CHECK(report.model.loss.is_robust());
    CHECK(report.model.loss.policy == TuningPolicy::percentile(50));
    const auto m = score(report.flags, data.outliers);
    CHECK(m.tpr >= 0.8);
  }

  TEST_CASE("functional radab runs on rotated coefficients") {
    ContaminationSpec spec;
    spec.seed = 4;
    const auto data = gen_contaminated(spec);
    const DataMatrix rep = represent_curves(data, CurveRepresentation::basis(BasisFamily::cubic_bspline, 12));
    CHECK(rep.cols() == 12);
    const BasisSystem b(BasisFamily::cubic_bspline, 12, 0.0, 1.0);
    std::vector<SampledCurve> s;
    for (Index i = 0; i < data.curves.rows(); ++i) {
      SampledCurve c{"c", data.grid, {}};
      for (Index g = 0; g < data.curves.cols(); ++g) c.y.push_back(data.curves(i, g));
      s.push_back(c);
    }
    const FunctionalDataset ds(smooth(s, b), 1, b);
    FitOptions opts;
    opts.restarts = 3;
    const auto report = radab(ds, 2, opts);
    CHECK((report.model.archetypes - report.model.beta * ds.coefficients()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(report.residual_norms.isApprox(functional_residual_norms(ds, report.model), 1e-10));
  }

  TEST_CASE("representation strings") {
    CHECK(CurveRepresentation::parse("grid").kind == CurveRepresentation::Kind::grid);
    const auto r = CurveRepresentation::parse("cubic_bspline:12");
    CHECK(r.kind == CurveRepresentation::Kind::basis);
    CHECK(r.m == 12);
    CHECK(CurveRepresentation::parse(r.to_string()).m == 12);
    CHECK_THROWS_AS(CurveRepresentation::parse("cubic_bspline"), InputError);
  }

  TEST_CASE("small experiments") {
    ExperimentConfig cfg;
    cfg.replicates = 3;
    cfg.fit.restarts = 2;
    const auto table = inclusion_experiment(cfg, {TuningPolicy::percentile(50)});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].policy == "squared");
    CHECK(table.rows[1].policy == "p50");
    CHECK(table.seeds == std::vector<std::uint64_t>{1, 2, 3});
    for (const auto& r : table.rows) {
      CHECK(r.metric == "inclusion_pct");
      CHECK(r.mean >= 0.0);
      CHECK(r.mean <= 100.0);
    }
    CHECK(inclusion_experiment(cfg, {TuningPolicy::percentile(50)}).rows[1].mean == table.rows[1].mean);

    const auto radab_table = radab_experiment(cfg);
    REQUIRE(radab_table.find("p50", "tpr_pct") != nullptr);
    REQUIRE(radab_table.find("p50", "mcc") != nullptr);
    CHECK(radab_table.find("p50", "fpr_pct")->mean <= 100.0);

    testing::TempDir dir("exp");
    radab_table.write_csv(dir / "t.csv");
    std::ifstream in(dir / "t.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "policy,cr,metric,mean,sd");

    cfg.replicates = 0;
    CHECK_THROWS_AS(radab_experiment(cfg), InputError);
  }
}
