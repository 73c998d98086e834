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
#include "robarch/archetypoids.hpp"
#include "robarch/fdbasis.hpp"
#include "robarch/nnls.hpp"
#include "robarch/simgen.hpp"

#include <doctest.h>

#include <cmath>

using namespace robarch;

namespace {

// Oracle: trapezoid rule on `nodes` points.
Matrix trapezoid_gram(const BasisSystem& basis, int nodes) {
  const Index m = basis.size();
  Matrix w = Matrix::Zero(m, m);
  const double h = (basis.upper() - basis.lower()) / (nodes - 1);
  for (int q = 0; q < nodes; ++q) {
    const double t = basis.lower() + q * h;
    const Vector b = basis.evaluate(t);
    const double weight = (q == 0 || q == nodes - 1) ? 0.5 * h : h;
    w.noalias() += weight * b * b.transpose();
  }
  return w;
}

std::vector<double> grid(double a, double b, int points) {
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / (points - 1);
  return t;
}

SampledCurve from_coefficients(const BasisSystem& basis, const Vector& c, const std::vector<double>& t,
                               const std::string& label) {
  SampledCurve s{label, t, {}};
  for (double v : t) s.y.push_back(basis.evaluate(v).dot(c));
  return s;
}

}  // namespace

TEST_SUITE("fdbasis") {
  TEST_CASE("Fourier Gram is the identity") {
    for (Index m = 1; m <= 11; ++m) {
      CHECK((gram_matrix(BasisFamily::fourier, m, 0.0, 1.0) - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-8);
      const BasisSystem b(BasisFamily::fourier, m, -1.0, 2.0);
      CHECK((gram_by_simpson(b) - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-6);
    }
    const BasisSystem one(BasisFamily::fourier, 1, 0.0, 1.0);
    CHECK(one.evaluate(0.3)(0) == doctest::Approx(1.0));
    CHECK(one.gram()(0, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("B-spline Gram matches a fine trapezoid oracle") {
    for (Index m : {4, 7}) {
      const BasisSystem b(BasisFamily::cubic_bspline, m, 0.0, 1.0);
      const Matrix oracle = trapezoid_gram(b, 1000001);
      CHECK((b.gram() - oracle).cwiseAbs().maxCoeff() <= 1e-7);
      CHECK((b.gram() - b.gram().transpose()).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((b.gram_factor() * b.gram_factor().transpose() - b.gram()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("B-splines form a partition of unity") {
    const BasisSystem b(BasisFamily::cubic_bspline, 9, 2.0, 5.0);
    for (double t : grid(2.0, 5.0, 37)) CHECK(b.evaluate(t).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("basis validation") {
    CHECK_THROWS_AS(BasisSystem(BasisFamily::cubic_bspline, 3, 0, 1), InputError);
    CHECK_THROWS_AS(BasisSystem(BasisFamily::fourier, 0, 0, 1), InputError);
    CHECK_THROWS_AS(BasisSystem(BasisFamily::fourier, 3, 1, 1), InputError);
    CHECK_THROWS_AS(parse_basis_family("wavelet"), InputError);
    CHECK(parse_basis_family("bspline") == BasisFamily::cubic_bspline);
  }

  TEST_CASE("smoothing recovers coefficients in the span") {
    for (BasisFamily f : {BasisFamily::fourier, BasisFamily::cubic_bspline}) {
      const BasisSystem b(f, 8, 0.0, 3.0);
      const Matrix truth = testing::gaussian(3, 8, 4);
      std::vector<SampledCurve> s;
      for (Index i = 0; i < 3; ++i) s.push_back(from_coefficients(b, truth.row(i).transpose(), grid(0, 3, 60), "r"));
      const Matrix got = smooth(s, b);
      CHECK((got - truth).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  TEST_CASE("constant function is reproduced") {
    const BasisSystem b(BasisFamily::cubic_bspline, 6, 0.0, 1.0);
    const auto t = grid(0, 1, 41);
    const SampledCurve c{"c", t, std::vector<double>(t.size(), 5.0)};
    const Matrix coef = smooth(std::vector<SampledCurve>{c}, b);
    for (double v : t) CHECK(std::abs(b.evaluate(v).dot(coef.row(0).transpose()) - 5.0) <= 1e-8);
  }

  TEST_CASE("waveform smoothing stays below the noise level") {
    WaveformSpec spec;
    spec.n_per_class = 5;
    const auto data = gen_waveform(spec);
    WaveformSpec clean = spec;
    clean.noise_sd = 0.0;
    const auto truth = gen_waveform(clean);
    const BasisSystem b(BasisFamily::cubic_bspline, 25, 1.0, 21.0);
    std::vector<SampledCurve> s;
    for (Index i = 0; i < data.curves.rows(); ++i) {
      SampledCurve c{"w", data.grid, {}};
      for (Index g = 0; g < data.curves.cols(); ++g) c.y.push_back(data.curves(i, g));
      s.push_back(c);
    }
    const Matrix coef = smooth(s, b);
    const Matrix fitted = coef * b.evaluate(data.grid).transpose();
    for (Index i = 0; i < fitted.rows(); ++i) {
      const double rmse = std::sqrt((fitted.row(i) - truth.curves.row(i)).squaredNorm() / fitted.cols());
      CHECK(rmse < 1.0);
    }
  }

  TEST_CASE("smooth rejects short or out-of-domain records") {
    const BasisSystem b(BasisFamily::cubic_bspline, 6, 0.0, 1.0);
    const SampledCurve shortc{"short", {0.1, 0.2}, {1, 2}};
    CHECK_THROWS_AS(smooth(std::vector<SampledCurve>{shortc}, b), InputError);
    const auto t = grid(0, 2, 20);
    const SampledCurve outside{"out", t, std::vector<double>(t.size(), 1.0)};
    CHECK_THROWS_AS(smooth(std::vector<SampledCurve>{outside}, b), InputError);
  }

  TEST_CASE("basis count selection") {
    const BasisSystem b6(BasisFamily::fourier, 6, 0.0, 1.0);
    std::vector<SampledCurve> exact;
    const Matrix coef = testing::gaussian(10, 6, 8);
    for (Index i = 0; i < 10; ++i) exact.push_back(from_coefficients(b6, coef.row(i).transpose(), grid(0, 1, 50), "e"));
    const auto sel = select_basis_count(exact, BasisFamily::fourier, 3, 12, 0.0, 1.0);
    CHECK(sel.m <= 7);
    for (const auto& [m, v] : sel.variance_curve)
      if (m == 6) CHECK(v < 1e-10);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<SampledCurve> noise;
    for (int i = 0; i < 30; ++i) {
      SampledCurve c{"n", grid(0, 1, 60), {}};
      for (std::size_t k = 0; k < c.t.size(); ++k) c.y.push_back(g(rng));
      noise.push_back(c);
    }
    CHECK(select_basis_count(noise, BasisFamily::cubic_bspline, 4, 12, 0.0, 1.0).m == 4);
  }

  TEST_CASE("rotation reproduces the W norm") {
    const BasisSystem b(BasisFamily::cubic_bspline, 7, 0.0, 2.0);
    const Matrix v = testing::gaussian(10, 7, 2);
    const Matrix rotated = v * b.gram_factor();
    for (Index i = 0; i < 10; ++i) {
      const double direct = v.row(i) * b.gram() * v.row(i).transpose();
      CHECK(std::abs(rotated.row(i).squaredNorm() - direct) <= 1e-10 * std::max(1.0, direct));
    }
  }

  TEST_CASE("standardization") {
    const BasisSystem b(BasisFamily::cubic_bspline, 5, 0.0, 1.0);
    Matrix c = testing::gaussian(12, 10, 3);
    c.leftCols(5).array() += 2.0;
    const FunctionalDataset ds(c, 2, b);
    const FunctionalDataset st = standardize(ds);
    const Matrix r = st.rotated();
    for (Index p = 0; p < 2; ++p) {
      const Matrix block = r.middleCols(p * 5, 5);
      CHECK(block.rowwise().squaredNorm().mean() == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(st.coefficients().middleCols(p * 5, 5).colwise().mean().cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK((standardize(st).coefficients() - st.coefficients()).cwiseAbs().maxCoeff() <= 1e-10);
    Matrix scaled = c;
    scaled.rightCols(5) *= 10.0;
    CHECK((standardize(FunctionalDataset(scaled, 2, b)).coefficients() - st.coefficients()).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK((unstandardize(st.coefficients(), st.scales()) - c).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("Fourier fit equals plain AA on coefficients") {
    const BasisSystem b(BasisFamily::fourier, 5, 0.0, 1.0);
    const Matrix c = testing::gaussian(25, 5, 6);
    const FunctionalDataset ds(c, 1, b);
    const auto f = functional_fit(ds, 3, {}, LossSpec::squared(), FitMode::aa);
    const auto p = fit_aa(DataMatrix(c), 3, {});
    CHECK(std::abs(f.objective - p.objective) <= 1e-10);
    const auto fa = functional_fit(ds, 2, {}, LossSpec::squared(), FitMode::ada);
    const auto pa = fit_ada(DataMatrix(c), 2, {});
    CHECK(std::abs(fa.objective - pa.objective) <= 1e-10);
  }

  TEST_CASE("duplicated blocks double the objective") {
    const BasisSystem b(BasisFamily::cubic_bspline, 6, 0.0, 1.0);
    const Matrix c = testing::gaussian(15, 6, 7);
    Matrix twice(15, 12);
    twice << c, c;
    const FunctionalDataset one(c, 1, b);
    const FunctionalDataset two(twice, 2, b);
    const auto m1 = functional_fit(one, 3, {}, LossSpec::squared(), FitMode::aa);
    ArchetypalModel shared = m1;
    shared.archetypes = m1.beta * twice;
    const double o2 = functional_residual_norms(two, shared).squaredNorm();
    CHECK(o2 == doctest::Approx(2.0 * m1.objective).epsilon(1e-12));
    CHECK(functional_residual_norms(one, m1).squaredNorm() == doctest::Approx(m1.objective).epsilon(1e-10));
  }

  TEST_CASE("bivariate objective splits by variable") {
    const BasisSystem b(BasisFamily::cubic_bspline, 5, 0.0, 1.0);
    const Matrix c = testing::gaussian(12, 10, 9);
    const FunctionalDataset ds(c, 2, b);
    const auto m = functional_fit(ds, 2, {}, LossSpec::squared(), FitMode::aa);
    double parts = 0.0;
    for (Index p = 0; p < 2; ++p) {
      const Matrix cp = c.middleCols(p * 5, 5);
      const Matrix res = cp - m.alpha * (m.beta * cp);
      for (Index i = 0; i < res.rows(); ++i) parts += res.row(i) * b.gram() * res.row(i).transpose();
    }
    CHECK(m.objective == doctest::Approx(parts).epsilon(1e-10));
  }

  TEST_CASE("B-spline objective matches quadrature") {
    const BasisSystem b(BasisFamily::cubic_bspline, 6, 0.0, 1.0);
    const Matrix c = testing::gaussian(10, 6, 10);
    const FunctionalDataset ds(c, 1, b);
    const auto m = functional_fit(ds, 2, {}, LossSpec::squared(), FitMode::aa);
    const Matrix res = c - m.alpha * m.archetypes;
    const int nodes = 200001;
    const auto t = grid(0, 1, nodes);
    const Matrix e = b.evaluate(t);
    const Matrix curves = res * e.transpose();
    double total = 0.0;
    for (Index i = 0; i < curves.rows(); ++i) {
      for (int q = 0; q < nodes; ++q) {
        const double w = (q == 0 || q == nodes - 1) ? 0.5 : 1.0;
        total += w * curves(i, q) * curves(i, q);
      }
    }
    total /= (nodes - 1);
    CHECK(std::abs(total - m.objective) <= 1e-6);
  }

  TEST_CASE("rotation leaves alpha unchanged") {
    const BasisSystem b(BasisFamily::cubic_bspline, 5, 0.0, 1.0);
    const Matrix c = testing::gaussian(10, 5, 12);
    const FunctionalDataset ds(c, 1, b);
    const auto m = functional_fit(ds, 2, {}, LossSpec::squared(), FitMode::aa);
    // Direct W-weighted simplex LS: design Z L, target x L, identical to the
    // Gram form with W.
    for (Index i = 0; i < 10; ++i) {
      const Matrix g = m.archetypes * b.gram() * m.archetypes.transpose();
      const Vector cross = m.archetypes * b.gram() * c.row(i).transpose();
      const Vector w = solve_simplex_gram(g, cross).weights;
      CHECK((w.transpose() - m.alpha.row(i)).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }

  TEST_CASE("dataset file round trip") {
    testing::TempDir dir("fd");
    const BasisSystem b(BasisFamily::cubic_bspline, 5, 0.0, 2.0);
    FunctionalDataset ds = standardize(FunctionalDataset(testing::gaussian(4, 10, 1), 2, b, {"x", "y"}, {"a", "b", "c", "d"}));
    ds.write(dir / "d.csv");
    CHECK(std::filesystem::exists(FunctionalDataset::sidecar_path(dir / "d.csv")));
    const FunctionalDataset back = FunctionalDataset::read(dir / "d.csv");
    CHECK(back.coefficients() == ds.coefficients());
    CHECK(back.basis() == ds.basis());
    CHECK(back.variable_labels() == ds.variable_labels());
    CHECK(back.record_labels() == ds.record_labels());
    REQUIRE(back.scales().size() == 2);
    CHECK(back.scales()[1].scale == ds.scales()[1].scale);
    CHECK(ds.column_labels()[5] == "y_1");
  }
}
