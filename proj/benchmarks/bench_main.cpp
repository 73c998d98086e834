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

#include "robarch/archetypoids.hpp"
#include "robarch/nnls.hpp"
#include "robarch/robust.hpp"
#include "robarch/simgen.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace robarch;

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

void BM_SimplexLs(benchmark::State& state) {
  const Index atoms = state.range(0);
  SimplexLsProblem p{gaussian(50, atoms, 1), gaussian(50, 1, 2).col(0)};
  for (auto _ : state) benchmark::DoNotOptimize(solve_simplex_ls(p).weights.data());
}
BENCHMARK(BM_SimplexLs)->Arg(2)->Arg(4)->Arg(8)->Arg(16)->Arg(64);

DataMatrix contaminated(Index n) {
  ContaminationSpec spec;
  spec.n = n;
  spec.seed = 7;
  return DataMatrix(gen_contaminated(spec).curves);
}

void BM_FitAA(benchmark::State& state) {
  const DataMatrix x = contaminated(state.range(0));
  FitOptions opts;
  opts.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_aa(x, state.range(1), opts).objective);
}
BENCHMARK(BM_FitAA)->Args({100, 2})->Args({100, 4})->Args({400, 4})->Unit(benchmark::kMillisecond);

void BM_FitADA(benchmark::State& state) {
  const DataMatrix x = contaminated(state.range(0));
  FitOptions opts;
  opts.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fit_ada(x, state.range(1), opts).objective);
}
BENCHMARK(BM_FitADA)->Args({100, 2})->Args({100, 4})->Unit(benchmark::kMillisecond);

void BM_FitRobustADA(benchmark::State& state) {
  const DataMatrix x = contaminated(state.range(0));
  FitOptions opts;
  opts.restarts = 1;
  const LossSpec loss = LossSpec::bisquare(TuningPolicy::median6());
  for (auto _ : state) benchmark::DoNotOptimize(fit_robust_ada(x, state.range(1), opts, loss).objective);
}
BENCHMARK(BM_FitRobustADA)->Args({100, 2})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
