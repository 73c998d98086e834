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
#include "robarch/model_io.hpp"

#include <doctest.h>

using namespace robarch;

TEST_SUITE("model_io") {
  TEST_CASE("round trip") {
    ModelFile f;
    f.model.archetypes = testing::gaussian(2, 3, 1);
    f.model.alpha = testing::simplex_rows(4, 2, 2);
    f.model.beta = Matrix::Zero(2, 4);
    f.model.beta(0, 1) = 1.0;
    f.model.beta(1, 3) = 1.0;
    f.model.members = std::vector<Index>{1, 3};
    f.model.objective = 0.1 + 0.2;
    f.model.loss = LossSpec::bisquare(TuningPolicy::parse("6p25"));
    f.model.loss.resolved_c = 1.0 / 3.0;
    f.record_labels = {"a", "b", "c", "d"};
    f.column_labels = {"x", "y", "z"};

    testing::TempDir dir("model");
    write_model_json(dir / "m.json", f);
    const ModelFile g = read_model_json(dir / "m.json");
    CHECK(g.model.archetypes == f.model.archetypes);
    CHECK(g.model.alpha == f.model.alpha);
    CHECK(g.model.beta == f.model.beta);
    CHECK(g.model.objective == f.model.objective);
    CHECK(g.model.members == f.model.members);
    CHECK(g.model.loss.family == LossFamily::bisquare);
    CHECK(g.model.loss.policy == f.model.loss.policy);
    CHECK(g.model.loss.resolved_c == f.model.loss.resolved_c);
    CHECK(g.record_labels == f.record_labels);
    CHECK(g.column_labels == f.column_labels);
    CHECK(model_to_json(g)["member_labels"] == nlohmann::json({"b", "d"}));
  }

  TEST_CASE("malformed documents") {
    ModelFile f;
    f.model.archetypes = Matrix::Zero(2, 3);
    f.model.alpha = Matrix::Constant(4, 2, 0.5);
    f.model.beta = Matrix::Constant(2, 4, 0.25);
    f.record_labels = {"a", "b", "c", "d"};
    f.column_labels = {"x", "y", "z"};
    auto doc = model_to_json(f);
    CHECK_NOTHROW(model_from_json(doc));
    auto bad = doc;
    bad.erase("alpha");
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    bad = doc;
    bad["k"] = 3;
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    bad = doc;
    bad["record_labels"] = {"a"};
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    bad = doc;
    bad["format_version"] = 99;
    CHECK_THROWS_AS(model_from_json(bad), InputError);
    CHECK_THROWS_AS(read_model_json("/nonexistent/m.json"), IoError);
  }
}
