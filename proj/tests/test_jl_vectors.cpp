// Copyright 2026 The qstar Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include "doctest.h"
#include "qstar/errors.hpp"
#include "qstar/jl_vectors.hpp"
#include "qstar/rng.hpp"

using namespace qstar;

TEST_CASE("feasible dimension uses the natural log") {
  CHECK(jl_min_dimension(1, 0.25) == 0);
  CHECK(jl_min_dimension(16, 0.25) == 355);
}

TEST_CASE("single vector family is trivially valid") {
  RngStream rng(1);
  const VectorFamily f = generate_family(64, 1, 0.25, rng);
  CHECK(f.size() == 1);
  CHECK(f[1].norm() == doctest::Approx(1.0).epsilon(1e-12));
  const FamilyReport r = verify_family(f);
  CHECK(r.max_overlap == 0.0);
  CHECK(r.passes(0.25));
}

TEST_CASE("gaussian family at d'=2048, k=16 passes a brute-force pair check") {
  RngStream rng(2);
  const VectorFamily f = generate_family(2048, 16, 0.25, rng);
  double worst = 0.0;
  int pairs = 0;
  for (int a = 1; a <= 16; ++a) {
    CHECK(std::abs(f[a].norm() - 1.0) <= 1e-12);
    for (int b = a + 1; b <= 16; ++b) {
      worst = std::max(worst, std::abs(f[a].dot(f[b])));
      ++pairs;
    }
  }
  CHECK(pairs == 120);
  CHECK(worst <= 0.25);
  CHECK(verify_family(f).max_overlap == doctest::Approx(worst).epsilon(1e-15));
}

TEST_CASE("generation is deterministic per seed") {
  RngStream a(77);
  RngStream b(77);
  const VectorFamily fa = generate_family(300, 6, 0.25, a);
  const VectorFamily fb = generate_family(300, 6, 0.25, b);
  for (int i = 1; i <= 6; ++i) CHECK((fa[i].array() == fb[i].array()).all());
}

TEST_CASE("infeasible dimension and exhausted retries") {
  RngStream rng(3);
  CHECK_THROWS_AS(generate_family(10, 16, 0.25, rng), ParameterError);
  CHECK_THROWS_AS(generate_family(300, 6, 0.25, rng, 0), GenerationError);
}

TEST_CASE("orthonormal families") {
  const VectorFamily f = orthonormal_family(4, 3, 0.25);
  CHECK(f[1](0) == 1.0);
  CHECK(f[3](2) == 1.0);
  const FamilyReport r = verify_family(f);
  CHECK(r.max_overlap == 0.0);
  CHECK(r.max_norm_dev == 0.0);
  CHECK_THROWS_AS(orthonormal_family(4, 5, 0.25), ParameterError);
}

TEST_CASE("duplicated vector is flagged") {
  VectorFamily f = orthonormal_family(4, 3, 0.25);
  f.vectors[2] = f.vectors[0];
  const FamilyReport r = verify_family(f);
  CHECK(r.max_overlap == 1.0);
  CHECK_FALSE(r.passes(0.25));
}

TEST_CASE("families round-trip through the text format") {
  RngStream rng(4);
  const VectorFamily f = generate_family(300, 5, 0.25, rng);
  std::stringstream buffer;
  write_family(buffer, f);
  const VectorFamily g = read_family(buffer);
  CHECK(g.dim == 300);
  CHECK(g.size() == 5);
  CHECK(g.gamma == 0.25);
  for (int a = 1; a <= 5; ++a) CHECK((f[a] - g[a]).cwiseAbs().maxCoeff() == 0.0);
  std::stringstream bad("3 2 0.25\n1 0 0\n");
  CHECK_THROWS(read_family(bad));
}
