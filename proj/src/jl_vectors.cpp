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

#include "qstar/jl_vectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "qstar/errors.hpp"

namespace qstar {

int jl_min_dimension(int k, double gamma) {
  if (k <= 1) return 0;
  return static_cast<int>(std::ceil(8.0 * std::log(static_cast<double>(k)) /
                                    (gamma * gamma)));
}

VectorFamily generate_family(int dim, int k, double gamma, RngStream& rng,
                             int max_retries) {
  if (dim < 1 || k < 1) throw ParameterError("family needs d' >= 1 and k >= 1");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  const int needed = jl_min_dimension(k, gamma);
  if (dim < needed) {
    throw ParameterError("d' = " + std::to_string(dim) +
                         " is below ceil(8 ln k / gamma^2) = " +
                         std::to_string(needed));
  }
  double best = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    VectorFamily family{dim, gamma, {}};
    family.vectors.reserve(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a) {
      Eigen::VectorXd v(dim);
      for (int i = 0; i < dim; ++i) v(i) = rng.normal();
      family.vectors.push_back(v / v.norm());
    }
    const FamilyReport report = verify_family(family);
    if (report.passes(gamma)) return family;
    best = std::min(best, report.max_overlap);
  }
  throw GenerationError("no family with overlaps <= gamma after " +
                            std::to_string(max_retries) +
                            " draws; best max overlap " + std::to_string(best),
                        best);
}

VectorFamily orthonormal_family(int dim, int k, double gamma) {
  if (k > dim) {
    throw ParameterError("orthonormal family needs k <= d' (k = " +
                         std::to_string(k) + ", d' = " + std::to_string(dim) + ")");
  }
  if (k < 1) throw ParameterError("family needs k >= 1");
  VectorFamily family{dim, gamma, {}};
  for (int a = 0; a < k; ++a) family.vectors.push_back(Eigen::VectorXd::Unit(dim, a));
  return family;
}

FamilyReport verify_family(const VectorFamily& family) {
  FamilyReport report;
  const int k = family.size();
  for (int a = 0; a < k; ++a) {
    const auto& va = family.vectors[static_cast<std::size_t>(a)];
    report.max_norm_dev = std::max(report.max_norm_dev, std::abs(va.norm() - 1.0));
    for (int b = a + 1; b < k; ++b) {
      const double overlap = std::abs(va.dot(family.vectors[static_cast<std::size_t>(b)]));
      if (report.worst_a == 0 || overlap > report.max_overlap) {
        report.max_overlap = overlap;
        report.worst_a = a + 1;
        report.worst_b = b + 1;
      }
    }
  }
  return report;
}

void write_family(std::ostream& out, const VectorFamily& family) {
  out << std::setprecision(17);
  out << family.dim << ' ' << family.size() << ' ' << family.gamma << '\n';
  for (const auto& v : family.vectors) {
    for (int i = 0; i < v.size(); ++i) {
      if (i) out << ' ';
      out << v(i);
    }
    out << '\n';
  }
}

VectorFamily read_family(std::istream& in) {
  VectorFamily family;
  int k = 0;
  if (!(in >> family.dim >> k >> family.gamma) || family.dim < 1 || k < 0) {
    throw ParameterError("malformed vector family header");
  }
  for (int a = 0; a < k; ++a) {
    Eigen::VectorXd v(family.dim);
    for (int i = 0; i < family.dim; ++i) {
      if (!(in >> v(i))) {
        throw ParameterError("vector family truncated at vector " + std::to_string(a + 1));
      }
    }
    family.vectors.push_back(std::move(v));
  }
  return family;
}

void save_family(const std::string& path, const VectorFamily& family) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write vector file " + path);
  write_family(out, family);
}

VectorFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read vector file " + path);
  return read_family(in);
}

}  // namespace qstar
