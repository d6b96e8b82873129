/* Copyright 2026 The canopybench Authors
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

#pragma once

#include <cstddef>
#include <span>

namespace canopy {

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

// Two-sample Kolmogorov-Smirnov test. The statistic is exact (merged sweep,
// ties consumed together); the p-value is the asymptotic Kolmogorov tail
//   Q(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2)
// with lambda = (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * D and ne = n1 n2 / (n1 + n2).
KsResult ks_two_sample(std::span<const double> sample_a, std::span<const double> sample_b);

// Q(lambda), series truncated at the first term below 1e-10 in magnitude.
double kolmogorov_survival(double lambda);

}  // namespace canopy
