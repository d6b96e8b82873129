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

#include "canopybench/ks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "canopybench/error.hpp"

namespace canopy {

namespace {

constexpr double kTermCutoff = 1e-10;
// Below this the alternating series converges slowly and its truncated
// partial sums wobble around 1; the dual theta form is used instead.
constexpr double kDualBelow = 1.18;
constexpr double kPi = 3.14159265358979323846;

// Q(l) = 1 - sqrt(2 pi)/l * sum_{j>=1} exp(-(2j-1)^2 pi^2 / (8 l^2)).
double survival_dual(double lambda) {
  const double a = -kPi * kPi / (8.0 * lambda * lambda);
  double sum = 0.0;
  for (int j = 1; j < 64; ++j) {
    const double odd = 2.0 * j - 1.0;
    const double term = std::exp(a * odd * odd);
    sum += term;
    if (term < 1e-18) break;
  }
  return 1.0 - std::sqrt(2.0 * kPi) / lambda * sum;
}

}  // namespace

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < kDualBelow) return std::clamp(survival_dual(lambda), 0.0, 1.0);
  const double a = -2.0 * lambda * lambda;
  double sum = 0.0;
  double sign = 1.0;
  for (std::uint64_t k = 1;; ++k) {
    const double kk = static_cast<double>(k);
    const double term = 2.0 * sign * std::exp(a * kk * kk);
    if (std::abs(term) < kTermCutoff) break;
    sum += term;
    sign = -sign;
  }
  return std::clamp(sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> sample_a, std::span<const double> sample_b) {
  if (sample_a.empty() || sample_b.empty()) {
    throw Error(ErrorKind::EmptySample, "KS test needs at least one value per sample");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(sample_a.begin(), sample_a.end(), finite) ||
      !std::all_of(sample_b.begin(), sample_b.end(), finite)) {
    throw Error(ErrorKind::InvalidArgument, "KS samples must be finite");
  }
  std::vector<double> a(sample_a.begin(), sample_a.end());
  std::vector<double> b(sample_b.begin(), sample_b.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  const std::uint64_t n1 = a.size();
  const std::uint64_t n2 = b.size();
  // Gap tracked as the integer |i*n2 - j*n1| to keep D exact.
  std::uint64_t best = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n1 && j < n2) {
    const double x = std::min(a[i], b[j]);
    while (i < n1 && a[i] == x) ++i;
    while (j < n2 && b[j] == x) ++j;
    const std::uint64_t lhs = i * n2;
    const std::uint64_t rhs = j * n1;
    best = std::max(best, lhs > rhs ? lhs - rhs : rhs - lhs);
  }

  KsResult r;
  r.n1 = n1;
  r.n2 = n2;
  r.statistic = static_cast<double>(best) / (static_cast<double>(n1) * static_cast<double>(n2));
  const double ne = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
  const double root = std::sqrt(ne);
  r.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * r.statistic);
  return r;
}

}  // namespace canopy
