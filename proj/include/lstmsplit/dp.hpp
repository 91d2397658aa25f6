/*
 * Copyright 2026 The lstmsplit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LSTMSPLIT_DP_HPP_
#define LSTMSPLIT_DP_HPP_

#include <cstdint>
#include <random>

#include "lstmsplit/tensor.hpp"

namespace lstmsplit {

// (epsilon, delta) Gaussian mechanism on cut-layer activations. Each row of
// the tensor handed to these functions is one sample, flattened over
// (timesteps x hidden), so clip_norm bounds the per-sample L2 sensitivity.
struct DpConfig {
  bool enabled = false;
  double epsilon = 1.0;
  double delta = 1e-5;
  double clip_norm = 1.0;
  bool noise_gradients = false;
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError when enabled with an invalid budget.
  void validate() const;
};

/// Scales each row by min(1, C / ||row||).
Tensor2 clip_l2(const Tensor2 &activations, double clip_norm);

/// Vector-Jacobian product of clip_l2: maps dLoss/d(clipped) to dLoss/d(input).
Tensor2 clip_l2_backward(const Tensor2 &activations, const Tensor2 &d_clipped, double clip_norm);

/// sigma = C * sqrt(2 ln(1.25 / delta)) / epsilon.
double gaussian_sigma(double clip_norm, double epsilon, double delta);

/// Seeded noise source owned by a single session.
class DpNoise {
 public:
  explicit DpNoise(std::uint64_t seed) : gen_(seed) {}

  /// Clip then add N(0, sigma^2) to every element. Identity when disabled.
  Tensor2 transform(const Tensor2 &activations, const DpConfig &cfg);

  /// Adds N(0, sigma^2) to every element, no clipping.
  Tensor2 add_noise(const Tensor2 &x, double sigma);

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace lstmsplit

#endif  // LSTMSPLIT_DP_HPP_
