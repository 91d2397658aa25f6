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

#include "lstmsplit/dp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lstmsplit/errors.hpp"

namespace lstmsplit {

namespace {

double row_norm(const Tensor2 &x, std::size_t r) {
  double s = 0.0;
  for (double v : x.row(r)) s += v * v;
  return std::sqrt(s);
}

}  // namespace

void DpConfig::validate() const {
  if (!enabled) return;
  std::ostringstream os;
  if (!(epsilon > 0.0) || std::isnan(epsilon)) os << "epsilon must be > 0 (got " << epsilon << ") ";
  if (!(delta > 0.0 && delta < 1.0)) os << "delta must lie in (0, 1) (got " << delta << ") ";
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm))
    os << "clip-norm must be > 0 (got " << clip_norm << ")";
  if (!os.str().empty()) throw ConfigError("invalid privacy budget: " + os.str());
}

Tensor2 clip_l2(const Tensor2 &activations, double clip_norm) {
  if (!(clip_norm > 0.0)) throw ConfigError("clip_l2: clip norm must be positive");
  Tensor2 out = activations;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const double n = row_norm(activations, r);
    if (n <= clip_norm) continue;
    const double s = clip_norm / n;
    for (std::size_t j = 0; j < out.cols(); ++j) out(r, j) *= s;
  }
  return out;
}

Tensor2 clip_l2_backward(const Tensor2 &activations, const Tensor2 &d_clipped, double clip_norm) {
  if (!activations.same_shape(d_clipped)) {
    throw DimensionError("clip_l2_backward: " + activations.shape_str() + " vs " +
                         d_clipped.shape_str());
  }
  Tensor2 out = d_clipped;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const double n = row_norm(activations, r);
    if (n <= clip_norm) continue;
    // d(C x / |x|) = (C / |x|) (I - x x^T / |x|^2)
    double dot = 0.0;
    for (std::size_t j = 0; j < out.cols(); ++j) dot += activations(r, j) * d_clipped(r, j);
    const double s = clip_norm / n;
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(r, j) = s * (d_clipped(r, j) - activations(r, j) * dot / (n * n));
  }
  return out;
}

double gaussian_sigma(double clip_norm, double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) || !(clip_norm > 0.0)) {
    std::ostringstream os;
    os << "gaussian_sigma: invalid budget (C=" << clip_norm << ", epsilon=" << epsilon
       << ", delta=" << delta << ")";
    throw ConfigError(os.str());
  }
  if (std::isinf(epsilon)) return 0.0;
  return clip_norm * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

Tensor2 DpNoise::add_noise(const Tensor2 &x, double sigma) {
  Tensor2 out = x;
  if (sigma == 0.0) return out;
  for (double &v : out.values()) v += sigma * normal_(gen_);
  return out;
}

Tensor2 DpNoise::transform(const Tensor2 &activations, const DpConfig &cfg) {
  if (!cfg.enabled) return activations;
  cfg.validate();
  return add_noise(clip_l2(activations, cfg.clip_norm),
                   gaussian_sigma(cfg.clip_norm, cfg.epsilon, cfg.delta));
}

}  // namespace lstmsplit
