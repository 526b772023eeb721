// Copyright 2026 the moseg authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>

#include "moseg/nn.hpp"

namespace moseg::sampler {

using ad::Var;

/// q(c) = p(c)(1 - C*eps) + eps. q is always treated as a constant when
/// gradients are taken; only p carries gradient in importance weights.
struct SmoothedDistribution {
    std::vector<float> p;
    std::vector<float> q;
    float epsilon = 0.f;
};

/// Requires p on the simplex and 0 <= eps < 1/C.
SmoothedDistribution smooth(const std::vector<float>& p, float epsilon);

/// One categorical draw from q.
int draw(const SmoothedDistribution& dist, nn::Rng& rng);

/// sum_c p(c) * loss_fn(c).
double exhaustiveExpectation(const std::vector<float>& p,
                             const std::function<double(int)>& loss_fn);
/// Same, with gradient flowing to p and through each loss Var.
Var exhaustiveExpectationVar(const Var& p, const std::vector<Var>& losses);

/// (1/J) * sum_j (p(c_j)/q(c_j)) * loss_fn(c_j), c_j ~ q. Gradient reaches p
/// through the weight quotient only (score-function estimator).
Var importanceEstimate(const Var& p, float epsilon,
                       const std::function<double(int)>& loss_fn, nn::Rng& rng,
                       int num_samples);

/// Importance weight p[c]/q[c] as a Var (gradient to p; q constant).
Var importanceWeight(const Var& p, const SmoothedDistribution& dist, int c);

/// softmax((logits + Gumbel noise) / tau); differentiable in logits.
Var gumbelSoftmaxSample(const Var& logits, float temperature, nn::Rng& rng);

}  // namespace moseg::sampler
