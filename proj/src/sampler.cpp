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

#include "moseg/sampler.hpp"

#include <cmath>
#include <numeric>

namespace moseg::sampler {

SmoothedDistribution smooth(const std::vector<float>& p, float epsilon) {
    int C = (int)p.size();
    if (C == 0) throw std::invalid_argument("smooth: empty distribution");
    if (epsilon < 0.f || epsilon >= 1.f / C)
        throw std::invalid_argument("smooth: epsilon must satisfy 0 <= eps < 1/C");
    double s = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::fabs(s - 1.0) > 1e-4)
        throw std::invalid_argument("smooth: p must lie on the simplex");
    SmoothedDistribution d;
    d.p = p;
    d.epsilon = epsilon;
    d.q.resize(C);
    for (int c = 0; c < C; ++c) d.q[c] = p[c] * (1.f - C * epsilon) + epsilon;
    return d;
}

int draw(const SmoothedDistribution& dist, nn::Rng& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double u = uni(rng);
    double acc = 0.0;
    int C = (int)dist.q.size();
    for (int c = 0; c < C; ++c) {
        acc += dist.q[c];
        if (u < acc) return c;
    }
    return C - 1;
}

double exhaustiveExpectation(const std::vector<float>& p,
                             const std::function<double(int)>& loss_fn) {
    double s = 0.0;
    for (size_t c = 0; c < p.size(); ++c) s += (double)p[c] * loss_fn((int)c);
    return s;
}

Var exhaustiveExpectationVar(const Var& p, const std::vector<Var>& losses) {
    if ((size_t)p->value.numel() != losses.size())
        throw std::invalid_argument("exhaustiveExpectationVar: size mismatch");
    Var total = ad::constantScalar(0.f);
    for (size_t c = 0; c < losses.size(); ++c)
        total = ad::add(total, ad::mul(ad::pick(p, (int)c), losses[c]));
    return total;
}

Var importanceWeight(const Var& p, const SmoothedDistribution& dist, int c) {
    // q enters as a plain constant; gradient reaches only p[c].
    return ad::mulScalar(ad::pick(p, c), 1.f / dist.q[c]);
}

Var importanceEstimate(const Var& p, float epsilon,
                       const std::function<double(int)>& loss_fn, nn::Rng& rng,
                       int num_samples) {
    if (num_samples <= 0) throw std::invalid_argument("importanceEstimate: need J >= 1");
    SmoothedDistribution dist = smooth(p->value.data, epsilon);
    Var total = ad::constantScalar(0.f);
    for (int j = 0; j < num_samples; ++j) {
        int c = draw(dist, rng);
        Var term = ad::mulScalar(importanceWeight(p, dist, c), (float)loss_fn(c));
        total = ad::add(total, term);
    }
    return ad::mulScalar(total, 1.f / (float)num_samples);
}

Var gumbelSoftmaxSample(const Var& logits, float temperature, nn::Rng& rng) {
    if (temperature <= 0.f) throw std::invalid_argument("gumbelSoftmax: temperature must be > 0");
    int C = logits->value.numel();
    std::uniform_real_distribution<double> uni(1e-12, 1.0);
    Tensor noise({C});
    for (int c = 0; c < C; ++c) noise[c] = (float)(-std::log(-std::log(uni(rng))));
    Var shifted = ad::add(logits, ad::constant(std::move(noise)));
    return ad::softmaxFlat(ad::mulScalar(shifted, 1.f / temperature));
}

}  // namespace moseg::sampler
