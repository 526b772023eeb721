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

#include <map>
#include <random>
#include <string>

#include "moseg/autodiff.hpp"

namespace moseg::nn {

using ad::Var;
using Rng = std::mt19937_64;

/// conv over NCHW (or CHW, treated as N=1). weight [Cout,Cin,k,k], bias [Cout].
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad);

/// 2x nearest-neighbor upsampling, NCHW/CHW.
Var upsampleNearest2(const Var& x);

/// Ordered name -> parameter map. Ordering is the registration order so that
/// optimizer sweeps and checkpoints are reproducible.
class ParamStore {
public:
    Var create(const std::string& name, std::vector<int> shape, Rng& rng, float fanIn);
    Var createZeros(const std::string& name, std::vector<int> shape);
    Var get(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) > 0; }
    const std::vector<std::pair<std::string, Var>>& all() const { return params_; }
    void zeroGrads();
    void setRequiresGrad(bool on);
    /// True iff every parameter gradient buffer is exactly zero.
    bool gradsAllZero() const;
    /// Max |grad| over parameters whose name starts with `prefix`.
    float maxAbsGrad(const std::string& prefix = "") const;

private:
    std::vector<std::pair<std::string, Var>> params_;
    std::map<std::string, size_t> index_;
};

/// Adam with per-parameter moment buffers keyed by name.
class Adam {
public:
    explicit Adam(float lr, float beta1 = 0.9f, float beta2 = 0.999f, float eps = 1e-8f)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ParamStore& params);
    void setLr(float lr) { lr_ = lr; }
    float lr() const { return lr_; }
    int stepCount() const { return t_; }

    // Checkpoint access.
    std::map<std::string, std::pair<Tensor, Tensor>>& moments() { return m_; }
    void setStepCount(int t) { t_ = t; }

private:
    float lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    std::map<std::string, std::pair<Tensor, Tensor>> m_;  // name -> (m, v)
};

/// Stack of stride-2 (optionally stride-1) 3x3 conv + leaky-ReLU blocks with
/// a shared parameter prefix; the building block for every net here.
struct ConvSpec {
    int in_ch, out_ch, stride;
};

Var convBlock(const Var& x, const ParamStore& params, const std::string& prefix, int stride);
void createConvBlock(ParamStore& params, const std::string& prefix, int in_ch, int out_ch,
                     int k, Rng& rng);

}  // namespace moseg::nn
