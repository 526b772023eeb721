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
#include <memory>
#include <string>
#include <vector>

#include "moseg/tensor.hpp"

namespace moseg::ad {

class Node;
using Var = std::shared_ptr<Node>;

/// One vertex of a dynamically built reverse-mode graph. The graph is
/// rebuilt every step; leaf nodes holding learned weights persist across
/// steps (see nn::ParamStore) and accumulate into `grad` until cleared.
class Node {
public:
    Tensor value;
    Tensor grad;  // allocated lazily, same shape as value
    bool requires_grad = false;
    std::vector<Var> parents;
    // Accumulates into parents' grads given this->grad. Captures raw `this`;
    // the closure lives inside the node it reads from.
    std::function<void()> backprop;

    explicit Node(Tensor v) : value(std::move(v)) {}

    void ensureGrad() {
        if (grad.numel() != value.numel()) grad = Tensor(value.shape);
    }
    void zeroGrad() {
        ensureGrad();
        std::fill(grad.data.begin(), grad.data.end(), 0.f);
    }
    float scalar() const { return value.data[0]; }
};

Var constant(Tensor t);
Var constantScalar(float v);
Var leaf(Tensor t, bool requires_grad);

/// Reverse-mode sweep from a scalar root. Zeroes interior grads, seeds the
/// root with 1, leaves leaf grads accumulated (parameters keep theirs until
/// the optimizer clears them).
void backward(const Var& root);

// ---- elementwise ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var addScalar(const Var& a, float s);
Var mulScalar(const Var& a, float s);
Var neg(const Var& a);
Var absVal(const Var& a);
Var square(const Var& a);
Var divElem(const Var& a, const Var& b);

// ---- activations ----
Var relu(const Var& a);
Var leakyRelu(const Var& a, float slope = 0.1f);
Var sigmoid(const Var& a);
Var tanhAct(const Var& a);

// ---- reductions / shape ----
Var sumAll(const Var& a);
Var meanAll(const Var& a);
Var softmaxFlat(const Var& a);       // softmax over the whole (flat) tensor
Var pick(const Var& a, int index);   // scalar a[index]
Var pickRow(const Var& a, int row);  // row of a 2-d tensor
Var pickBatch(const Var& a, int n);  // [N,C,H,W] -> [C,H,W]
Var concatChannels(const Var& a, const Var& b);  // CHW or NCHW along C
Var mulChannelBroadcast(const Var& a, const Var& m);  // a: [C,H,W], m: [1,H,W]

/// Leaf copy of `a`'s value; blocks gradient flow.
Var detach(const Var& a);

/// 4-vector from four scalar Vars.
Var pack4(const Var& a, const Var& b, const Var& c, const Var& d);

/// Scalar dot product of two same-shaped tensors.
Var dot(const Var& a, const Var& b);

}  // namespace moseg::ad
