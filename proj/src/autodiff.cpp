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

#include "moseg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace moseg::ad {

Var constant(Tensor t) { return std::make_shared<Node>(std::move(t)); }
Var constantScalar(float v) { return constant(Tensor::scalar(v)); }

Var leaf(Tensor t, bool requires_grad) {
    auto n = std::make_shared<Node>(std::move(t));
    n->requires_grad = requires_grad;
    if (requires_grad) n->zeroGrad();
    return n;
}

namespace {

Var makeOp(Tensor value, std::vector<Var> parents) {
    auto n = std::make_shared<Node>(std::move(value));
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
        if (p->requires_grad) n->requires_grad = true;
    return n;
}

void requireSameShape(const Var& a, const Var& b, const char* op) {
    if (!a->value.sameShape(b->value))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    a->value.shapeStr() + " vs " + b->value.shapeStr());
}

}  // namespace

void backward(const Var& root) {
    if (root->value.numel() != 1)
        throw std::invalid_argument("backward: root must be scalar");
    // Topological order by DFS (iterative; graphs can be deep).
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack{{root.get(), 0}};
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [n, idx] = stack.back();
        if (idx < n->parents.size()) {
            Node* p = n->parents[idx++].get();
            if (p->requires_grad && !seen.count(p)) {
                seen.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }
    // Interior node grads start at zero; leaves (parameters) keep accumulating.
    for (Node* n : order)
        if (n->backprop) n->zeroGrad();
        else n->ensureGrad();
    root->grad.data[0] = 1.f;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop();
}

Var add(const Var& a, const Var& b) {
    requireSameShape(a, b, "add");
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = a->value[i] + b->value[i];
    auto n = makeOp(std::move(out), {a, b});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, b] {
            if (a->requires_grad) {
                a->ensureGrad();
                for (int i = 0; i < self->grad.numel(); ++i) a->grad[i] += self->grad[i];
            }
            if (b->requires_grad) {
                b->ensureGrad();
                for (int i = 0; i < self->grad.numel(); ++i) b->grad[i] += self->grad[i];
            }
        };
    }
    return n;
}

Var sub(const Var& a, const Var& b) {
    requireSameShape(a, b, "sub");
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = a->value[i] - b->value[i];
    auto n = makeOp(std::move(out), {a, b});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, b] {
            if (a->requires_grad) {
                a->ensureGrad();
                for (int i = 0; i < self->grad.numel(); ++i) a->grad[i] += self->grad[i];
            }
            if (b->requires_grad) {
                b->ensureGrad();
                for (int i = 0; i < self->grad.numel(); ++i) b->grad[i] -= self->grad[i];
            }
        };
    }
    return n;
}

Var mul(const Var& a, const Var& b) {
    // Allow scalar * tensor in either order.
    if (a->value.numel() == 1 && b->value.numel() != 1) return mul(b, a);
    if (b->value.numel() == 1 && a->value.numel() != 1) {
        Tensor out(a->value.shape);
        float s = b->value[0];
        for (int i = 0; i < out.numel(); ++i) out[i] = a->value[i] * s;
        auto n = makeOp(std::move(out), {a, b});
        if (n->requires_grad) {
            Node* self = n.get();
            n->backprop = [self, a, b] {
                if (a->requires_grad) {
                    a->ensureGrad();
                    float s = b->value[0];
                    for (int i = 0; i < self->grad.numel(); ++i) a->grad[i] += self->grad[i] * s;
                }
                if (b->requires_grad) {
                    b->ensureGrad();
                    double g = 0;
                    for (int i = 0; i < self->grad.numel(); ++i) g += (double)self->grad[i] * a->value[i];
                    b->grad[0] += (float)g;
                }
            };
        }
        return n;
    }
    requireSameShape(a, b, "mul");
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = a->value[i] * b->value[i];
    auto n = makeOp(std::move(out), {a, b});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, b] {
            if (a->requires_grad) {
                a->ensureGrad();
                for (int i = 0; i < self->grad.numel(); ++i) a->grad[i] += self->grad[i] * b->value[i];
            }
            if (b->requires_grad) {
                b->ensureGrad();
                for (int i = 0; i < self->grad.numel(); ++i) b->grad[i] += self->grad[i] * a->value[i];
            }
        };
    }
    return n;
}

Var divElem(const Var& a, const Var& b) {
    requireSameShape(a, b, "div");
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = a->value[i] / b->value[i];
    auto n = makeOp(std::move(out), {a, b});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, b] {
            if (a->requires_grad) {
                a->ensureGrad();
                for (int i = 0; i < self->grad.numel(); ++i) a->grad[i] += self->grad[i] / b->value[i];
            }
            if (b->requires_grad) {
                b->ensureGrad();
                for (int i = 0; i < self->grad.numel(); ++i)
                    b->grad[i] -= self->grad[i] * a->value[i] / (b->value[i] * b->value[i]);
            }
        };
    }
    return n;
}

Var addScalar(const Var& a, float s) {
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = a->value[i] + s;
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a] {
            a->ensureGrad();
            for (int i = 0; i < self->grad.numel(); ++i) a->grad[i] += self->grad[i];
        };
    }
    return n;
}

Var mulScalar(const Var& a, float s) {
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = a->value[i] * s;
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, s] {
            a->ensureGrad();
            for (int i = 0; i < self->grad.numel(); ++i) a->grad[i] += self->grad[i] * s;
        };
    }
    return n;
}

Var neg(const Var& a) { return mulScalar(a, -1.f); }

Var absVal(const Var& a) {
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = std::fabs(a->value[i]);
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a] {
            a->ensureGrad();
            for (int i = 0; i < self->grad.numel(); ++i)
                a->grad[i] += self->grad[i] * (a->value[i] >= 0.f ? 1.f : -1.f);
        };
    }
    return n;
}

Var square(const Var& a) { return mul(a, a); }

Var relu(const Var& a) {
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = std::max(0.f, a->value[i]);
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a] {
            a->ensureGrad();
            for (int i = 0; i < self->grad.numel(); ++i)
                if (a->value[i] > 0.f) a->grad[i] += self->grad[i];
        };
    }
    return n;
}

Var leakyRelu(const Var& a, float slope) {
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i)
        out[i] = a->value[i] > 0.f ? a->value[i] : slope * a->value[i];
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, slope] {
            a->ensureGrad();
            for (int i = 0; i < self->grad.numel(); ++i)
                a->grad[i] += self->grad[i] * (a->value[i] > 0.f ? 1.f : slope);
        };
    }
    return n;
}

Var sigmoid(const Var& a) {
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = 1.f / (1.f + std::exp(-a->value[i]));
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a] {
            a->ensureGrad();
            for (int i = 0; i < self->grad.numel(); ++i) {
                float y = self->value[i];
                a->grad[i] += self->grad[i] * y * (1.f - y);
            }
        };
    }
    return n;
}

Var tanhAct(const Var& a) {
    Tensor out(a->value.shape);
    for (int i = 0; i < out.numel(); ++i) out[i] = std::tanh(a->value[i]);
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a] {
            a->ensureGrad();
            for (int i = 0; i < self->grad.numel(); ++i) {
                float y = self->value[i];
                a->grad[i] += self->grad[i] * (1.f - y * y);
            }
        };
    }
    return n;
}

Var sumAll(const Var& a) {
    auto n = makeOp(Tensor::scalar(a->value.sum()), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a] {
            a->ensureGrad();
            float g = self->grad[0];
            for (int i = 0; i < a->grad.numel(); ++i) a->grad[i] += g;
        };
    }
    return n;
}

Var meanAll(const Var& a) { return mulScalar(sumAll(a), 1.f / (float)a->value.numel()); }

Var softmaxFlat(const Var& a) {
    Tensor out(a->value.shape);
    float mx = *std::max_element(a->value.data.begin(), a->value.data.end());
    double z = 0.0;
    for (int i = 0; i < out.numel(); ++i) {
        out[i] = std::exp(a->value[i] - mx);
        z += out[i];
    }
    for (int i = 0; i < out.numel(); ++i) out[i] = (float)(out[i] / z);
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a] {
            a->ensureGrad();
            double gy = 0.0;
            for (int i = 0; i < self->grad.numel(); ++i)
                gy += (double)self->grad[i] * self->value[i];
            for (int i = 0; i < self->grad.numel(); ++i)
                a->grad[i] += self->value[i] * (self->grad[i] - (float)gy);
        };
    }
    return n;
}

Var pick(const Var& a, int index) {
    if (index < 0 || index >= a->value.numel())
        throw std::out_of_range("pick: index out of range");
    auto n = makeOp(Tensor::scalar(a->value[index]), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, index] {
            a->ensureGrad();
            a->grad[index] += self->grad[0];
        };
    }
    return n;
}

Var pickRow(const Var& a, int row) {
    if (a->value.ndim() != 2) throw std::invalid_argument("pickRow: need 2-d tensor");
    int cols = a->value.shape[1];
    if (row < 0 || row >= a->value.shape[0]) throw std::out_of_range("pickRow: row out of range");
    Tensor out({cols});
    std::copy_n(a->value.data.begin() + (size_t)row * cols, cols, out.data.begin());
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, row, cols] {
            a->ensureGrad();
            for (int j = 0; j < cols; ++j) a->grad[(size_t)row * cols + j] += self->grad[j];
        };
    }
    return n;
}

Var pickBatch(const Var& a, int nidx) {
    if (a->value.ndim() != 4) throw std::invalid_argument("pickBatch: need 4-d tensor");
    if (nidx < 0 || nidx >= a->value.shape[0]) throw std::out_of_range("pickBatch: bad index");
    int chw = a->value.shape[1] * a->value.shape[2] * a->value.shape[3];
    Tensor out({a->value.shape[1], a->value.shape[2], a->value.shape[3]});
    std::copy_n(a->value.data.begin() + (size_t)nidx * chw, chw, out.data.begin());
    auto n = makeOp(std::move(out), {a});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, nidx, chw] {
            a->ensureGrad();
            for (int i = 0; i < chw; ++i) a->grad[(size_t)nidx * chw + i] += self->grad[i];
        };
    }
    return n;
}

Var concatChannels(const Var& a, const Var& b) {
    const auto& sa = a->value.shape;
    const auto& sb = b->value.shape;
    if (sa.size() != sb.size() || (sa.size() != 3 && sa.size() != 4))
        throw std::invalid_argument("concatChannels: need matching 3-d or 4-d tensors");
    int caxis = sa.size() == 4 ? 1 : 0;
    for (size_t i = 0; i < sa.size(); ++i)
        if ((int)i != caxis && sa[i] != sb[i])
            throw std::invalid_argument("concatChannels: spatial shape mismatch");
    std::vector<int> so = sa;
    so[caxis] = sa[caxis] + sb[caxis];
    Tensor out(so);
    int batch = sa.size() == 4 ? sa[0] : 1;
    int hw = sa[sa.size() - 2] * sa[sa.size() - 1];
    int ca = sa[caxis], cb = sb[caxis];
    for (int nidx = 0; nidx < batch; ++nidx) {
        std::copy_n(a->value.data.begin() + (size_t)nidx * ca * hw, (size_t)ca * hw,
                    out.data.begin() + (size_t)nidx * (ca + cb) * hw);
        std::copy_n(b->value.data.begin() + (size_t)nidx * cb * hw, (size_t)cb * hw,
                    out.data.begin() + (size_t)nidx * (ca + cb) * hw + (size_t)ca * hw);
    }
    auto n = makeOp(std::move(out), {a, b});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, b, batch, hw, ca, cb] {
            for (int nidx = 0; nidx < batch; ++nidx) {
                const float* g = self->grad.data.data() + (size_t)nidx * (ca + cb) * hw;
                if (a->requires_grad) {
                    a->ensureGrad();
                    float* ga = a->grad.data.data() + (size_t)nidx * ca * hw;
                    for (int i = 0; i < ca * hw; ++i) ga[i] += g[i];
                }
                if (b->requires_grad) {
                    b->ensureGrad();
                    float* gb = b->grad.data.data() + (size_t)nidx * cb * hw;
                    for (int i = 0; i < cb * hw; ++i) gb[i] += g[ca * hw + i];
                }
            }
        };
    }
    return n;
}

Var mulChannelBroadcast(const Var& a, const Var& m) {
    const auto& sa = a->value.shape;
    const auto& sm = m->value.shape;
    if (sa.size() != 3 || sm.size() != 3 || sm[0] != 1 || sm[1] != sa[1] || sm[2] != sa[2])
        throw std::invalid_argument("mulChannelBroadcast: need [C,H,W] and [1,H,W]");
    int c = sa[0], hw = sa[1] * sa[2];
    Tensor out(sa);
    for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < hw; ++i)
            out[(size_t)ch * hw + i] = a->value[(size_t)ch * hw + i] * m->value[i];
    auto n = makeOp(std::move(out), {a, m});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, m, c, hw] {
            if (a->requires_grad) {
                a->ensureGrad();
                for (int ch = 0; ch < c; ++ch)
                    for (int i = 0; i < hw; ++i)
                        a->grad[(size_t)ch * hw + i] += self->grad[(size_t)ch * hw + i] * m->value[i];
            }
            if (m->requires_grad) {
                m->ensureGrad();
                for (int ch = 0; ch < c; ++ch)
                    for (int i = 0; i < hw; ++i)
                        m->grad[i] += self->grad[(size_t)ch * hw + i] * a->value[(size_t)ch * hw + i];
            }
        };
    }
    return n;
}

Var detach(const Var& a) { return constant(a->value); }

Var pack4(const Var& a, const Var& b, const Var& c, const Var& d) {
    std::array<Var, 4> ps{a, b, c, d};
    for (const auto& p : ps)
        if (p->value.numel() != 1) throw std::invalid_argument("pack4: need scalars");
    Tensor out({4}, {a->value[0], b->value[0], c->value[0], d->value[0]});
    auto n = makeOp(std::move(out), {a, b, c, d});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, ps] {
            for (int k = 0; k < 4; ++k)
                if (ps[k]->requires_grad) {
                    ps[k]->ensureGrad();
                    ps[k]->grad[0] += self->grad[k];
                }
        };
    }
    return n;
}

Var dot(const Var& a, const Var& b) {
    requireSameShape(a, b, "dot");
    double s = 0.0;
    for (int i = 0; i < a->value.numel(); ++i) s += (double)a->value[i] * b->value[i];
    auto n = makeOp(Tensor::scalar((float)s), {a, b});
    if (n->requires_grad) {
        Node* self = n.get();
        n->backprop = [self, a, b] {
            float g = self->grad[0];
            if (a->requires_grad) {
                a->ensureGrad();
                for (int i = 0; i < a->grad.numel(); ++i) a->grad[i] += g * b->value[i];
            }
            if (b->requires_grad) {
                b->ensureGrad();
                for (int i = 0; i < b->grad.numel(); ++i) b->grad[i] += g * a->value[i];
            }
        };
    }
    return n;
}

}  // namespace moseg::ad
