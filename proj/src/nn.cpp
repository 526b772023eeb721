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

#include "moseg/nn.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace moseg::nn {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

struct ConvDims {
    int n, cin, h, w, cout, k, stride, pad, oh, ow;
};

ConvDims convDims(const Tensor& x, const Tensor& wgt, int stride, int pad) {
    ConvDims d;
    if (x.ndim() == 4) {
        d.n = x.shape[0]; d.cin = x.shape[1]; d.h = x.shape[2]; d.w = x.shape[3];
    } else if (x.ndim() == 3) {
        d.n = 1; d.cin = x.shape[0]; d.h = x.shape[1]; d.w = x.shape[2];
    } else {
        throw std::invalid_argument("conv2d: input must be CHW or NCHW");
    }
    d.cout = wgt.shape[0];
    d.k = wgt.shape[2];
    if (wgt.shape[1] != d.cin) throw std::invalid_argument("conv2d: channel mismatch");
    d.stride = stride;
    d.pad = pad;
    d.oh = (d.h + 2 * pad - d.k) / stride + 1;
    d.ow = (d.w + 2 * pad - d.k) / stride + 1;
    return d;
}

// col is [cin*k*k, oh*ow] for one image.
void im2col(const float* img, const ConvDims& d, float* col) {
    for (int c = 0; c < d.cin; ++c)
        for (int ky = 0; ky < d.k; ++ky)
            for (int kx = 0; kx < d.k; ++kx) {
                float* dst = col + ((size_t)(c * d.k + ky) * d.k + kx) * d.oh * d.ow;
                for (int oy = 0; oy < d.oh; ++oy) {
                    int iy = oy * d.stride + ky - d.pad;
                    if (iy < 0 || iy >= d.h) {
                        std::fill_n(dst + (size_t)oy * d.ow, d.ow, 0.f);
                        continue;
                    }
                    const float* src = img + ((size_t)c * d.h + iy) * d.w;
                    for (int ox = 0; ox < d.ow; ++ox) {
                        int ix = ox * d.stride + kx - d.pad;
                        dst[(size_t)oy * d.ow + ox] = (ix < 0 || ix >= d.w) ? 0.f : src[ix];
                    }
                }
            }
}

void col2imAdd(const float* col, const ConvDims& d, float* img) {
    for (int c = 0; c < d.cin; ++c)
        for (int ky = 0; ky < d.k; ++ky)
            for (int kx = 0; kx < d.k; ++kx) {
                const float* src = col + ((size_t)(c * d.k + ky) * d.k + kx) * d.oh * d.ow;
                for (int oy = 0; oy < d.oh; ++oy) {
                    int iy = oy * d.stride + ky - d.pad;
                    if (iy < 0 || iy >= d.h) continue;
                    float* dst = img + ((size_t)c * d.h + iy) * d.w;
                    for (int ox = 0; ox < d.ow; ++ox) {
                        int ix = ox * d.stride + kx - d.pad;
                        if (ix >= 0 && ix < d.w) dst[ix] += src[(size_t)oy * d.ow + ox];
                    }
                }
            }
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad) {
    ConvDims d = convDims(x->value, weight->value, stride, pad);
    std::vector<int> oshape = x->value.ndim() == 4
                                  ? std::vector<int>{d.n, d.cout, d.oh, d.ow}
                                  : std::vector<int>{d.cout, d.oh, d.ow};
    Tensor out(oshape);
    int kk = d.cin * d.k * d.k;
    int ohw = d.oh * d.ow;
    std::vector<float> col((size_t)kk * ohw);
    CMapRM W(weight->value.data.data(), d.cout, kk);
    for (int img = 0; img < d.n; ++img) {
        im2col(x->value.data.data() + (size_t)img * d.cin * d.h * d.w, d, col.data());
        CMapRM C(col.data(), kk, ohw);
        MapRM Y(out.data.data() + (size_t)img * d.cout * ohw, d.cout, ohw);
        Y.noalias() = W * C;
        for (int c = 0; c < d.cout; ++c)
            Y.row(c).array() += bias->value[c];
    }

    auto n = std::make_shared<ad::Node>(std::move(out));
    n->parents = {x, weight, bias};
    n->requires_grad = x->requires_grad || weight->requires_grad || bias->requires_grad;
    if (n->requires_grad) {
        ad::Node* self = n.get();
        n->backprop = [self, x, weight, bias, d, kk, ohw] {
            // im2col is recomputed here; cheaper than holding every col buffer.
            std::vector<float> col((size_t)kk * ohw);
            CMapRM W(weight->value.data.data(), d.cout, kk);
            if (weight->requires_grad) weight->ensureGrad();
            if (bias->requires_grad) bias->ensureGrad();
            if (x->requires_grad) x->ensureGrad();
            for (int img = 0; img < d.n; ++img) {
                CMapRM dY(self->grad.data.data() + (size_t)img * d.cout * ohw, d.cout, ohw);
                if (weight->requires_grad || bias->requires_grad) {
                    im2col(x->value.data.data() + (size_t)img * d.cin * d.h * d.w, d, col.data());
                    CMapRM C(col.data(), kk, ohw);
                    if (weight->requires_grad) {
                        MapRM dW(weight->grad.data.data(), d.cout, kk);
                        dW.noalias() += dY * C.transpose();
                    }
                    if (bias->requires_grad) {
                        // scalar loop: Eigen's redux order depends on buffer
                        // alignment, which would make runs non-reproducible
                        const float* gptr = self->grad.data.data() + (size_t)img * d.cout * ohw;
                        for (int c = 0; c < d.cout; ++c) {
                            float acc = 0.f;
                            for (int i = 0; i < ohw; ++i) acc += gptr[(size_t)c * ohw + i];
                            bias->grad[c] += acc;
                        }
                    }
                }
                if (x->requires_grad) {
                    MapRM dC(col.data(), kk, ohw);
                    dC.noalias() = W.transpose() * dY;
                    col2imAdd(col.data(), d,
                              x->grad.data.data() + (size_t)img * d.cin * d.h * d.w);
                }
            }
        };
    }
    return n;
}

Var upsampleNearest2(const Var& x) {
    const Tensor& xv = x->value;
    int nd = xv.ndim();
    if (nd != 3 && nd != 4) throw std::invalid_argument("upsampleNearest2: need CHW/NCHW");
    int n = nd == 4 ? xv.shape[0] : 1;
    int c = xv.shape[nd - 3], h = xv.shape[nd - 2], w = xv.shape[nd - 1];
    std::vector<int> oshape = nd == 4 ? std::vector<int>{n, c, 2 * h, 2 * w}
                                      : std::vector<int>{c, 2 * h, 2 * w};
    Tensor out(oshape);
    for (int p = 0; p < n * c; ++p) {
        const float* src = xv.data.data() + (size_t)p * h * w;
        float* dst = out.data.data() + (size_t)p * 4 * h * w;
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) {
                float v = src[(size_t)y * w + xx];
                float* o = dst + ((size_t)2 * y) * 2 * w + 2 * xx;
                o[0] = v; o[1] = v; o[2 * w] = v; o[2 * w + 1] = v;
            }
    }
    auto node = std::make_shared<ad::Node>(std::move(out));
    node->parents = {x};
    node->requires_grad = x->requires_grad;
    if (node->requires_grad) {
        ad::Node* self = node.get();
        node->backprop = [self, x, n, c, h, w] {
            x->ensureGrad();
            for (int p = 0; p < n * c; ++p) {
                const float* g = self->grad.data.data() + (size_t)p * 4 * h * w;
                float* gx = x->grad.data.data() + (size_t)p * h * w;
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx) {
                        const float* o = g + ((size_t)2 * y) * 2 * w + 2 * xx;
                        gx[(size_t)y * w + xx] += o[0] + o[1] + o[2 * w] + o[2 * w + 1];
                    }
            }
        };
    }
    return node;
}

Var ParamStore::create(const std::string& name, std::vector<int> shape, Rng& rng, float fanIn) {
    if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
    Tensor t(shape);
    // He-style init for leaky-ReLU stacks.
    float std = std::sqrt(2.f / std::max(1.f, fanIn));
    std::normal_distribution<float> dist(0.f, std);
    for (auto& v : t.data) v = dist(rng);
    Var p = ad::leaf(std::move(t), true);
    index_[name] = params_.size();
    params_.emplace_back(name, p);
    return p;
}

Var ParamStore::createZeros(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
    Var p = ad::leaf(Tensor(std::move(shape)), true);
    index_[name] = params_.size();
    params_.emplace_back(name, p);
    return p;
}

Var ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter " + name);
    return params_[it->second].second;
}

void ParamStore::zeroGrads() {
    for (auto& [name, p] : params_) p->zeroGrad();
}

void ParamStore::setRequiresGrad(bool on) {
    for (auto& [name, p] : params_) {
        p->requires_grad = on;
        p->zeroGrad();
    }
}

bool ParamStore::gradsAllZero() const {
    for (auto& [name, p] : params_)
        for (float g : p->grad.data)
            if (g != 0.f) return false;
    return true;
}

float ParamStore::maxAbsGrad(const std::string& prefix) const {
    float m = 0.f;
    for (auto& [name, p] : params_) {
        if (!prefix.empty() && name.rfind(prefix, 0) != 0) continue;
        m = std::max(m, p->grad.maxAbs());
    }
    return m;
}

void Adam::step(ParamStore& params) {
    ++t_;
    float b1t = 1.f - std::pow(beta1_, (float)t_);
    float b2t = 1.f - std::pow(beta2_, (float)t_);
    for (auto& [name, p] : params.all()) {
        auto& [m, v] = m_.try_emplace(name, std::make_pair(Tensor(p->value.shape),
                                                           Tensor(p->value.shape))).first->second;
        for (int i = 0; i < p->value.numel(); ++i) {
            float g = p->grad[i];
            m[i] = beta1_ * m[i] + (1.f - beta1_) * g;
            v[i] = beta2_ * v[i] + (1.f - beta2_) * g * g;
            p->value[i] -= lr_ * (m[i] / b1t) / (std::sqrt(v[i] / b2t) + eps_);
        }
    }
    params.zeroGrads();
}

void createConvBlock(ParamStore& params, const std::string& prefix, int in_ch, int out_ch,
                     int k, Rng& rng) {
    params.create(prefix + ".w", {out_ch, in_ch, k, k}, rng, (float)(in_ch * k * k));
    params.createZeros(prefix + ".b", {out_ch});
}

Var convBlock(const Var& x, const ParamStore& params, const std::string& prefix, int stride) {
    Var w = params.get(prefix + ".w");
    Var b = params.get(prefix + ".b");
    int k = w->value.shape[2];
    return leakyRelu(conv2d(x, w, b, stride, k / 2));
}

}  // namespace moseg::nn
