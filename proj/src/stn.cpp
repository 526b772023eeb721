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

#include "moseg/stn.hpp"

#include <cmath>

namespace moseg::stn {

Var boxVar(const BoxGeometry& b, bool requires_grad) {
    return ad::leaf(Tensor({4}, {b.cx, b.cy, b.w, b.h}), requires_grad);
}

BoxGeometry boxFromVar(const Var& box) {
    const auto& d = box->value.data;
    return {d[0], d[1], d[2], d[3]};
}

Var crop(const Var& frame, const Var& box, int out_h, int out_w) {
    const Tensor& fv = frame->value;
    if (fv.ndim() != 3) throw std::invalid_argument("crop: frame must be CHW");
    int C = fv.shape[0], H = fv.shape[1], W = fv.shape[2];
    float cx = box->value[0], cy = box->value[1], bw = box->value[2], bh = box->value[3];

    Tensor out({C, out_h, out_w});
    // px(i) = (cx + tx(i) * bw) * (W-1), tx(i) = i/(ow-1) - 0.5; frame pixel
    // centers sit at integer coordinates, so a full box at native size is the
    // identity. Edge-clamped bilinear.
    auto frac = [](int i, int n) { return n > 1 ? (float)i / (n - 1) - 0.5f : 0.f; };
    for (int j = 0; j < out_h; ++j) {
        float py = (cy + frac(j, out_h) * bh) * (H - 1);
        int y0 = (int)std::floor(py);
        float fy = py - y0;
        int y0c = std::clamp(y0, 0, H - 1), y1c = std::clamp(y0 + 1, 0, H - 1);
        for (int i = 0; i < out_w; ++i) {
            float px = (cx + frac(i, out_w) * bw) * (W - 1);
            int x0 = (int)std::floor(px);
            float fx = px - x0;
            int x0c = std::clamp(x0, 0, W - 1), x1c = std::clamp(x0 + 1, 0, W - 1);
            for (int c = 0; c < C; ++c) {
                float v00 = fv.at(c, y0c, x0c), v01 = fv.at(c, y0c, x1c);
                float v10 = fv.at(c, y1c, x0c), v11 = fv.at(c, y1c, x1c);
                out.at(c, j, i) = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                  fy * ((1 - fx) * v10 + fx * v11);
            }
        }
    }
    auto n = std::make_shared<ad::Node>(std::move(out));
    n->parents = {frame, box};
    n->requires_grad = frame->requires_grad || box->requires_grad;
    if (n->requires_grad) {
        ad::Node* self = n.get();
        n->backprop = [self, frame, box, C, H, W, out_h, out_w] {
            const Tensor& fv = frame->value;
            float cx = box->value[0], cy = box->value[1], bw = box->value[2], bh = box->value[3];
            if (frame->requires_grad) frame->ensureGrad();
            if (box->requires_grad) box->ensureGrad();
            float gcx = 0, gcy = 0, gw = 0, gh = 0;
            auto frac = [](int i, int n) { return n > 1 ? (float)i / (n - 1) - 0.5f : 0.f; };
            for (int j = 0; j < out_h; ++j) {
                float ty = frac(j, out_h);
                float py = (cy + ty * bh) * (H - 1);
                int y0 = (int)std::floor(py);
                float fy = py - y0;
                int y0c = std::clamp(y0, 0, H - 1), y1c = std::clamp(y0 + 1, 0, H - 1);
                for (int i = 0; i < out_w; ++i) {
                    float tx = frac(i, out_w);
                    float px = (cx + tx * bw) * (W - 1);
                    int x0 = (int)std::floor(px);
                    float fx = px - x0;
                    int x0c = std::clamp(x0, 0, W - 1), x1c = std::clamp(x0 + 1, 0, W - 1);
                    for (int c = 0; c < C; ++c) {
                        float g = self->grad.at(c, j, i);
                        if (g == 0.f) continue;
                        float v00 = fv.at(c, y0c, x0c), v01 = fv.at(c, y0c, x1c);
                        float v10 = fv.at(c, y1c, x0c), v11 = fv.at(c, y1c, x1c);
                        if (frame->requires_grad) {
                            frame->grad.at(c, y0c, x0c) += g * (1 - fy) * (1 - fx);
                            frame->grad.at(c, y0c, x1c) += g * (1 - fy) * fx;
                            frame->grad.at(c, y1c, x0c) += g * fy * (1 - fx);
                            frame->grad.at(c, y1c, x1c) += g * fy * fx;
                        }
                        if (box->requires_grad) {
                            float dpx = (1 - fy) * (v01 - v00) + fy * (v11 - v10);
                            float dpy = (1 - fx) * (v10 - v00) + fx * (v11 - v01);
                            gcx += g * dpx * (W - 1);
                            gw += g * dpx * tx * (W - 1);
                            gcy += g * dpy * (H - 1);
                            gh += g * dpy * ty * (H - 1);
                        }
                    }
                }
            }
            if (box->requires_grad) {
                box->grad[0] += gcx;
                box->grad[1] += gcy;
                box->grad[2] += gw;
                box->grad[3] += gh;
            }
        };
    }
    return n;
}

Var paste(const Var& patch, const Var& box, int canvas_h, int canvas_w) {
    const Tensor& pv = patch->value;
    if (pv.ndim() != 3) throw std::invalid_argument("paste: patch must be CHW");
    int C = pv.shape[0], ph = pv.shape[1], pw = pv.shape[2];
    float cx = box->value[0], cy = box->value[1], bw = box->value[2], bh = box->value[3];

    Tensor out({C, canvas_h, canvas_w});
    // Inverse of the crop mapping: u(x) = ((x/(W-1) - cx)/bw + 0.5) * (pw-1),
    // zero outside the patch so paste support never leaks past the box.
    for (int y = 0; y < canvas_h; ++y) {
        float yn = canvas_h > 1 ? (float)y / (canvas_h - 1) : 0.5f;
        float pyf = bh != 0.f ? ((yn - cy) / bh + 0.5f) * (ph - 1) : -2.f;
        if (pyf <= -1.f || pyf >= (float)ph) continue;
        int y0 = (int)std::floor(pyf);
        float fy = pyf - y0;
        for (int x = 0; x < canvas_w; ++x) {
            float xn = canvas_w > 1 ? (float)x / (canvas_w - 1) : 0.5f;
            float pxf = bw != 0.f ? ((xn - cx) / bw + 0.5f) * (pw - 1) : -2.f;
            if (pxf <= -1.f || pxf >= (float)pw) continue;
            int x0 = (int)std::floor(pxf);
            float fx = pxf - x0;
            for (int c = 0; c < C; ++c) {
                float v = 0.f;
                if (y0 >= 0 && x0 >= 0) v += (1 - fy) * (1 - fx) * pv.at(c, y0, x0);
                if (y0 >= 0 && x0 + 1 < pw) v += (1 - fy) * fx * pv.at(c, y0, x0 + 1);
                if (y0 + 1 < ph && x0 >= 0) v += fy * (1 - fx) * pv.at(c, y0 + 1, x0);
                if (y0 + 1 < ph && x0 + 1 < pw) v += fy * fx * pv.at(c, y0 + 1, x0 + 1);
                out.at(c, y, x) = v;
            }
        }
    }
    auto n = std::make_shared<ad::Node>(std::move(out));
    n->parents = {patch, box};
    n->requires_grad = patch->requires_grad || box->requires_grad;
    if (n->requires_grad) {
        ad::Node* self = n.get();
        n->backprop = [self, patch, box, C, ph, pw, canvas_h, canvas_w] {
            const Tensor& pv = patch->value;
            float cx = box->value[0], cy = box->value[1], bw = box->value[2], bh = box->value[3];
            if (patch->requires_grad) patch->ensureGrad();
            if (box->requires_grad) box->ensureGrad();
            float gcx = 0, gcy = 0, gw = 0, gh = 0;
            for (int y = 0; y < canvas_h; ++y) {
                float yn = canvas_h > 1 ? (float)y / (canvas_h - 1) : 0.5f;
                if (bh == 0.f) break;
                float pyf = ((yn - cy) / bh + 0.5f) * (ph - 1);
                if (pyf <= -1.f || pyf >= (float)ph) continue;
                int y0 = (int)std::floor(pyf);
                float fy = pyf - y0;
                float dpy_dcy = -(ph - 1) / bh;
                float dpy_dbh = -(yn - cy) / (bh * bh) * (ph - 1);
                for (int x = 0; x < canvas_w; ++x) {
                    float xn = canvas_w > 1 ? (float)x / (canvas_w - 1) : 0.5f;
                    if (bw == 0.f) break;
                    float pxf = ((xn - cx) / bw + 0.5f) * (pw - 1);
                    if (pxf <= -1.f || pxf >= (float)pw) continue;
                    int x0 = (int)std::floor(pxf);
                    float fx = pxf - x0;
                    float dpx_dcx = -(pw - 1) / bw;
                    float dpx_dbw = -(xn - cx) / (bw * bw) * (pw - 1);
                    for (int c = 0; c < C; ++c) {
                        float g = self->grad.at(c, y, x);
                        if (g == 0.f) continue;
                        float v00 = (y0 >= 0 && x0 >= 0) ? pv.at(c, y0, x0) : 0.f;
                        float v01 = (y0 >= 0 && x0 + 1 < pw) ? pv.at(c, y0, x0 + 1) : 0.f;
                        float v10 = (y0 + 1 < ph && x0 >= 0) ? pv.at(c, y0 + 1, x0) : 0.f;
                        float v11 = (y0 + 1 < ph && x0 + 1 < pw) ? pv.at(c, y0 + 1, x0 + 1) : 0.f;
                        if (patch->requires_grad) {
                            if (y0 >= 0 && x0 >= 0) patch->grad.at(c, y0, x0) += g * (1 - fy) * (1 - fx);
                            if (y0 >= 0 && x0 + 1 < pw) patch->grad.at(c, y0, x0 + 1) += g * (1 - fy) * fx;
                            if (y0 + 1 < ph && x0 >= 0) patch->grad.at(c, y0 + 1, x0) += g * fy * (1 - fx);
                            if (y0 + 1 < ph && x0 + 1 < pw) patch->grad.at(c, y0 + 1, x0 + 1) += g * fy * fx;
                        }
                        if (box->requires_grad) {
                            float dpx = (1 - fy) * (v01 - v00) + fy * (v11 - v10);
                            float dpy = (1 - fx) * (v10 - v00) + fx * (v11 - v01);
                            gcx += g * dpx * dpx_dcx;
                            gw += g * dpx * dpx_dbw;
                            gcy += g * dpy * dpy_dcy;
                            gh += g * dpy * dpy_dbh;
                        }
                    }
                }
            }
            if (box->requires_grad) {
                box->grad[0] += gcx;
                box->grad[1] += gcy;
                box->grad[2] += gw;
                box->grad[3] += gh;
            }
        };
    }
    return n;
}

Var composite(const Var& recon, const Var& mask, const Var& background, const Var& box) {
    for (float v : mask->value.data)
        if (v < -1e-6f || v > 1.f + 1e-6f)
            throw std::invalid_argument("composite: mask values must lie in [0,1]");
    int H = background->value.shape[1], W = background->value.shape[2];
    Var pr = paste(recon, box, H, W);
    Var pm = paste(mask, box, H, W);
    // F = B + pm * (paste(recon) - B); equals Eq-style blend, 0-support outside box.
    return ad::add(background, ad::mulChannelBroadcast(ad::sub(pr, background), pm));
}

Tensor cropValue(const Tensor& frame, const BoxGeometry& box, int out_h, int out_w) {
    Var f = ad::constant(frame);
    return crop(f, boxVar(box), out_h, out_w)->value;
}

Tensor pasteValue(const Tensor& patch, const BoxGeometry& box, int canvas_h, int canvas_w) {
    Var p = ad::constant(patch);
    return paste(p, boxVar(box), canvas_h, canvas_w)->value;
}

}  // namespace moseg::stn
