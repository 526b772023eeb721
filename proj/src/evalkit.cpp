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

#include "moseg/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace moseg::eval {

namespace {

void requireSameShape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.sameShape(b)) throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

/// 4-connected contour: a mask pixel with a background (or out-of-image)
/// 4-neighbor.
std::vector<std::pair<int, int>> boundaryPixels(const Tensor& mask) {
    int h = mask.shape[0], w = mask.shape[1];
    auto at = [&](int y, int x) { return mask.data[(size_t)y * w + x] > 0.5f; };
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!at(y, x)) continue;
            bool edge = y == 0 || y == h - 1 || x == 0 || x == w - 1 || !at(y - 1, x) ||
                        !at(y + 1, x) || !at(y, x - 1) || !at(y, x + 1);
            if (edge) out.emplace_back(y, x);
        }
    return out;
}

double matchedFraction(const std::vector<std::pair<int, int>>& a,
                       const std::vector<std::pair<int, int>>& b, double radius) {
    if (a.empty()) return 0.0;
    double r2 = radius * radius;
    int matched = 0;
    for (const auto& [ay, ax] : a)
        for (const auto& [by, bx] : b) {
            double dy = ay - by, dx = ax - bx;
            if (dy * dy + dx * dx <= r2) {
                ++matched;
                break;
            }
        }
    return (double)matched / a.size();
}

}  // namespace

double jMeasure(const Tensor& pred_mask, const Tensor& gt_mask) {
    requireSameShape(pred_mask, gt_mask, "jMeasure");
    long inter = 0, uni = 0;
    for (size_t i = 0; i < pred_mask.data.size(); ++i) {
        bool p = pred_mask.data[i] > 0.5f, g = gt_mask.data[i] > 0.5f;
        inter += p && g;
        uni += p || g;
    }
    if (uni == 0) return 1.0;  // both empty
    return (double)inter / uni;
}

double fMeasure(const Tensor& pred_mask, const Tensor& gt_mask, double band_radius) {
    requireSameShape(pred_mask, gt_mask, "fMeasure");
    auto bp = boundaryPixels(pred_mask);
    auto bg = boundaryPixels(gt_mask);
    if (bp.empty() && bg.empty()) return 1.0;
    if (bp.empty() || bg.empty()) return 0.0;
    double precision = matchedFraction(bp, bg, band_radius);
    double recall = matchedFraction(bg, bp, band_radius);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double defaultBandRadius(int h, int w) {
    return std::ceil(0.0075 * std::sqrt((double)h * h + (double)w * w));
}

std::pair<double, double> thresholdSearch(const std::vector<Tensor>& soft_masks,
                                          const std::vector<Tensor>& gt_masks) {
    if (soft_masks.empty() || soft_masks.size() != gt_masks.size())
        throw std::invalid_argument("thresholdSearch: need matched nonempty lists");
    double bestT = 0.0, bestJ = -1.0;
    // t = 0 binarizes everything to foreground; the grid starts at 0.05
    for (int k = 1; k <= 20; ++k) {
        double t = 0.05 * k;
        double meanJ = 0.0;
        for (size_t i = 0; i < soft_masks.size(); ++i) {
            Tensor bin(soft_masks[i].shape);
            for (size_t px = 0; px < bin.data.size(); ++px)
                bin.data[px] = soft_masks[i].data[px] >= t ? 1.f : 0.f;
            meanJ += jMeasure(bin, gt_masks[i]);
        }
        meanJ /= soft_masks.size();
        if (meanJ > bestJ) {  // strict: ties keep the lower threshold
            bestJ = meanJ;
            bestT = t;
        }
    }
    return {bestT, bestJ};
}

double map50(const std::vector<Detection>& preds, const std::vector<BoxGeometry>& gt_boxes) {
    if (gt_boxes.empty()) return 0.0;
    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return preds[a].confidence > preds[b].confidence; });
    std::vector<bool> gtUsed(gt_boxes.size(), false);
    int ngt = (int)gt_boxes.size();
    std::vector<double> recalls, precisions;
    int tp = 0, fp = 0;
    for (int i : order) {
        const Detection& d = preds[i];
        bool hit = d.frame >= 0 && d.frame < ngt && !gtUsed[d.frame] &&
                   BoxGeometry::iou(d.box, gt_boxes[d.frame]) >= 0.5f;
        if (hit) {
            gtUsed[d.frame] = true;
            ++tp;
        } else {
            ++fp;
        }
        recalls.push_back((double)tp / ngt);
        precisions.push_back((double)tp / (tp + fp));
    }
    // all-point interpolation: precision envelope from the right
    double ap = 0.0, prevR = 0.0;
    for (size_t i = 0; i < recalls.size(); ++i) {
        double pInterp = 0.0;
        for (size_t j = i; j < precisions.size(); ++j) pInterp = std::max(pInterp, precisions[j]);
        ap += (recalls[i] - prevR) * pInterp;
        prevR = recalls[i];
    }
    return ap;
}

Tensor refineMask(const Tensor& soft_mask, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw std::invalid_argument("refineMask: threshold must lie in [0,1]");
    int h = soft_mask.shape[0], w = soft_mask.shape[1];
    std::vector<int> label((size_t)h * w, 0);  // 0 bg, 1 fg
    for (size_t i = 0; i < label.size(); ++i)
        label[i] = (soft_mask.data[i] >= threshold && soft_mask.data[i] > 0.f) ? 1 : 0;

    // largest 4-connected component
    std::vector<int> comp((size_t)h * w, -1);
    int best = -1, bestSize = 0, ncomp = 0;
    std::deque<int> queue;
    for (int start = 0; start < h * w; ++start) {
        if (label[start] != 1 || comp[start] != -1) continue;
        int id = ncomp++, size = 0;
        queue.push_back(start);
        comp[start] = id;
        while (!queue.empty()) {
            int cur = queue.front();
            queue.pop_front();
            ++size;
            int y = cur / w, x = cur % w;
            const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                int ny = y + dy[k], nx = x + dx[k];
                if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                int ni = ny * w + nx;
                if (label[ni] == 1 && comp[ni] == -1) {
                    comp[ni] = id;
                    queue.push_back(ni);
                }
            }
        }
        if (size > bestSize) {
            bestSize = size;
            best = id;
        }
    }
    Tensor out({h, w});
    if (best < 0) return out;
    for (int i = 0; i < h * w; ++i) out.data[i] = comp[i] == best ? 1.f : 0.f;

    // fill holes: background not reachable from the border becomes foreground
    std::vector<char> reach((size_t)h * w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if ((y == 0 || y == h - 1 || x == 0 || x == w - 1) && out.data[(size_t)y * w + x] < 0.5f &&
                !reach[(size_t)y * w + x]) {
                queue.push_back(y * w + x);
                reach[(size_t)y * w + x] = 1;
                while (!queue.empty()) {
                    int cur = queue.front();
                    queue.pop_front();
                    int cy = cur / w, cx = cur % w;
                    const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
                    for (int k = 0; k < 4; ++k) {
                        int ny = cy + dy[k], nx = cx + dx[k];
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        int ni = ny * w + nx;
                        if (out.data[ni] < 0.5f && !reach[ni]) {
                            reach[ni] = 1;
                            queue.push_back(ni);
                        }
                    }
                }
            }
    for (int i = 0; i < h * w; ++i)
        if (out.data[i] < 0.5f && !reach[i]) out.data[i] = 1.f;
    return out;
}

std::string EvalReport::toJson() const {
    nlohmann::json pf = nlohmann::json::array();
    for (const auto& r : per_frame)
        pf.push_back({{"index", r.index}, {"j", r.j}, {"f", r.f}, {"iou_box", r.iou_box}});
    nlohmann::json j = {{"j_measure", j_measure},
                        {"f_measure", f_measure},
                        {"map50", map50},
                        {"best_threshold", best_threshold},
                        {"per_frame", pf}};
    return j.dump(1);
}

std::string EvalReport::toCsv() const {
    std::ostringstream os;
    os << "index,j,f,iou_box\n";
    for (const auto& r : per_frame)
        os << r.index << "," << r.j << "," << r.f << "," << r.iou_box << "\n";
    return os.str();
}

}  // namespace moseg::eval
