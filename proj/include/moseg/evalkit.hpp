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

#include <string>
#include <vector>

#include "moseg/geometry.hpp"

namespace moseg::eval {

struct PerFrame {
    int index;
    double j, f, iou_box;
};

struct EvalReport {
    double j_measure = 0, f_measure = 0, map50 = 0;
    double best_threshold = 0;
    std::vector<PerFrame> per_frame;

    std::string toJson() const;
    std::string toCsv() const;
};

/// Region similarity |pred ∩ gt| / |pred ∪ gt|; 1 if both masks are empty.
double jMeasure(const Tensor& pred_mask, const Tensor& gt_mask);

/// Boundary F: 4-connected contours, matches within `band_radius` (Euclidean),
/// F = 2PR/(P+R). Both empty -> 1, one empty -> 0.
double fMeasure(const Tensor& pred_mask, const Tensor& gt_mask, double band_radius);

/// Conventional boundary tolerance: ceil(0.0075 * image diagonal).
double defaultBandRadius(int h, int w);

/// Grid 0.05..1.00 step 0.05; returns (best threshold, mean J at it); ties go
/// to the lower threshold.
std::pair<double, double> thresholdSearch(const std::vector<Tensor>& soft_masks,
                                          const std::vector<Tensor>& gt_masks);

struct Detection {
    BoxGeometry box;
    double confidence;
    int frame;
};

/// Single-class AP at IoU >= 0.5, all-point interpolation; one gt box per frame.
double map50(const std::vector<Detection>& preds, const std::vector<BoxGeometry>& gt_boxes);

/// Threshold, keep the largest 4-connected component, fill enclosed holes.
Tensor refineMask(const Tensor& soft_mask, double threshold);

}  // namespace moseg::eval
