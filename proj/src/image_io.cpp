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

#include "moseg/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace moseg::io {

void saveImage(const Tensor& chw, const std::string& path) {
    if (chw.ndim() != 3 || chw.shape[0] != 3)
        throw std::invalid_argument("saveImage: need [3,H,W]");
    int h = chw.shape[1], w = chw.shape[2];
    cv::Mat img(h, w, CV_8UC3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto& px = img.at<cv::Vec3b>(y, x);  // BGR on disk
            px[2] = quantize(chw.at(0, y, x));
            px[1] = quantize(chw.at(1, y, x));
            px[0] = quantize(chw.at(2, y, x));
        }
    if (!cv::imwrite(path, img))
        throw std::runtime_error("saveImage: cannot write " + path);
}

Tensor loadImage(const std::string& path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_COLOR);
    if (img.empty()) throw std::runtime_error("loadImage: cannot read " + path);
    Tensor t({3, img.rows, img.cols});
    for (int y = 0; y < img.rows; ++y)
        for (int x = 0; x < img.cols; ++x) {
            const auto& px = img.at<cv::Vec3b>(y, x);
            t.at(0, y, x) = px[2] / 255.f;
            t.at(1, y, x) = px[1] / 255.f;
            t.at(2, y, x) = px[0] / 255.f;
        }
    return t;
}

void saveMask(const Tensor& hw, const std::string& path) {
    if (hw.ndim() != 2) throw std::invalid_argument("saveMask: need [H,W]");
    int h = hw.shape[0], w = hw.shape[1];
    cv::Mat img(h, w, CV_8UC1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at<uint8_t>(y, x) = hw.data[(size_t)y * w + x] > 0.5f ? 255 : 0;
    if (!cv::imwrite(path, img))
        throw std::runtime_error("saveMask: cannot write " + path);
}

Tensor loadMask(const std::string& path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw std::runtime_error("loadMask: cannot read " + path);
    Tensor t({img.rows, img.cols});
    for (int y = 0; y < img.rows; ++y)
        for (int x = 0; x < img.cols; ++x)
            t.data[(size_t)y * img.cols + x] = img.at<uint8_t>(y, x) > 127 ? 1.f : 0.f;
    return t;
}

}  // namespace moseg::io
