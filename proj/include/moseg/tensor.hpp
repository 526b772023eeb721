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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace moseg {

/// Dense float tensor, row-major, NCHW convention for image data.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numelOf(shape), 0.f) {}
    Tensor(std::vector<int> s, float fill) : shape(std::move(s)), data(numelOf(shape), fill) {}
    Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
        if ((int)data.size() != numelOf(shape))
            throw std::invalid_argument("Tensor: data size does not match shape");
    }

    static int numelOf(const std::vector<int>& s) {
        int n = 1;
        for (int d : s) n *= d;
        return n;
    }

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, float v) { return Tensor(std::move(s), v); }
    static Tensor scalar(float v) { return Tensor({1}, std::vector<float>{v}); }

    int numel() const { return (int)data.size(); }
    int dim(int i) const { return shape[i]; }
    int ndim() const { return (int)shape.size(); }

    float& operator[](int i) { return data[i]; }
    float operator[](int i) const { return data[i]; }

    // CHW accessors for 3-d tensors.
    float& at(int c, int y, int x) { return data[(c * shape[1] + y) * shape[2] + x]; }
    float at(int c, int y, int x) const { return data[(c * shape[1] + y) * shape[2] + x]; }

    bool sameShape(const Tensor& o) const { return shape == o.shape; }
    std::string shapeStr() const;

    float sum() const;
    float mean() const;
    float maxAbs() const;
    bool allFinite() const;
};

}  // namespace moseg
