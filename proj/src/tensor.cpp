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

#include "moseg/tensor.hpp"

#include <cmath>
#include <sstream>

namespace moseg {

std::string Tensor::shapeStr() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

float Tensor::sum() const {
    double s = 0.0;
    for (float v : data) s += v;
    return (float)s;
}

float Tensor::mean() const { return data.empty() ? 0.f : sum() / (float)data.size(); }

float Tensor::maxAbs() const {
    float m = 0.f;
    for (float v : data) m = std::max(m, std::fabs(v));
    return m;
}

bool Tensor::allFinite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace moseg
