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

#include "moseg/nn.hpp"

namespace moseg::seg {

using ad::Var;

struct SegOutput {
    Var recon;  // [N,3,p,p] or [3,p,p], sigmoid range
    Var mask;   // [N,1,p,p] or [1,p,p], sigmoid range
};

/// Bottleneck autoencoder over cropped patches: shared encoder/decoder trunk
/// with a reconstruction head and a mask head. The innermost feature volume
/// stays below 1/8 of the input value count so the reconstruction cannot be
/// a passthrough.
class Segmenter {
public:
    Segmenter(int crop_size, nn::Rng& rng);
    explicit Segmenter(int crop_size);  // checkpoint restore

    SegOutput segment(const Var& patch) const;

    /// Innermost feature volume (values) at the bottleneck.
    int bottleneckVolume() const;
    int cropSize() const { return crop_size_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }

private:
    void build(nn::Rng* rng);
    int crop_size_;
    std::vector<int> encCh_;
    nn::ParamStore params_;
};

}  // namespace moseg::seg
