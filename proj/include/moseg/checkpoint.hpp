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

#include <map>
#include <string>

#include "json.hpp"
#include "moseg/nn.hpp"

namespace moseg::ckpt {

/// One file per checkpoint: magic line, JSON header (meta + array table),
/// raw little-endian float32 payload.
struct Archive {
    nlohmann::json meta;
    std::map<std::string, Tensor> arrays;

    void putParams(const nn::ParamStore& params);
    void putAdam(const std::string& prefix, nn::Adam& adam);
    /// Copies matching arrays into existing parameters; throws on a missing
    /// or shape-mismatched name.
    void restoreParams(nn::ParamStore& params) const;
    void restoreAdam(const std::string& prefix, nn::Adam& adam,
                     const nn::ParamStore& params) const;
};

void save(const Archive& archive, const std::string& path);
Archive load(const std::string& path);

}  // namespace moseg::ckpt
