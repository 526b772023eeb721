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

#include "json.hpp"
#include "moseg/detector.hpp"
#include "moseg/objectives.hpp"

namespace moseg::train {

enum class SamplingMode { importance, uniform, gumbel, exhaustive };
enum class RoutingMode { separate, joint };
enum class ObjectiveMode { both, G_only, O_only };
enum class HeadMode { proposal, direct_regression };

std::string toString(SamplingMode m);
std::string toString(RoutingMode m);
std::string toString(ObjectiveMode m);
std::string toString(HeadMode m);

/// Every knob of both training stages, settable from a flat key=value file
/// plus `--set key=value` overrides.
struct TrainConfig {
    int batch_size = 16;
    int samples_per_image = 1;
    float epsilon_start = 1e-3f;
    float epsilon_end = 1e-5f;
    int epsilon_decay_steps = 0;  // 0: first third of stage-2
    obj::LossWeights weights;
    det::DetectorConfig detector;
    int image_size = 128;
    int crop_size = 64;
    float erase_scale = 1.1f;
    int stage1_steps = 2000;
    int stage2_steps = 6000;
    float lr_stage1 = 1e-3f;
    float lr_stage2 = 2e-4f;
    uint64_t seed = 1;
    SamplingMode sampling_mode = SamplingMode::importance;
    float gumbel_tau = 0.1f;
    RoutingMode routing_mode = RoutingMode::separate;
    ObjectiveMode objective_mode = ObjectiveMode::both;
    HeadMode head_mode = HeadMode::proposal;
    bool flow_enabled = false;
    float flow_weight = 1.f;
    int checkpoint_every = 2000;

    /// Throws std::invalid_argument("unknown key: ...") for unrecognized keys.
    void set(const std::string& key, const std::string& value);
    static TrainConfig fromFile(const std::string& path);
    nlohmann::json toJson() const;
    static TrainConfig fromJson(const nlohmann::json& j);

    float epsilonAt(int step) const;
    void validate() const;
};

}  // namespace moseg::train
