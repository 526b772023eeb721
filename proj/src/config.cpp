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

#include "moseg/config.hpp"

#include <fstream>
#include <sstream>

namespace moseg::train {

std::string toString(SamplingMode m) {
    switch (m) {
        case SamplingMode::importance: return "importance";
        case SamplingMode::uniform: return "uniform";
        case SamplingMode::gumbel: return "gumbel";
        case SamplingMode::exhaustive: return "exhaustive";
    }
    return "?";
}
std::string toString(RoutingMode m) {
    return m == RoutingMode::separate ? "separate" : "joint";
}
std::string toString(ObjectiveMode m) {
    switch (m) {
        case ObjectiveMode::both: return "both";
        case ObjectiveMode::G_only: return "G_only";
        case ObjectiveMode::O_only: return "O_only";
    }
    return "?";
}
std::string toString(HeadMode m) {
    return m == HeadMode::proposal ? "proposal" : "direct_regression";
}

namespace {

template <typename T>
T parseEnum(const std::string& v, std::initializer_list<std::pair<const char*, T>> table,
            const std::string& key) {
    for (const auto& [name, val] : table)
        if (v == name) return val;
    throw std::invalid_argument("bad value for " + key + ": " + v);
}

}  // namespace

void TrainConfig::set(const std::string& key, const std::string& value) {
    auto f = [&] { return std::stof(value); };
    auto i = [&] { return std::stoi(value); };
    if (key == "batch_size") batch_size = i();
    else if (key == "samples_per_image") samples_per_image = i();
    else if (key == "epsilon_start") epsilon_start = f();
    else if (key == "epsilon_end") epsilon_end = f();
    else if (key == "epsilon_decay_steps") epsilon_decay_steps = i();
    else if (key == "weights.pixel") weights.pixel = f();
    else if (key == "weights.perceptual") weights.perceptual = f();
    else if (key == "weights.prob_prior") weights.prob_prior = f();
    else if (key == "weights.v_prior") weights.v_prior = f();
    else if (key == "weights.lambda_v") weights.lambda_v = f();
    else if (key == "detector.grid_h") detector.grid_h = i();
    else if (key == "detector.grid_w") detector.grid_w = i();
    else if (key == "detector.scale_min") detector.scale_min = f();
    else if (key == "detector.scale_max") detector.scale_max = f();
    else if (key == "detector.offset_limit_factor") detector.offset_limit_factor = f();
    else if (key == "detector.offset_limit_basis")
        detector.offset_basis = parseEnum<det::OffsetBasis>(
            value, {{"cell", det::OffsetBasis::cell}, {"box", det::OffsetBasis::box}}, key);
    else if (key == "image_size") image_size = i();
    else if (key == "crop_size") crop_size = i();
    else if (key == "erase_scale") erase_scale = f();
    else if (key == "stage1_steps") stage1_steps = i();
    else if (key == "stage2_steps") stage2_steps = i();
    else if (key == "lr_stage1") lr_stage1 = f();
    else if (key == "lr_stage2") lr_stage2 = f();
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "sampling_mode")
        sampling_mode = parseEnum<SamplingMode>(value,
                                                {{"importance", SamplingMode::importance},
                                                 {"uniform", SamplingMode::uniform},
                                                 {"gumbel", SamplingMode::gumbel},
                                                 {"exhaustive", SamplingMode::exhaustive}},
                                                key);
    else if (key == "gumbel_tau") gumbel_tau = f();
    else if (key == "routing_mode")
        routing_mode = parseEnum<RoutingMode>(
            value, {{"separate", RoutingMode::separate}, {"joint", RoutingMode::joint}}, key);
    else if (key == "objective_mode")
        objective_mode = parseEnum<ObjectiveMode>(value,
                                                  {{"both", ObjectiveMode::both},
                                                   {"G_only", ObjectiveMode::G_only},
                                                   {"O_only", ObjectiveMode::O_only}},
                                                  key);
    else if (key == "head_mode")
        head_mode = parseEnum<HeadMode>(value,
                                        {{"proposal", HeadMode::proposal},
                                         {"direct_regression", HeadMode::direct_regression}},
                                        key);
    else if (key == "flow_enabled") flow_enabled = value == "true" || value == "1";
    else if (key == "flow_weight") flow_weight = f();
    else if (key == "checkpoint_every") checkpoint_every = i();
    else throw std::invalid_argument("unknown key: " + key);
}

TrainConfig TrainConfig::fromFile(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    TrainConfig cfg;
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (!key.empty()) cfg.set(key, value);
    }
    return cfg;
}

nlohmann::json TrainConfig::toJson() const {
    return {{"batch_size", batch_size},
            {"samples_per_image", samples_per_image},
            {"epsilon_start", epsilon_start},
            {"epsilon_end", epsilon_end},
            {"epsilon_decay_steps", epsilon_decay_steps},
            {"weights.pixel", weights.pixel},
            {"weights.perceptual", weights.perceptual},
            {"weights.prob_prior", weights.prob_prior},
            {"weights.v_prior", weights.v_prior},
            {"weights.lambda_v", weights.lambda_v},
            {"detector.grid_h", detector.grid_h},
            {"detector.grid_w", detector.grid_w},
            {"detector.scale_min", detector.scale_min},
            {"detector.scale_max", detector.scale_max},
            {"detector.offset_limit_factor", detector.offset_limit_factor},
            {"detector.offset_limit_basis",
             detector.offset_basis == det::OffsetBasis::cell ? "cell" : "box"},
            {"image_size", image_size},
            {"crop_size", crop_size},
            {"erase_scale", erase_scale},
            {"stage1_steps", stage1_steps},
            {"stage2_steps", stage2_steps},
            {"lr_stage1", lr_stage1},
            {"lr_stage2", lr_stage2},
            {"seed", seed},
            {"sampling_mode", toString(sampling_mode)},
            {"gumbel_tau", gumbel_tau},
            {"routing_mode", toString(routing_mode)},
            {"objective_mode", toString(objective_mode)},
            {"head_mode", toString(head_mode)},
            {"flow_enabled", flow_enabled},
            {"flow_weight", flow_weight},
            {"checkpoint_every", checkpoint_every}};
}

TrainConfig TrainConfig::fromJson(const nlohmann::json& j) {
    TrainConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string v;
        if (it.value().is_string()) v = it.value().get<std::string>();
        else if (it.value().is_boolean()) v = it.value().get<bool>() ? "true" : "false";
        else {
            std::ostringstream os;
            os.precision(9);
            os << it.value().get<double>();
            v = os.str();
        }
        cfg.set(it.key(), v);
    }
    return cfg;
}

float TrainConfig::epsilonAt(int step) const {
    int decay = epsilon_decay_steps > 0 ? epsilon_decay_steps : std::max(1, stage2_steps / 3);
    float t = std::min(1.f, (float)step / (float)decay);
    float eps = epsilon_start + t * (epsilon_end - epsilon_start);
    float cap = 0.999f / (float)detector.numCells();
    return std::min(eps, cap);
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (samples_per_image < 1)
        throw std::invalid_argument("TrainConfig: samples_per_image must be >= 1");
    float invC = 1.f / (float)detector.numCells();
    if (epsilon_start < 0.f || epsilon_start >= invC || epsilon_end < 0.f || epsilon_end >= invC)
        throw std::invalid_argument("TrainConfig: epsilon schedule must lie in [0, 1/C)");
    detector.validate();
    if (image_size % detector.grid_h != 0 || image_size % detector.grid_w != 0)
        throw std::invalid_argument("TrainConfig: image_size must be divisible by the grid");
}

}  // namespace moseg::train
