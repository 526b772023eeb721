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

#include "moseg/checkpoint.hpp"

#include <fstream>

namespace moseg::ckpt {

namespace {
constexpr char kMagic[] = "MOSEG-CKPT-1\n";
}

void Archive::putParams(const nn::ParamStore& params) {
    for (const auto& [name, p] : params.all()) arrays[name] = p->value;
}

void Archive::putAdam(const std::string& prefix, nn::Adam& adam) {
    meta[prefix + ".adam_t"] = adam.stepCount();
    for (auto& [name, mv] : adam.moments()) {
        arrays["__adam_m." + name] = mv.first;
        arrays["__adam_v." + name] = mv.second;
    }
}

void Archive::restoreParams(nn::ParamStore& params) const {
    for (auto& [name, p] : params.all()) {
        auto it = arrays.find(name);
        if (it == arrays.end())
            throw std::runtime_error("checkpoint: missing array " + name);
        if (it->second.shape != p->value.shape)
            throw std::runtime_error("checkpoint: shape mismatch for " + name);
        p->value = it->second;
    }
}

void Archive::restoreAdam(const std::string& prefix, nn::Adam& adam,
                          const nn::ParamStore& params) const {
    if (meta.contains(prefix + ".adam_t")) adam.setStepCount(meta[prefix + ".adam_t"]);
    for (const auto& [name, p] : params.all()) {
        auto mi = arrays.find("__adam_m." + name);
        auto vi = arrays.find("__adam_v." + name);
        if (mi != arrays.end() && vi != arrays.end())
            adam.moments()[name] = {mi->second, vi->second};
    }
}

void save(const Archive& archive, const std::string& path) {
    nlohmann::json table = nlohmann::json::array();
    size_t offset = 0;
    for (const auto& [name, t] : archive.arrays) {
        table.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
        offset += t.data.size();
    }
    nlohmann::json header = {{"meta", archive.meta}, {"arrays", table}};
    std::string hs = header.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot write " + path);
    os.write(kMagic, sizeof(kMagic) - 1);
    uint64_t n = hs.size();
    os.write((const char*)&n, sizeof n);
    os.write(hs.data(), (std::streamsize)hs.size());
    for (const auto& [name, t] : archive.arrays)
        os.write((const char*)t.data.data(), (std::streamsize)(t.data.size() * sizeof(float)));
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

Archive load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[sizeof(kMagic) - 1];
    is.read(magic, sizeof magic);
    if (!is || std::string(magic, sizeof magic) != std::string(kMagic, sizeof magic))
        throw std::runtime_error("checkpoint: bad magic in " + path);
    uint64_t n = 0;
    is.read((char*)&n, sizeof n);
    std::string hs(n, '\0');
    is.read(hs.data(), (std::streamsize)n);
    if (!is) throw std::runtime_error("checkpoint: truncated header in " + path);
    nlohmann::json header = nlohmann::json::parse(hs);
    Archive a;
    a.meta = header.at("meta");
    for (const auto& e : header.at("arrays")) {
        Tensor t(e.at("shape").get<std::vector<int>>());
        is.read((char*)t.data.data(), (std::streamsize)(t.data.size() * sizeof(float)));
        if (!is) throw std::runtime_error("checkpoint: truncated payload in " + path);
        a.arrays[e.at("name").get<std::string>()] = std::move(t);
    }
    return a;
}

}  // namespace moseg::ckpt
