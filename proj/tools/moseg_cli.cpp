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

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "moseg/checkpoint.hpp"
#include "moseg/flowext.hpp"
#include "moseg/image_io.hpp"
#include "moseg/trainer.hpp"

namespace fs = std::filesystem;
using namespace moseg;

namespace {

train::TrainConfig loadConfig(const std::string& config_path,
                              const std::vector<std::string>& sets, uint64_t seed,
                              bool seed_given) {
    train::TrainConfig cfg;
    if (!config_path.empty()) cfg = train::TrainConfig::fromFile(config_path);
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_given) cfg.seed = seed;
    cfg.validate();
    return cfg;
}

std::vector<Tensor> datasetFrames(const std::vector<synth::SceneSample>& samples, bool flow) {
    std::vector<Tensor> frames;
    for (const auto& s : samples) {
        if (flow) {
            if (!s.flow_image)
                throw std::runtime_error("dataset has no flow images; regenerate with --flow");
            frames.push_back(*s.flow_image);
        } else {
            frames.push_back(s.frame);
        }
    }
    return frames;
}

void saveInpainterCkpt(const inpaint::Inpainter& net, float loss, const std::string& path) {
    ckpt::Archive ar;
    ar.meta["kind"] = "inpainter";
    ar.meta["image_size"] = net.imageSize();
    ar.meta["final_loss"] = loss;
    ar.putParams(net.params());
    ckpt::save(ar, path);
}

inpaint::Inpainter loadInpainterCkpt(const std::string& path) {
    ckpt::Archive ar = ckpt::load(path);
    if (ar.meta.value("kind", "") != "inpainter")
        throw std::runtime_error("not an inpainter checkpoint: " + path);
    inpaint::Inpainter net(ar.meta["image_size"].get<int>());
    ar.restoreParams(net.params());
    return net;
}

struct LoadedStage2 {
    train::TrainConfig cfg;
    std::unique_ptr<train::Stage2> trainer;
};

LoadedStage2 loadStage2(const std::string& path) {
    ckpt::Archive ar = ckpt::load(path);
    if (ar.meta.value("kind", "") != "stage2")
        throw std::runtime_error("not a stage-2 checkpoint: " + path);
    LoadedStage2 out;
    out.cfg = train::TrainConfig::fromJson(ar.meta["config"]);
    out.trainer = std::make_unique<train::Stage2>(out.cfg, nullptr, nullptr);
    out.trainer->loadCheckpoint(path);
    return out;
}

/// Green mask tint plus a red box outline over the frame.
Tensor overlay(const Tensor& frame, const Tensor& mask, const BoxGeometry& box) {
    const int h = frame.shape[1], w = frame.shape[2];
    Tensor out = frame;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.data[(size_t)y * w + x] > 0.5f) {
                out.at(0, y, x) *= 0.5f;
                out.at(1, y, x) = 0.5f * out.at(1, y, x) + 0.5f;
                out.at(2, y, x) *= 0.5f;
            }
    auto r = inpaint::rasterize(box, h, w);
    auto mark = [&](int y, int x) {
        if (y < 0 || y >= h || x < 0 || x >= w) return;
        out.at(0, y, x) = 1.f;
        out.at(1, y, x) = 0.f;
        out.at(2, y, x) = 0.f;
    };
    for (int x = r.x0; x < r.x1; ++x) mark(r.y0, x), mark(r.y1 - 1, x);
    for (int y = r.y0; y < r.y1; ++y) mark(y, r.x0), mark(y, r.x1 - 1);
    return out;
}

int runSynth(const std::string& out_dir, int frames, uint64_t seed, int image_size,
             const std::string& shape, const std::string& camera, bool flow) {
    synth::SceneConfig cfg;
    cfg.image_size = image_size;
    cfg.num_frames = frames;
    if (shape == "ellipse")
        cfg.sprite_shape = synth::SpriteShape::ellipse;
    else if (shape == "polygon")
        cfg.sprite_shape = synth::SpriteShape::polygon;
    else
        throw std::invalid_argument("unknown sprite shape: " + shape);
    if (camera == "static")
        cfg.camera_motion = synth::CameraMotion::static_cam;
    else if (camera == "rotation")
        cfg.camera_motion = synth::CameraMotion::rotation_homography;
    else if (camera == "translation")
        cfg.camera_motion = synth::CameraMotion::translation;
    else
        throw std::invalid_argument("unknown camera motion: " + camera);
    cfg.background_texture_seed = seed * 2 + 1;
    cfg.sprite_texture_seed = seed * 2 + 2;

    auto samples = synth::generateSequence(cfg, seed);
    if (flow) {
        // Frame 0 has no predecessor; its velocity is zero so the self-pair
        // yields the all-static encoding.
        samples[0].flow_image = flow::analyticFlow(samples[0], samples[0]);
        for (size_t i = 1; i < samples.size(); ++i)
            samples[i].flow_image = flow::analyticFlow(samples[i - 1], samples[i]);
    }
    synth::saveDataset(samples, out_dir);
    std::cout << "wrote " << samples.size() << " frames to " << out_dir << "\n";
    return 0;
}

int runTrainInpaint(const std::string& data_dir, const std::string& out_path,
                    const train::TrainConfig& cfg, bool flow) {
    auto samples = synth::loadDataset(data_dir);
    auto frames = datasetFrames(samples, flow);
    nn::Rng rng(cfg.seed);
    inpaint::Inpainter net(cfg.image_size, rng);
    inpaint::StageOneOptions opts;
    opts.steps = cfg.stage1_steps;
    opts.lr = cfg.lr_stage1;
    opts.scale_min = cfg.detector.scale_min;
    opts.scale_max = cfg.detector.scale_max;
    opts.logger = [](int step, float loss) {
        if (step % 100 == 0)
            std::cout << nlohmann::json({{"step", step}, {"loss", loss}}).dump() << "\n";
    };
    float loss = inpaint::trainInpainter(net, frames, opts, rng);
    saveInpainterCkpt(net, loss, out_path);
    std::cout << "final loss " << loss << "; wrote " << out_path << "\n";
    return 0;
}

int runTrain(const std::string& data_dir, const std::string& inpainter_path,
             const std::string& flow_inpainter_path, const std::string& out_path,
             const std::string& metrics_path, const std::string& resume_path,
             const train::TrainConfig& cfg) {
    auto samples = synth::loadDataset(data_dir);
    if (fs::exists(inpainter_path) == false)
        throw std::runtime_error("missing stage-1 checkpoint: " + inpainter_path);
    inpaint::Inpainter inpainter = loadInpainterCkpt(inpainter_path);
    std::optional<inpaint::Inpainter> flow_inpainter;
    if (!flow_inpainter_path.empty()) {
        if (!fs::exists(flow_inpainter_path))
            throw std::runtime_error("missing stage-1 checkpoint: " + flow_inpainter_path);
        flow_inpainter = loadInpainterCkpt(flow_inpainter_path);
    }
    train::Stage2 trainer(cfg, &inpainter, flow_inpainter ? &*flow_inpainter : nullptr);
    if (!resume_path.empty()) trainer.loadCheckpoint(resume_path);

    std::ofstream metrics;
    if (!metrics_path.empty()) {
        metrics.open(metrics_path, resume_path.empty() ? std::ios::trunc : std::ios::app);
        if (!metrics) throw std::runtime_error("cannot open metrics file: " + metrics_path);
    }
    train::trainStage2(trainer, samples, out_path, metrics.is_open() ? &metrics : nullptr);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int runEval(const std::string& data_dir, const std::string& ckpt_path,
            const std::string& out_json, const std::string& out_csv,
            const std::string& overlay_dir) {
    auto samples = synth::loadDataset(data_dir);
    LoadedStage2 s2 = loadStage2(ckpt_path);
    eval::EvalReport rep =
        train::evaluate(samples, s2.trainer->detector(), s2.trainer->segmenter());
    if (!out_json.empty()) std::ofstream(out_json) << rep.toJson();
    if (!out_csv.empty()) std::ofstream(out_csv) << rep.toCsv();
    if (!overlay_dir.empty()) {
        fs::create_directories(overlay_dir);
        for (size_t i = 0; i < samples.size(); ++i) {
            auto inf = train::infer(samples[i].frame, s2.trainer->detector(),
                                    s2.trainer->segmenter(), 1);
            Tensor refined = eval::refineMask(inf.soft_masks[0], rep.best_threshold);
            char name[32];
            std::snprintf(name, sizeof(name), "%06zu.png", i);
            io::saveImage(overlay(samples[i].frame, refined, inf.boxes[0]),
                          overlay_dir + "/" + name);
        }
    }
    std::cout << rep.toJson() << "\n";
    return 0;
}

int runInfer(const std::string& image_path, const std::string& ckpt_path, int k,
             const std::string& out_dir) {
    Tensor frame = io::loadImage(image_path);
    LoadedStage2 s2 = loadStage2(ckpt_path);
    auto inf = train::infer(frame, s2.trainer->detector(), s2.trainer->segmenter(), k);
    fs::create_directories(out_dir);
    nlohmann::json boxes = nlohmann::json::array();
    for (int i = 0; i < (int)inf.boxes.size(); ++i) {
        const auto& b = inf.boxes[i];
        boxes.push_back({{"cx", b.cx}, {"cy", b.cy}, {"w", b.w}, {"h", b.h},
                         {"confidence", inf.confidences[i]}});
        char name[32];
        std::snprintf(name, sizeof(name), "mask_%02d.png", i);
        io::saveMask(eval::refineMask(inf.soft_masks[i], 0.5), out_dir + "/" + name);
        std::snprintf(name, sizeof(name), "overlay_%02d.png", i);
        io::saveImage(overlay(frame, eval::refineMask(inf.soft_masks[i], 0.5), b),
                      out_dir + "/" + name);
    }
    std::ofstream(out_dir + "/boxes.json") << boxes.dump(2);
    std::cout << boxes.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moving-object detection & segmentation from unlabeled video"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_path, metrics_path, resume_path;
    std::string inpainter_path, flow_inpainter_path, out_json, out_csv, overlay_dir;
    std::string image_path, shape = "ellipse", camera = "static";
    std::vector<std::string> sets;
    uint64_t seed = 1;
    bool seed_given = false, flow = false;
    int frames = 64, image_size = 128, k = 1;

    auto addCommon = [&](CLI::App* c) {
        c->add_option("--config", config_path, "key=value config file");
        c->add_option("--set", sets, "config override key=value")->take_all();
        c->add_option("--seed", seed)->each([&](const std::string&) { seed_given = true; });
    };

    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    synth_cmd->add_option("--out", out_path)->required();
    synth_cmd->add_option("--frames", frames);
    synth_cmd->add_option("--seed", seed);
    synth_cmd->add_option("--image-size", image_size);
    synth_cmd->add_option("--sprite-shape", shape);
    synth_cmd->add_option("--camera", camera);
    synth_cmd->add_flag("--flow", flow, "also write analytic flow images");

    auto* ti = app.add_subcommand("train-inpaint", "stage 1: train the region inpainter");
    ti->add_option("--data", data_dir)->required();
    ti->add_option("--out", out_path)->required();
    addCommon(ti);

    auto* tfi = app.add_subcommand("train-flow-inpaint", "stage 1: inpainter on flow images");
    tfi->add_option("--data", data_dir)->required();
    tfi->add_option("--out", out_path)->required();
    addCommon(tfi);

    auto* tr = app.add_subcommand("train", "stage 2: detector + segmenter");
    tr->add_option("--data", data_dir)->required();
    tr->add_option("--inpainter", inpainter_path)->required();
    tr->add_option("--flow-inpainter", flow_inpainter_path);
    tr->add_option("--out", out_path)->required();
    tr->add_option("--metrics", metrics_path);
    tr->add_option("--resume", resume_path);
    addCommon(tr);

    auto* ev = app.add_subcommand("eval", "evaluate a stage-2 checkpoint");
    ev->add_option("--data", data_dir)->required();
    ev->add_option("--checkpoint", out_path)->required();
    ev->add_option("--out-json", out_json);
    ev->add_option("--out-csv", out_csv);
    ev->add_option("--overlay-dir", overlay_dir);

    auto* in = app.add_subcommand("infer", "run inference on one image");
    in->add_option("--image", image_path)->required();
    in->add_option("--checkpoint", out_path)->required();
    in->add_option("--k", k);
    in->add_option("--out-dir", overlay_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed())
            return runSynth(out_path, frames, seed, image_size, shape, camera, flow);
        train::TrainConfig cfg;
        if (ti->parsed() || tfi->parsed() || tr->parsed())
            cfg = loadConfig(config_path, sets, seed, seed_given);
        if (ti->parsed()) return runTrainInpaint(data_dir, out_path, cfg, false);
        if (tfi->parsed()) return runTrainInpaint(data_dir, out_path, cfg, true);
        if (tr->parsed())
            return runTrain(data_dir, inpainter_path, flow_inpainter_path, out_path,
                            metrics_path, resume_path, cfg);
        if (ev->parsed()) return runEval(data_dir, out_path, out_json, out_csv, overlay_dir);
        if (in->parsed()) return runInfer(image_path, out_path, k, overlay_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
