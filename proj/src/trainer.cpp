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

#include "moseg/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "moseg/checkpoint.hpp"

namespace moseg::train {

using ad::Var;

namespace {

Tensor batchTensor(const std::vector<const synth::SceneSample*>& batch) {
    const int s = batch[0]->frame.shape[1];
    Tensor out({(int)batch.size(), 3, s, s});
    for (size_t i = 0; i < batch.size(); ++i) {
        if (batch[i]->frame.shape[1] != s || batch[i]->frame.shape[2] != s)
            throw std::invalid_argument("trainStep: mixed frame sizes in batch");
        std::copy(batch[i]->frame.data.begin(), batch[i]->frame.data.end(),
                  out.data.begin() + (size_t)i * 3 * s * s);
    }
    return out;
}

int argmax(const std::vector<float>& v) {
    return (int)(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

Stage2::Stage2(const TrainConfig& cfg, const inpaint::Inpainter* inpainter,
               const inpaint::Inpainter* flow_inpainter)
    : cfg_(cfg),
      inpainter_(inpainter),
      flow_inpainter_(flow_inpainter),
      adam_det_(cfg.lr_stage2),
      adam_seg_(cfg.lr_stage2),
      rng_(cfg.seed) {
    cfg_.validate();
    detector_ = std::make_unique<det::Detector>(cfg_.detector, cfg_.image_size, rng_);
    segmenter_ = std::make_unique<seg::Segmenter>(cfg_.crop_size, rng_);
}

StepGraph Stage2::buildStepGraph(const std::vector<const synth::SceneSample*>& batch) {
    const int n = (int)batch.size();
    obj::ObjectiveContext ctx;
    ctx.segmenter = segmenter_.get();
    ctx.inpainter = inpainter_;
    ctx.phi = &phi_;
    ctx.weights = cfg_.weights;
    ctx.erase_scale = cfg_.erase_scale;

    const bool want_o = cfg_.objective_mode != ObjectiveMode::G_only;
    const bool want_g = cfg_.objective_mode != ObjectiveMode::O_only;
    const float eps = cfg_.epsilonAt(step_);

    Var frames = ad::constant(batchTensor(batch));
    StepGraph out{ad::constantScalar(0.f), ad::constantScalar(0.f), ad::constantScalar(0.f),
                  ad::constantScalar(0.f), ad::constantScalar(0.f), ad::constantScalar(0.f)};

    std::vector<det::ProposalSet> proposals;
    std::vector<Var> regressed;
    if (cfg_.head_mode == HeadMode::proposal)
        proposals = detector_->detect(frames);
    else
        regressed = detector_->regressBox(frames);

    for (int i = 0; i < n; ++i) {
        const Tensor& frame = batch[i]->frame;

        // (box for O, box for G, O weight, G weight) per sampled candidate.
        struct Draw {
            Var box_o, box_g, w_o, w_g;
        };
        std::vector<Draw> draws;

        // Separate routing detaches boxes in G. Without O in the mix there
        // would be nothing left to train the box path, so the G-only
        // ablation lets G reach the boxes as well.
        const bool g_sees_box =
            cfg_.routing_mode == RoutingMode::joint || !want_o;
        if (cfg_.head_mode == HeadMode::direct_regression) {
            Var box = regressed[i];
            Var one = ad::constantScalar(1.f);
            Var box_g = g_sees_box ? box : ad::detach(box);
            draws.push_back({box, box_g, one, one});
        } else {
            const auto& ps = proposals[i];
            const int c_count = cfg_.detector.numCells();
            auto makeDraw = [&](int c, const Var& w_g) {
                Var box = ad::pickRow(ps.boxes, c);
                Var box_g = g_sees_box ? box : ad::detach(box);
                draws.push_back({box, box_g, ad::detach(w_g), w_g});
            };
            switch (cfg_.sampling_mode) {
                case SamplingMode::importance: {
                    auto dist = sampler::smooth(ps.probList(), eps);
                    for (int j = 0; j < cfg_.samples_per_image; ++j) {
                        int c = sampler::draw(dist, rng_);
                        makeDraw(c, sampler::importanceWeight(ps.probs, dist, c));
                    }
                    break;
                }
                case SamplingMode::uniform: {
                    // q uniform regardless of p; weight p(c) * C stays unbiased.
                    sampler::SmoothedDistribution dist;
                    dist.p = ps.probList();
                    dist.q.assign(c_count, 1.f / (float)c_count);
                    for (int j = 0; j < cfg_.samples_per_image; ++j) {
                        int c = sampler::draw(dist, rng_);
                        makeDraw(c, sampler::importanceWeight(ps.probs, dist, c));
                    }
                    break;
                }
                case SamplingMode::gumbel: {
                    for (int j = 0; j < cfg_.samples_per_image; ++j) {
                        Var y = sampler::gumbelSoftmaxSample(ps.logits, cfg_.gumbel_tau, rng_);
                        int c = argmax(y->value.data);
                        makeDraw(c, ad::pick(y, c));
                    }
                    break;
                }
                case SamplingMode::exhaustive: {
                    for (int c = 0; c < c_count; ++c) makeDraw(c, ad::pick(ps.probs, c));
                    break;
                }
            }
        }

        Var o_i = ad::constantScalar(0.f), g_i = ad::constantScalar(0.f);
        Var gf_i = ad::constantScalar(0.f), v_i = ad::constantScalar(0.f);
        for (const auto& d : draws) {
            std::optional<obj::ForegroundResult> fr;
            if (want_o) {
                fr = obj::foregroundObjective(frame, d.box_o, d.w_o, ctx);
                o_i = ad::add(o_i, fr->loss);
                // weighted like O so its expectation matches the exhaustive sum
                Var vp = obj::vPrior(fr->pasted_mask, ctx.weights.lambda_v);
                v_i = ad::add(v_i, ad::mulScalar(ad::mul(d.w_o, vp), ctx.weights.v_prior));
            }
            if (want_g) {
                Tensor bg;
                if (fr) {
                    bg = fr->inpainted_background;
                } else {
                    auto erased =
                        inpaint::erase(frame, stn::boxFromVar(d.box_g), cfg_.erase_scale);
                    bg = inpainter_->inpaint(erased);
                }
                g_i = ad::add(g_i, obj::backgroundObjective(frame, bg, d.box_g, d.w_g, ctx));
                if (cfg_.flow_enabled && flow_inpainter_ && batch[i]->flow_image) {
                    const Tensor& fl = *batch[i]->flow_image;
                    auto ferased =
                        inpaint::erase(fl, stn::boxFromVar(d.box_g), cfg_.erase_scale);
                    Tensor fbg = flow_inpainter_->inpaint(ferased);
                    gf_i = ad::add(gf_i, ad::mulScalar(obj::backgroundObjective(fl, fbg, d.box_g,
                                                                                d.w_g, ctx),
                                                       cfg_.flow_weight));
                }
            }
        }
        // exhaustive draws are already probability-weighted and sum to the
        // expectation; stochastic modes average over samples_per_image
        const float inv = cfg_.sampling_mode == SamplingMode::exhaustive &&
                                  cfg_.head_mode == HeadMode::proposal
                              ? 1.f
                              : 1.f / (float)draws.size();
        out.o_loss = ad::add(out.o_loss, ad::mulScalar(o_i, inv / n));
        out.g_loss = ad::add(out.g_loss, ad::mulScalar(g_i, inv / n));
        out.flow_loss = ad::add(out.flow_loss, ad::mulScalar(gf_i, inv / n));
        out.v_prior_loss = ad::add(out.v_prior_loss, ad::mulScalar(v_i, inv / n));
        if (cfg_.head_mode == HeadMode::proposal && want_g)
            out.prob_prior_loss =
                ad::add(out.prob_prior_loss,
                        ad::mulScalar(obj::probPrior(proposals[i].probs),
                                      cfg_.weights.prob_prior / (float)n));
    }

    out.total = ad::add(ad::add(out.o_loss, out.g_loss),
                        ad::add(out.flow_loss, ad::add(out.v_prior_loss, out.prob_prior_loss)));
    return out;
}

StepStats Stage2::trainStep(const std::vector<synth::SceneSample>& dataset,
                            const std::vector<size_t>& indices) {
    std::vector<const synth::SceneSample*> batch;
    batch.reserve(indices.size());
    for (size_t idx : indices) batch.push_back(&dataset.at(idx));

    detector_->params().zeroGrads();
    segmenter_->params().zeroGrads();
    StepGraph g = buildStepGraph(batch);

    if (!std::isfinite(g.total->scalar())) {
        std::ostringstream oss;
        oss << "non-finite loss at step " << step_ << "; batch indices:";
        for (size_t idx : indices) oss << ' ' << idx;
        throw std::runtime_error(oss.str());
    }
    ad::backward(g.total);
    adam_det_.step(detector_->params());
    adam_seg_.step(segmenter_->params());

    StepStats st{step_,
                 g.total->scalar(),
                 g.o_loss->scalar(),
                 g.g_loss->scalar(),
                 g.flow_loss->scalar(),
                 g.v_prior_loss->scalar(),
                 g.prob_prior_loss->scalar(),
                 cfg_.epsilonAt(step_)};
    ++step_;
    return st;
}

void Stage2::saveCheckpoint(const std::string& path) const {
    ckpt::Archive ar;
    ar.meta["kind"] = "stage2";
    ar.meta["step"] = step_;
    ar.meta["config"] = cfg_.toJson();
    std::ostringstream rs;
    rs << rng_;
    ar.meta["rng"] = rs.str();
    ar.putParams(detector_->params());
    ar.putParams(segmenter_->params());
    ar.putAdam("det", const_cast<nn::Adam&>(adam_det_));
    ar.putAdam("seg", const_cast<nn::Adam&>(adam_seg_));
    ckpt::save(ar, path);
}

void Stage2::loadCheckpoint(const std::string& path) {
    ckpt::Archive ar = ckpt::load(path);
    if (ar.meta.value("kind", "") != "stage2")
        throw std::runtime_error("checkpoint: not a stage-2 checkpoint: " + path);
    ar.restoreParams(detector_->params());
    ar.restoreParams(segmenter_->params());
    ar.restoreAdam("det", adam_det_, detector_->params());
    ar.restoreAdam("seg", adam_seg_, segmenter_->params());
    step_ = ar.meta.value("step", 0);
    if (ar.meta.contains("rng")) {
        std::istringstream rs(ar.meta["rng"].get<std::string>());
        rs >> rng_;
    }
}

void trainStage2(Stage2& trainer, const std::vector<synth::SceneSample>& dataset,
                 const std::string& checkpoint_path, std::ostream* metrics) {
    const TrainConfig& cfg = trainer.config();
    std::uniform_int_distribution<size_t> pick(0, dataset.size() - 1);
    while (trainer.step() < cfg.stage2_steps) {
        std::vector<size_t> indices(cfg.batch_size);
        for (auto& idx : indices) idx = pick(trainer.rng());
        StepStats st = trainer.trainStep(dataset, indices);
        if (metrics) {
            nlohmann::json line = {
                {"step", st.step},         {"total", st.total}, {"O", st.o},
                {"G", st.g},               {"G_flow", st.gf},   {"v_prior", st.v},
                {"prob_prior", st.pp},     {"epsilon", st.epsilon},
                {"sampling", toString(cfg.sampling_mode)},
                {"routing", toString(cfg.routing_mode)},
                {"objective", toString(cfg.objective_mode)}};
            (*metrics) << line.dump() << "\n";
        }
        const bool last = trainer.step() >= cfg.stage2_steps;
        if (!checkpoint_path.empty() &&
            (last || trainer.step() % cfg.checkpoint_every == 0))
            trainer.saveCheckpoint(checkpoint_path);
    }
}

Inference infer(const Tensor& frame, const det::Detector& detector,
                const seg::Segmenter& segmenter, int k) {
    Var fv = ad::constant(frame);
    auto proposals = detector.detect(fv);
    const auto& ps = proposals[0];
    auto cells = det::topKCells(ps.probList(), k);

    Inference out;
    const int h = frame.shape[1], w = frame.shape[2];
    for (int c : cells) {
        BoxGeometry b = ps.box(c);
        out.boxes.push_back(b);
        out.confidences.push_back(ps.probList()[c]);
        Tensor patch = stn::cropValue(frame, b, segmenter.cropSize(), segmenter.cropSize());
        seg::SegOutput so = segmenter.segment(ad::constant(patch));
        Tensor pasted = stn::pasteValue(so.mask->value, b, h, w);
        Tensor mask({h, w});
        std::copy(pasted.data.begin(), pasted.data.end(), mask.data.begin());
        out.soft_masks.push_back(std::move(mask));
    }
    return out;
}

eval::EvalReport evaluate(const std::vector<synth::SceneSample>& dataset,
                          const det::Detector& detector, const seg::Segmenter& segmenter) {
    std::vector<Tensor> soft, gts;
    std::vector<eval::Detection> dets;
    std::vector<BoxGeometry> gt_boxes;
    for (size_t i = 0; i < dataset.size(); ++i) {
        Inference inf = infer(dataset[i].frame, detector, segmenter, 1);
        soft.push_back(inf.soft_masks[0]);
        gts.push_back(dataset[i].gt_mask);
        dets.push_back({inf.boxes[0], inf.confidences[0], (int)i});
        gt_boxes.push_back(dataset[i].gt_box);
    }
    auto [thr, _] = eval::thresholdSearch(soft, gts);

    eval::EvalReport rep;
    rep.best_threshold = thr;
    rep.map50 = eval::map50(dets, gt_boxes);
    const int h = dataset[0].frame.shape[1], w = dataset[0].frame.shape[2];
    const double band = eval::defaultBandRadius(h, w);
    double jsum = 0, fsum = 0;
    for (size_t i = 0; i < dataset.size(); ++i) {
        Tensor refined = eval::refineMask(soft[i], thr);
        double j = eval::jMeasure(refined, gts[i]);
        double f = eval::fMeasure(refined, gts[i], band);
        double iou = BoxGeometry::iou(dets[i].box, gt_boxes[i]);
        rep.per_frame.push_back({(int)i, j, f, iou});
        jsum += j;
        fsum += f;
    }
    rep.j_measure = jsum / dataset.size();
    rep.f_measure = fsum / dataset.size();
    return rep;
}

}  // namespace moseg::train
