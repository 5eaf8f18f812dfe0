#include "spectrack/train.hpp"

#include <algorithm>
#include <cmath>

#include "spectrack/error.hpp"

namespace spectrack {

std::size_t positive_cell(const std::array<double, 4>& target, std::size_t grid_h,
                          std::size_t grid_w) {
  const double cx = (target[0] + target[2]) / 2.0;
  const double cy = (target[1] + target[3]) / 2.0;
  auto index = [](double c, std::size_t n) {
    const double k = std::floor(c * static_cast<double>(n));
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
  };
  return index(cy, grid_h) * grid_w + index(cx, grid_w);
}

LossTerms tracking_loss(const HeadOutput& head, const std::array<double, 4>& target,
                        std::size_t grid_h, std::size_t grid_w, const TrainConfig& tcfg) {
  Tape& tape = *head.logits.tape;
  const std::size_t cells = grid_h * grid_w;
  if (head.logits.rows() != cells || head.offsets.rows() != cells) {
    throw DimensionError("tracking_loss: head has " + std::to_string(head.logits.rows()) +
                         " cells for a " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                         " grid");
  }
  const std::size_t pos = positive_cell(target, grid_h, grid_w);
  Matrix labels(cells, 1);
  labels[pos] = 1.0;
  Matrix weights(cells, 1);
  weights.fill(cells > 1 ? 0.5 / static_cast<double>(cells - 1) : 0.0);
  weights[pos] = cells > 1 ? 0.5 : 1.0;
  Var bce = bce_with_logits(head.logits, labels, weights);

  const double cx = (static_cast<double>(pos % grid_w) + 0.5) / static_cast<double>(grid_w);
  const double cy = (static_cast<double>(pos / grid_w) + 0.5) / static_cast<double>(grid_h);
  Var signs = tape.constant(Matrix::from_rows({{-1.0, -1.0, 1.0, 1.0}}));
  Var centre = tape.constant(Matrix::from_rows({{cx, cy, cx, cy}}));
  Var box = add(hadamard(slice_rows(head.offsets, pos, 1), signs), centre);
  const Matrix tgt = Matrix::from_rows({{target[0], target[1], target[2], target[3]}});
  Var iou_term = iou_loss(box, tgt);
  Var l1_term = l1_loss(box, tgt);
  Var total = add(add(bce, scale(iou_term, tcfg.lambda_iou)), scale(l1_term, tcfg.lambda_l1));
  return {total, bce, iou_term, l1_term};
}

LossTerms sample_loss(ParamBinder& bind, const ModelConfig& cfg, const TrainConfig& tcfg,
                      const TrainingSample& sample) {
  Var t_tokens = tokenize(bind, cfg, sample.templ).tokens;
  Var s_tokens = tokenize(bind, cfg, sample.search).tokens;
  Var t_feat = backbone_forward(bind, cfg, t_tokens, sample.templ.grid_h, sample.templ.grid_w);
  Var s_feat = backbone_forward(bind, cfg, s_tokens, sample.search.grid_h, sample.search.grid_w);
  Var fused = siamese_fuse(bind, cfg, t_feat, s_feat);
  return tracking_loss(predict(bind, fused), sample.target, sample.search.grid_h,
                       sample.search.grid_w, tcfg);
}

Var batch_loss(ParamBinder& bind, const ModelConfig& cfg, const TrainConfig& tcfg,
               std::span<const TrainingSample> batch, LossReport* report) {
  if (batch.empty()) throw DimensionError("batch_loss: empty batch");
  std::vector<Var> totals;
  LossReport r;
  for (const auto& sample : batch) {
    LossTerms terms = sample_loss(bind, cfg, tcfg, sample);
    const std::pair<const char*, Var> named[] = {
        {"bce", terms.bce}, {"iou", terms.iou}, {"l1", terms.l1}, {"total", terms.total}};
    for (const auto& [name, v] : named) {
      if (!std::isfinite(v.value()[0])) {
        throw NumericError(std::string("non-finite ") + name + " loss term");
      }
    }
    r.bce += terms.bce.value()[0];
    r.iou += terms.iou.value()[0];
    r.l1 += terms.l1.value()[0];
    totals.push_back(terms.total);
  }
  const double n = static_cast<double>(batch.size());
  Var loss = scale(sum(concat_rows(totals)), 1.0 / n);
  r.bce /= n;
  r.iou /= n;
  r.l1 /= n;
  r.total = loss.value()[0];
  if (report != nullptr) *report = r;
  return loss;
}

void MomentumSgd::step(ParamSet& params, const ParamSet& grads, double lr, double momentum) {
  if (velocity_.size() == 0) velocity_ = params.zeros_like();
  for (auto& entry : params) {
    const Matrix& g = grads.at(entry.name);
    Matrix& v = velocity_.at(entry.name);
    Matrix& p = entry.value;
    require_shape(g.same_shape(p), "MomentumSgd", p, g);
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = momentum * v[i] + g[i];
      p[i] -= lr * v[i];
    }
  }
}

LossReport train_step(std::span<const TrainingSample> batch, ParamSet& params, MomentumSgd& opt,
                      const ModelConfig& cfg, const TrainConfig& tcfg, ParamSet* grads_out) {
  Tape tape;
  ParamBinder bind(tape, params);
  LossReport report;
  Var loss = batch_loss(bind, cfg, tcfg, batch, &report);
  tape.backward(loss);
  ParamSet grads = bind.gradients();
  for (const auto& e : grads) {
    if (!e.value.all_finite()) throw NumericError("non-finite gradient for '" + e.name + "'");
  }
  opt.step(params, grads, tcfg.lr, tcfg.momentum);
  if (grads_out != nullptr) *grads_out = std::move(grads);
  return report;
}

TrainingSample make_training_sample(const SequenceRecord& seq, std::size_t template_frame,
                                    std::size_t search_frame, const ModelConfig& cfg,
                                    const SamplerOptions& opts, std::mt19937_64& rng) {
  if (template_frame >= seq.size() || search_frame >= seq.size()) {
    throw DimensionError("make_training_sample: frame index out of range");
  }
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Box& tb = seq.gt_boxes[template_frame];
  const Box& sb = seq.gt_boxes[search_frame];
  TrainingSample s;
  s.templ = make_crop(seq.frames[template_frame], seq.false_color[template_frame],
                      template_window(tb), cfg.template_size, cfg);
  CropWindow w = search_window(sb);
  w.side *= std::exp(opts.scale_jitter * unit(rng));
  w.cx += opts.center_jitter * w.side * unit(rng);
  w.cy += opts.center_jitter * w.side * unit(rng);
  s.search = make_crop(seq.frames[search_frame], seq.false_color[search_frame], w, cfg.search_size, cfg);
  s.target = box_in_window(sb, w);
  return s;
}

TrainingSample random_training_sample(const SequenceRecord& seq, const ModelConfig& cfg,
                                      const SamplerOptions& opts, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> frame(0, seq.size() - 1);
  const std::size_t t0 = frame(rng);
  const std::size_t t1 = frame(rng);
  return make_training_sample(seq, t0, t1, cfg, opts, rng);
}

std::vector<StepLog> train_model(ParamSet& params, const ModelConfig& cfg, const TrainConfig& tcfg,
                                 std::span<const SequenceRecord> sequences,
                                 const ModalityRegistry& registry, const TrainOptions& opts) {
  cfg.validate();
  if (opts.batch_size == 0 || opts.samples_per_sequence == 0) {
    throw ConfigError("batch_size and samples_per_sequence must be positive");
  }
  if (registry.max_bands() > cfg.bands) {
    throw ConfigError("model holds " + std::to_string(cfg.bands) + " bands but the registry needs " +
                      std::to_string(registry.max_bands()));
  }
  std::vector<std::vector<const SequenceRecord*>> groups(registry.modalities().size());
  for (const auto& seq : sequences) {
    const Modality& m = registry.find(seq.modality.name);
    if (!seq.frames.empty() && seq.frames[0].bands() != m.bands) {
      throw DimensionError("sequence '" + seq.name + "' has " + std::to_string(seq.frames[0].bands()) +
                           " bands, modality " + m.name + " declares " + std::to_string(m.bands));
    }
    const auto idx = static_cast<std::size_t>(&m - registry.modalities().data());
    groups[idx].push_back(&seq);
  }
  std::vector<std::size_t> counts;
  for (const auto& g : groups) counts.push_back(g.size());

  std::mt19937_64 rng(tcfg.seed);
  MomentumSgd opt;
  std::vector<StepLog> log;
  std::vector<TrainingSample> batch;
  auto flush = [&](std::size_t epoch) {
    ParamSet grads;
    StepLog entry{epoch, log.size(), train_step(batch, params, opt, cfg, tcfg, &grads)};
    batch.clear();
    if (opts.on_gradients) opts.on_gradients(grads);
    if (opts.on_step) opts.on_step(entry);
    log.push_back(entry);
    return opts.max_steps != 0 && log.size() >= opts.max_steps;
  };
  for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
    for (const ScheduleItem& item : modality_schedule(counts, tcfg.seed, epoch, opts.schedule)) {
      const SequenceRecord& seq = *groups[item.modality][item.sequence];
      for (std::size_t k = 0; k < opts.samples_per_sequence; ++k) {
        batch.push_back(random_training_sample(seq, cfg, opts.sampler, rng));
        if (batch.size() == opts.batch_size && flush(epoch)) return log;
      }
    }
    if (!batch.empty() && flush(epoch)) return log;
  }
  return log;
}

}  // namespace spectrack
