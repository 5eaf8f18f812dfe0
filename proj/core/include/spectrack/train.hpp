#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "spectrack/schedule.hpp"
#include "spectrack/tracker.hpp"

namespace spectrack {

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  double lambda_iou = 2.0;
  double lambda_l1 = 5.0;
};

/// One (template, search, target) triple. `target` holds the ground-truth
/// corners inside the search crop as fractions of its side.
struct TrainingSample {
  CropInput templ;
  CropInput search;
  std::array<double, 4> target{};
};

struct LossReport {
  double total = 0.0;
  double bce = 0.0;
  double iou = 0.0;
  double l1 = 0.0;
};

/// Grid cell whose centre is nearest the target centre.
std::size_t positive_cell(const std::array<double, 4>& target, std::size_t grid_h,
                          std::size_t grid_w);

struct LossTerms {
  Var total, bce, iou, l1;
};

/// Class-balanced BCE over every cell against a one-hot map at the positive
/// cell (the positive and the negatives each carry half the weight), plus
/// lambda_iou·(1 − IoU) and lambda_l1·L1 on the box decoded at that cell.
LossTerms tracking_loss(const HeadOutput& head, const std::array<double, 4>& target,
                        std::size_t grid_h, std::size_t grid_w, const TrainConfig& tcfg);

/// Full forward pass for one sample (both towers share every parameter).
LossTerms sample_loss(ParamBinder& bind, const ModelConfig& cfg, const TrainConfig& tcfg,
                      const TrainingSample& sample);

/// Mean loss over the batch. Throws NumericError naming the first
/// non-finite term.
Var batch_loss(ParamBinder& bind, const ModelConfig& cfg, const TrainConfig& tcfg,
               std::span<const TrainingSample> batch, LossReport* report = nullptr);

/// Heavy-ball SGD: v ← μ·v + g, p ← p − lr·v.
class MomentumSgd {
 public:
  void step(ParamSet& params, const ParamSet& grads, double lr, double momentum);
  const ParamSet& velocity() const noexcept { return velocity_; }

 private:
  ParamSet velocity_;
};

/// One optimiser update; returns the loss before the update. `grads_out`
/// receives the gradients when given.
LossReport train_step(std::span<const TrainingSample> batch, ParamSet& params, MomentumSgd& opt,
                      const ModelConfig& cfg, const TrainConfig& tcfg,
                      ParamSet* grads_out = nullptr);

struct SamplerOptions {
  /// Search-centre jitter per axis, as a fraction of the search side.
  double center_jitter = 0.25;
  /// Log-uniform scale jitter of the search side.
  double scale_jitter = 0.3;
};

TrainingSample make_training_sample(const SequenceRecord& seq, std::size_t template_frame,
                                    std::size_t search_frame, const ModelConfig& cfg,
                                    const SamplerOptions& opts, std::mt19937_64& rng);
TrainingSample random_training_sample(const SequenceRecord& seq, const ModelConfig& cfg,
                                      const SamplerOptions& opts, std::mt19937_64& rng);

struct StepLog {
  std::size_t epoch = 0;
  std::size_t step = 0;
  LossReport loss;
};

struct TrainOptions {
  std::size_t batch_size = 4;
  std::size_t samples_per_sequence = 8;
  ScheduleMode schedule = ScheduleMode::round_robin;
  SamplerOptions sampler;
  /// Stop after this many updates; 0 runs every epoch to the end.
  std::size_t max_steps = 0;
  std::function<void(const StepLog&)> on_step;
  /// Called with the gradients of every step.
  std::function<void(const ParamSet&)> on_gradients;
};

/// Cross-modality training: each epoch walks the modality schedule, draws
/// `samples_per_sequence` samples per visited sequence, zero-pads every
/// spectral crop to the registry's widest modality and updates once per
/// full batch.
std::vector<StepLog> train_model(ParamSet& params, const ModelConfig& cfg, const TrainConfig& tcfg,
                                 std::span<const SequenceRecord> sequences,
                                 const ModalityRegistry& registry, const TrainOptions& opts);

}  // namespace spectrack
