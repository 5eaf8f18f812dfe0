#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "spectrack/attention.hpp"
#include "spectrack/cube.hpp"
#include "spectrack/tokenizer.hpp"

namespace spectrack {

struct ModelConfig {
  std::size_t d = 96;
  std::size_t heads = 4;
  std::size_t backbone_blocks = 2;
  std::size_t encoder_blocks = 1;
  std::size_t decoder_blocks = 1;
  std::optional<std::size_t> window;
  std::size_t template_size = 64;
  std::size_t search_size = 128;
  std::size_t patch = 16;
  /// Common band count every spectral crop is zero-padded to.
  std::size_t bands = 25;
  GateMode gate_mode = GateMode::content;
  /// Replaces the learned gate with a constant; 1 is spatial-only, 0 spectral-only.
  std::optional<double> alpha_fixed;
  std::size_t mlp_ratio = 4;

  std::size_t template_grid() const noexcept { return template_size / patch; }
  std::size_t search_grid() const noexcept { return search_size / patch; }
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

/// Flattened patches of one crop, ready for the two embeddings.
struct CropInput {
  Matrix fc;   // M × 3P²
  Matrix hsi;  // M × bands·P²
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
};

/// Subtracted from every real pixel value before embedding.
inline constexpr double kPixelCentre = 0.5;

/// Pads the spectral crop to `cfg.bands`, patches both crops and centres the
/// real pixel values.
CropInput prepare_crop(const HsiCube& fc_crop, const HsiCube& hsi_crop, const ModelConfig& cfg);

ParamSet init_model_params(const ModelConfig& cfg, std::uint64_t seed);

struct FusedTokens {
  Var tokens;
  /// M×1 blend weights; absent when alpha is fixed.
  std::optional<Var> alpha;
};

/// Both embeddings and the gated blend. With alpha fixed at exactly 1 (or 0)
/// only the false-colour (or spectral) branch is evaluated.
FusedTokens tokenize(ParamBinder& bind, const ModelConfig& cfg, const CropInput& crop);

/// Adds the grid's learned positional embedding, then runs the backbone blocks.
Var backbone_forward(ParamBinder& bind, const ModelConfig& cfg, Var tokens, std::size_t grid_h,
                     std::size_t grid_w);

/// Encoder over [template; search] with branch-identity embeddings added.
Var siamese_encode(ParamBinder& bind, const ModelConfig& cfg, Var template_feat, Var search_feat);

/// Encoder over [template; search] with branch-identity embeddings, then
/// decoder cross-attention from the search slice into the encoded sequence.
/// Returns one token per search cell.
Var siamese_fuse(ParamBinder& bind, const ModelConfig& cfg, Var template_feat, Var search_feat);

struct HeadOutput {
  Var logits;   // M×1
  Var offsets;  // M×4, softplus (l, t, r, b) as fractions of the search size
};
HeadOutput predict(ParamBinder& bind, Var fused);

/// Head output for one search crop, as plain values.
struct BoxPrediction {
  Matrix cls;      // grid_h × grid_w scores in [0, 1]
  Matrix offsets;  // (grid_h·grid_w) × 4
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
};

/// Corners (x1, y1, x2, y2) in search-crop pixels for the given cell:
/// [x_j − l·S, y_i − t·S, x_j + r·S, y_i + b·S] around the cell centre.
std::array<double, 4> decode_box(const BoxPrediction& pred, std::size_t cell,
                                 std::size_t search_size);

std::string positional_name(std::size_t grid_h, std::size_t grid_w);

/// Inference wrapper around a parameter set.
class TrackModel {
 public:
  TrackModel(ModelConfig cfg, ParamSet params);

  const ModelConfig& config() const noexcept { return cfg_; }
  const ParamSet& params() const noexcept { return params_; }

  TokenGrid encode_template(const CropInput& templ) const;
  BoxPrediction predict_search(const TokenGrid& template_feat, const CropInput& search) const;
  /// Blend weights the gate produces for a crop (constant when alpha is fixed).
  Matrix alpha(const CropInput& crop) const;

 private:
  ModelConfig cfg_;
  ParamSet params_;
};

}  // namespace spectrack
