#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <utility>

#include "spectrack/cube.hpp"
#include "spectrack/ops.hpp"
#include "spectrack/params.hpp"

namespace spectrack {

/// Non-overlapping P×P patches of a C-channel image, one flattened patch per
/// row of `flat`. Flatten order inside a row is channel-major, then patch
/// row, then patch column: entry (c·P + y)·P + x.
struct PatchSet {
  Matrix flat;
  std::size_t channels = 0;
  std::size_t patch_size = 0;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;

  std::size_t count() const noexcept { return grid_h * grid_w; }
};

struct TokenGrid {
  Matrix tokens;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
};

/// Patches in row-major grid order. Throws DimensionError naming H, W and P
/// when either side is not a multiple of P.
PatchSet extract_patches(const HsiCube& cube, std::size_t patch_size);
/// Inverse of extract_patches.
HsiCube assemble_patches(const PatchSet& patches);

/// token_i = Eᵀ·flatten(patch_i) + b, with E: (C·P²)×d and b: 1×d.
TokenGrid embed_patches(const PatchSet& patches, const Matrix& embedding, const Matrix& bias);
Var embed_patches(Var flat_patches, Var embedding, Var bias);

enum class GateMode { content, positional };

const char* to_string(GateMode mode) noexcept;
GateMode parse_gate_mode(const std::string& text);

/// Value-level view of the tokenizer parameters. In content mode
/// alpha_i = sigmoid(gate_wᵀ·[z_fc,i ; z_hsi,i] + gate_b) with gate_w: (2d)×1
/// and gate_b: 1×1; in positional mode alpha_i = sigmoid(gate_logits_i) with
/// gate_logits: M×1.
struct FusionParams {
  Matrix e_fc, b_fc;
  Matrix e_hsi, b_hsi;
  GateMode mode = GateMode::content;
  Matrix gate_w, gate_b;
  Matrix gate_logits;
};

/// M×1 blend weights in (0, 1).
Matrix compute_alpha(const TokenGrid& z_fc, const TokenGrid& z_hsi, const FusionParams& params);
Var content_alpha(Var z_fc, Var z_hsi, Var gate_w, Var gate_b);
Var positional_alpha(Var logits);

/// alpha_i·z_fc,i + (1 − alpha_i)·z_hsi,i. Throws DomainError if alpha leaves [0, 1].
TokenGrid fuse_tokens(const TokenGrid& z_fc, const TokenGrid& z_hsi, const Matrix& alpha);

/// Spreads a 3-channel patch embedding over `bands` bands. Band b copies the
/// rows of channel b mod 3, divided by how many bands share that channel, so
/// an input whose band b equals RGB channel b mod 3 embeds exactly as the RGB
/// image does.
Matrix inflate_embedding(const Matrix& rgb_embedding, std::size_t bands);

/// Parameter names under the `tok.` prefix.
namespace tok {
inline constexpr const char* kEmbedFc = "tok.E_fc";
inline constexpr const char* kBiasFc = "tok.b_fc";
inline constexpr const char* kEmbedHsi = "tok.E_hsi";
inline constexpr const char* kBiasHsi = "tok.b_hsi";
inline constexpr const char* kGateW = "tok.gate.w";
inline constexpr const char* kGateB = "tok.gate.b";
std::string gate_logits_name(std::size_t grid_h, std::size_t grid_w);
}  // namespace tok

/// Initial gate logit: fusion starts leaning on the false-colour tokens.
inline constexpr double kGateLogitInit = 2.0;

/// Registers E_fc (Gaussian, std 1/sqrt(3P²)), E_hsi inflated from E_fc to
/// `bands` and zero biases. The gate weights start at zero and every gate
/// logit (content bias or positional entry) at kGateLogitInit; positional
/// logits are added for every listed grid.
void init_tokenizer_params(ParamSet& params, std::size_t patch_size, std::size_t d,
                           std::size_t bands, std::span<const std::pair<std::size_t, std::size_t>> grids,
                           std::mt19937_64& rng);

}  // namespace spectrack
