#include "spectrack/tokenizer.hpp"

#include <cmath>

#include "spectrack/error.hpp"

namespace spectrack {

PatchSet extract_patches(const HsiCube& cube, std::size_t patch_size) {
  const std::size_t h = cube.height(), w = cube.width(), p = patch_size;
  if (p == 0 || h % p != 0 || w % p != 0 || h == 0 || w == 0) {
    throw DimensionError("extract_patches: image " + std::to_string(h) + "x" + std::to_string(w) +
                         " (H=" + std::to_string(h) + ", W=" + std::to_string(w) +
                         ") is not tiled by patches of P=" + std::to_string(p));
  }
  PatchSet ps;
  ps.channels = cube.bands();
  ps.patch_size = p;
  ps.grid_h = h / p;
  ps.grid_w = w / p;
  ps.flat = Matrix(ps.count(), ps.channels * p * p);
  for (std::size_t gy = 0; gy < ps.grid_h; ++gy) {
    for (std::size_t gx = 0; gx < ps.grid_w; ++gx) {
      auto row = ps.flat.row(gy * ps.grid_w + gx);
      std::size_t k = 0;
      for (std::size_t c = 0; c < ps.channels; ++c)
        for (std::size_t y = 0; y < p; ++y)
          for (std::size_t x = 0; x < p; ++x) row[k++] = cube.at(c, gy * p + y, gx * p + x);
    }
  }
  return ps;
}

HsiCube assemble_patches(const PatchSet& ps) {
  const std::size_t p = ps.patch_size;
  HsiCube cube(ps.channels, ps.grid_h * p, ps.grid_w * p);
  for (std::size_t gy = 0; gy < ps.grid_h; ++gy) {
    for (std::size_t gx = 0; gx < ps.grid_w; ++gx) {
      auto row = ps.flat.row(gy * ps.grid_w + gx);
      std::size_t k = 0;
      for (std::size_t c = 0; c < ps.channels; ++c)
        for (std::size_t y = 0; y < p; ++y)
          for (std::size_t x = 0; x < p; ++x)
            cube.at(c, gy * p + y, gx * p + x) = static_cast<float>(row[k++]);
    }
  }
  return cube;
}

Var embed_patches(Var flat_patches, Var embedding, Var bias) {
  if (flat_patches.cols() != embedding.rows()) {
    throw DimensionError("embed_patches: patches have " + std::to_string(flat_patches.cols()) +
                         " values but the embedding expects " + std::to_string(embedding.rows()) +
                         " (" + flat_patches.value().shape_str() + " vs " +
                         embedding.value().shape_str() + ")");
  }
  return linear_apply(flat_patches, embedding, bias);
}

TokenGrid embed_patches(const PatchSet& patches, const Matrix& embedding, const Matrix& bias) {
  Tape tape;
  Var out = embed_patches(tape.constant(patches.flat), tape.constant(embedding), tape.constant(bias));
  return {out.value(), patches.grid_h, patches.grid_w};
}

const char* to_string(GateMode mode) noexcept {
  return mode == GateMode::content ? "content" : "positional";
}

GateMode parse_gate_mode(const std::string& text) {
  if (text == "content") return GateMode::content;
  if (text == "positional") return GateMode::positional;
  throw ConfigError("gate_mode must be 'content' or 'positional', got '" + text + "'");
}

Var content_alpha(Var z_fc, Var z_hsi, Var gate_w, Var gate_b) {
  if (z_fc.rows() != z_hsi.rows() || z_fc.cols() != z_hsi.cols()) {
    throw DimensionError("compute_alpha: token grids differ, " + z_fc.value().shape_str() + " vs " +
                         z_hsi.value().shape_str());
  }
  const Var parts[] = {z_fc, z_hsi};
  return sigmoid(linear_apply(concat_cols(parts), gate_w, gate_b));
}

Var positional_alpha(Var logits) { return sigmoid(logits); }

Matrix compute_alpha(const TokenGrid& z_fc, const TokenGrid& z_hsi, const FusionParams& params) {
  if (z_fc.grid_h != z_hsi.grid_h || z_fc.grid_w != z_hsi.grid_w ||
      !z_fc.tokens.same_shape(z_hsi.tokens)) {
    throw DimensionError("compute_alpha: token grids differ, " + z_fc.tokens.shape_str() + " vs " +
                         z_hsi.tokens.shape_str());
  }
  Tape tape;
  if (params.mode == GateMode::content) {
    return content_alpha(tape.constant(z_fc.tokens), tape.constant(z_hsi.tokens),
                         tape.constant(params.gate_w), tape.constant(params.gate_b))
        .value();
  }
  if (params.gate_logits.rows() != z_fc.tokens.rows() || params.gate_logits.cols() != 1) {
    throw DimensionError("compute_alpha: positional logits " + params.gate_logits.shape_str() +
                         " do not match " + std::to_string(z_fc.tokens.rows()) + " tokens");
  }
  return positional_alpha(tape.constant(params.gate_logits)).value();
}

TokenGrid fuse_tokens(const TokenGrid& z_fc, const TokenGrid& z_hsi, const Matrix& alpha) {
  Tape tape;
  Var out = fuse_tokens(tape.constant(z_fc.tokens), tape.constant(z_hsi.tokens), tape.constant(alpha));
  return {out.value(), z_fc.grid_h, z_fc.grid_w};
}

Matrix inflate_embedding(const Matrix& rgb_embedding, std::size_t bands) {
  if (bands == 0) throw DomainError("inflate_embedding: need at least one band");
  if (rgb_embedding.rows() % 3 != 0) {
    throw DimensionError("inflate_embedding: " + rgb_embedding.shape_str() +
                         " does not split into 3 channel blocks");
  }
  const std::size_t per_channel = rgb_embedding.rows() / 3;
  const std::size_t d = rgb_embedding.cols();
  std::size_t share[3] = {0, 0, 0};
  for (std::size_t b = 0; b < bands; ++b) ++share[b % 3];
  Matrix out(bands * per_channel, d);
  for (std::size_t b = 0; b < bands; ++b) {
    const std::size_t src = b % 3;
    const double inv = 1.0 / static_cast<double>(share[src]);
    for (std::size_t r = 0; r < per_channel; ++r) {
      const auto from = rgb_embedding.row(src * per_channel + r);
      auto to = out.row(b * per_channel + r);
      for (std::size_t j = 0; j < d; ++j) to[j] = from[j] * inv;
    }
  }
  return out;
}

namespace tok {
std::string gate_logits_name(std::size_t grid_h, std::size_t grid_w) {
  return "tok.gate.logits." + std::to_string(grid_h) + "x" + std::to_string(grid_w);
}
}  // namespace tok

void init_tokenizer_params(ParamSet& params, std::size_t patch_size, std::size_t d,
                           std::size_t bands,
                           std::span<const std::pair<std::size_t, std::size_t>> grids,
                           std::mt19937_64& rng) {
  const std::size_t fan_in = 3 * patch_size * patch_size;
  Matrix e_fc = random_normal(fan_in, d, 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
  params.add(tok::kEmbedHsi, inflate_embedding(e_fc, bands));
  params.add(tok::kBiasHsi, Matrix(1, d));
  params.add(tok::kEmbedFc, std::move(e_fc));
  params.add(tok::kBiasFc, Matrix(1, d));
  params.add(tok::kGateW, Matrix(2 * d, 1));
  params.add(tok::kGateB, Matrix(1, 1, kGateLogitInit));
  for (const auto& [gh, gw] : grids) {
    const auto name = tok::gate_logits_name(gh, gw);
    if (!params.contains(name)) params.add(name, Matrix(gh * gw, 1, kGateLogitInit));
  }
}

}  // namespace spectrack
