#include "spectrack/model.hpp"

#include <cmath>

#include "spectrack/error.hpp"

namespace spectrack {

namespace {

std::string block_name(const char* stage, std::size_t i) {
  return std::string(stage) + "." + std::to_string(i);
}

void init_head(ParamSet& params, const std::string& prefix, std::size_t d, std::size_t out,
               std::mt19937_64& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  params.add(prefix + ".w1", random_normal(d, d, s, rng));
  params.add(prefix + ".b1", Matrix(1, d));
  params.add(prefix + ".w2", random_normal(d, out, s, rng));
  params.add(prefix + ".b2", Matrix(1, out));
}

Var head_mlp(ParamBinder& bind, const std::string& p, Var x) {
  Var h = gelu(linear_apply(x, bind(p + ".w1"), bind(p + ".b1")));
  return linear_apply(h, bind(p + ".w2"), bind(p + ".b2"));
}

}  // namespace

void ModelConfig::validate() const {
  if (d < 2) throw ConfigError("d must be at least 2");
  check_heads(d, heads);
  if (patch == 0) throw ConfigError("patch size must be positive");
  if (template_size == 0 || template_size % patch != 0) {
    throw ConfigError("template_size " + std::to_string(template_size) +
                      " is not a positive multiple of the patch size " + std::to_string(patch));
  }
  if (search_size == 0 || search_size % patch != 0) {
    throw ConfigError("search_size " + std::to_string(search_size) +
                      " is not a positive multiple of the patch size " + std::to_string(patch));
  }
  if (bands == 0) throw ConfigError("band count must be positive");
  if (window) {
    if (*window == 0 || template_grid() % *window != 0 || search_grid() % *window != 0) {
      throw ConfigError("window " + std::to_string(*window) + " must divide both token grids (" +
                        std::to_string(template_grid()) + " and " + std::to_string(search_grid()) +
                        ")");
    }
  }
  if (alpha_fixed && !(*alpha_fixed >= 0.0 && *alpha_fixed <= 1.0)) {
    throw ConfigError("alpha_fixed must lie in [0, 1]");
  }
  if (mlp_ratio == 0) throw ConfigError("mlp_ratio must be positive");
}

CropInput prepare_crop(const HsiCube& fc_crop, const HsiCube& hsi_crop, const ModelConfig& cfg) {
  if (fc_crop.bands() != 3) {
    throw DimensionError("false-colour crop must have 3 bands, got " + std::to_string(fc_crop.bands()));
  }
  PatchSet fc = extract_patches(fc_crop, cfg.patch);
  PatchSet hsi = extract_patches(pad_bands(hsi_crop, cfg.bands), cfg.patch);
  if (fc.grid_h != hsi.grid_h || fc.grid_w != hsi.grid_w) {
    throw DimensionError("false-colour and spectral crops differ in size");
  }
  // Centre real pixels on the middle of the reflectance range; padded bands stay exactly zero.
  for (double& v : fc.flat.data()) v -= kPixelCentre;
  const std::size_t real_cols = hsi_crop.bands() * cfg.patch * cfg.patch;
  for (std::size_t r = 0; r < hsi.flat.rows(); ++r)
    for (std::size_t c = 0; c < real_cols; ++c) hsi.flat(r, c) -= kPixelCentre;
  return {std::move(fc.flat), std::move(hsi.flat), fc.grid_h, fc.grid_w};
}

std::string positional_name(std::size_t grid_h, std::size_t grid_w) {
  return "bb.pos." + std::to_string(grid_h) + "x" + std::to_string(grid_w);
}

ParamSet init_model_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  ParamSet params;
  const std::size_t tg = cfg.template_grid(), sg = cfg.search_grid();
  const std::pair<std::size_t, std::size_t> grids[] = {{tg, tg}, {sg, sg}};
  init_tokenizer_params(params, cfg.patch, cfg.d, cfg.bands, grids, rng);

  for (const auto& [gh, gw] : grids) {
    const auto name = positional_name(gh, gw);
    if (!params.contains(name)) params.add(name, Matrix(gh * gw, cfg.d));
  }
  const std::size_t hidden = cfg.d * cfg.mlp_ratio;
  for (std::size_t i = 0; i < cfg.backbone_blocks; ++i)
    init_attention_block(params, block_name("bb", i), cfg.d, hidden, rng);
  params.add("enc.branch.t", Matrix(1, cfg.d));
  params.add("enc.branch.s", Matrix(1, cfg.d));
  for (std::size_t i = 0; i < cfg.encoder_blocks; ++i)
    init_attention_block(params, block_name("enc", i), cfg.d, hidden, rng);
  for (std::size_t i = 0; i < cfg.decoder_blocks; ++i)
    init_attention_block(params, block_name("dec", i), cfg.d, hidden, rng);
  init_head(params, "head.cls", cfg.d, 1, rng);
  init_head(params, "head.box", cfg.d, 4, rng);
  // Offsets start at 1/8, the value for an object centred in a search crop four times its size.
  params.at("head.box.b2").fill(std::log(std::expm1(0.125)));
  return params;
}

FusedTokens tokenize(ParamBinder& bind, const ModelConfig& cfg, const CropInput& crop) {
  Tape& tape = bind.tape();
  if (cfg.alpha_fixed && *cfg.alpha_fixed == 1.0) {
    return {embed_patches(tape.constant(crop.fc), bind(tok::kEmbedFc), bind(tok::kBiasFc)), {}};
  }
  if (cfg.alpha_fixed && *cfg.alpha_fixed == 0.0) {
    return {embed_patches(tape.constant(crop.hsi), bind(tok::kEmbedHsi), bind(tok::kBiasHsi)), {}};
  }
  Var z_fc = embed_patches(tape.constant(crop.fc), bind(tok::kEmbedFc), bind(tok::kBiasFc));
  Var z_hsi = embed_patches(tape.constant(crop.hsi), bind(tok::kEmbedHsi), bind(tok::kBiasHsi));
  if (cfg.alpha_fixed) {
    Var alpha = tape.constant(Matrix(z_fc.rows(), 1, *cfg.alpha_fixed));
    return {fuse_tokens(z_fc, z_hsi, alpha), {}};
  }
  Var alpha = cfg.gate_mode == GateMode::content
                  ? content_alpha(z_fc, z_hsi, bind(tok::kGateW), bind(tok::kGateB))
                  : positional_alpha(bind(tok::gate_logits_name(crop.grid_h, crop.grid_w)));
  return {fuse_tokens(z_fc, z_hsi, alpha), alpha};
}

Var backbone_forward(ParamBinder& bind, const ModelConfig& cfg, Var tokens, std::size_t grid_h,
                     std::size_t grid_w) {
  if (tokens.rows() != grid_h * grid_w) {
    throw DimensionError("backbone: " + std::to_string(tokens.rows()) + " tokens for a " +
                         std::to_string(grid_h) + "x" + std::to_string(grid_w) + " grid");
  }
  Var x = add(tokens, bind(positional_name(grid_h, grid_w)));
  const AttentionOptions opt{cfg.heads, cfg.window, grid_h, grid_w};
  for (std::size_t i = 0; i < cfg.backbone_blocks; ++i) x = attention_block(bind, block_name("bb", i), x, opt);
  return x;
}

Var siamese_encode(ParamBinder& bind, const ModelConfig& cfg, Var template_feat, Var search_feat) {
  if (template_feat.cols() != search_feat.cols()) {
    throw DimensionError("siamese_fuse: template width " + std::to_string(template_feat.cols()) +
                         " vs search width " + std::to_string(search_feat.cols()));
  }
  const Var parts[] = {add_row(template_feat, bind("enc.branch.t")),
                       add_row(search_feat, bind("enc.branch.s"))};
  Var x = concat_rows(parts);
  const AttentionOptions opt{cfg.heads, std::nullopt, 0, 0};
  for (std::size_t i = 0; i < cfg.encoder_blocks; ++i) x = attention_block(bind, block_name("enc", i), x, opt);
  return x;
}

Var siamese_fuse(ParamBinder& bind, const ModelConfig& cfg, Var template_feat, Var search_feat) {
  Var x = siamese_encode(bind, cfg, template_feat, search_feat);
  Var q = slice_rows(x, template_feat.rows(), search_feat.rows());
  for (std::size_t i = 0; i < cfg.decoder_blocks; ++i)
    q = cross_attention_block(bind, block_name("dec", i), q, x, cfg.heads);
  return q;
}

HeadOutput predict(ParamBinder& bind, Var fused) {
  return {head_mlp(bind, "head.cls", fused), softplus(head_mlp(bind, "head.box", fused))};
}

std::array<double, 4> decode_box(const BoxPrediction& pred, std::size_t cell,
                                 std::size_t search_size) {
  if (cell >= pred.grid_h * pred.grid_w) throw DimensionError("decode_box: cell out of range");
  const double s = static_cast<double>(search_size);
  const double cell_w = s / static_cast<double>(pred.grid_w);
  const double cell_h = s / static_cast<double>(pred.grid_h);
  const double xc = (static_cast<double>(cell % pred.grid_w) + 0.5) * cell_w;
  const double yc = (static_cast<double>(cell / pred.grid_w) + 0.5) * cell_h;
  const auto o = pred.offsets.row(cell);
  return {xc - o[0] * s, yc - o[1] * s, xc + o[2] * s, yc + o[3] * s};
}

TrackModel::TrackModel(ModelConfig cfg, ParamSet params) : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
}

TokenGrid TrackModel::encode_template(const CropInput& templ) const {
  Tape tape;
  ParamBinder bind(tape, params_, /*trainable=*/false);
  Var tokens = tokenize(bind, cfg_, templ).tokens;
  Var feat = backbone_forward(bind, cfg_, tokens, templ.grid_h, templ.grid_w);
  return {feat.value(), templ.grid_h, templ.grid_w};
}

BoxPrediction TrackModel::predict_search(const TokenGrid& template_feat,
                                         const CropInput& search) const {
  Tape tape;
  ParamBinder bind(tape, params_, /*trainable=*/false);
  Var tokens = tokenize(bind, cfg_, search).tokens;
  Var feat = backbone_forward(bind, cfg_, tokens, search.grid_h, search.grid_w);
  Var fused = siamese_fuse(bind, cfg_, tape.constant(template_feat.tokens), feat);
  HeadOutput head = predict(bind, fused);
  BoxPrediction out;
  out.grid_h = search.grid_h;
  out.grid_w = search.grid_w;
  out.cls = Matrix(search.grid_h, search.grid_w);
  const Matrix& logits = head.logits.value();
  for (std::size_t i = 0; i < logits.rows(); ++i) out.cls[i] = sigmoid(logits[i]);
  out.offsets = head.offsets.value();
  return out;
}

Matrix TrackModel::alpha(const CropInput& crop) const {
  Tape tape;
  ParamBinder bind(tape, params_, /*trainable=*/false);
  FusedTokens fused = tokenize(bind, cfg_, crop);
  if (fused.alpha) return fused.alpha->value();
  return Matrix(crop.grid_h * crop.grid_w, 1, *cfg_.alpha_fixed);
}

}  // namespace spectrack
