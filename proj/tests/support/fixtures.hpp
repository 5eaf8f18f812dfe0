#pragma once

#include <cstdint>
#include <random>

#include "spectrack/model.hpp"

namespace fixture {

/// Smallest configuration the tests train: d=16, 64² template, 128² search.
inline spectrack::ModelConfig desk_config(std::size_t bands = 25) {
  spectrack::ModelConfig cfg;
  cfg.d = 16;
  cfg.heads = 2;
  cfg.backbone_blocks = 1;
  cfg.encoder_blocks = 1;
  cfg.decoder_blocks = 1;
  cfg.template_size = 64;
  cfg.search_size = 128;
  cfg.patch = 16;
  cfg.bands = bands;
  cfg.mlp_ratio = 2;
  return cfg;
}

inline spectrack::HsiCube random_cube(std::size_t bands, std::size_t h, std::size_t w,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  spectrack::HsiCube cube(bands, h, w);
  for (auto& v : cube.data()) v = u(rng);
  return cube;
}

/// Random false-colour and spectral crops of side `size`, `used` real bands.
inline spectrack::CropInput random_crop(const spectrack::ModelConfig& cfg, std::size_t size,
                                        std::size_t used, std::mt19937_64& rng) {
  return spectrack::prepare_crop(random_cube(3, size, size, rng), random_cube(used, size, size, rng),
                                 cfg);
}

}  // namespace fixture
