#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spectrack/model.hpp"
#include "spectrack/synthetic.hpp"
#include "spectrack/train.hpp"

namespace spectrack {

/// Everything a training or evaluation run reads from its JSON config.
///
/// ```json
/// {
///   "model": {"d": 32, "heads": 4, "backbone_blocks": 1, "encoder_blocks": 1,
///             "decoder_blocks": 1, "window": null, "template_size": 64,
///             "search_size": 128, "lr": 0.01, "momentum": 0.9, "epochs": 2,
///             "seed": 0, "gate_mode": "content", "lambda_iou": 2, "lambda_l1": 5},
///   "modalities": [{"name": "VIS", "bands": 16}],
///   "data": {"train": ["data/train"], "test": ["data/test"]},
///   "schedule": "round_robin",
///   "batch_size": 4,
///   "samples_per_sequence": 8,
///   "max_steps": 0,
///   "alpha_fixed": null,
///   "output_dir": "runs/demo"
/// }
/// ```
/// Every key is optional; unknown keys raise ConfigError naming the key.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  ModalityRegistry registry = ModalityRegistry::hot2024();
  std::vector<std::filesystem::path> train_data;
  std::vector<std::filesystem::path> test_data;
  TrainOptions options;
  std::filesystem::path output_dir = ".";
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical JSON form; parse_run_config(run_config_to_json(c)) round-trips.
nlohmann::json run_config_to_json(const RunConfig& cfg);

/// Model hyperparameters as stored in checkpoint metadata.
nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& doc);

SceneSpec parse_scene_spec(const nlohmann::json& doc);
nlohmann::json scene_spec_to_json(const SceneSpec& spec);

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text) noexcept;
/// Hash of the canonical dump of `doc`, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

}  // namespace spectrack
