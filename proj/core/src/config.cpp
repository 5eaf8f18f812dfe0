#include "spectrack/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "spectrack/error.hpp"

namespace spectrack {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("invalid value for '" + where + key + "'");
  }
}

std::size_t read_positive(const json& obj, const char* key, std::size_t fallback,
                          const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw ConfigError("'" + where + key + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

std::vector<std::filesystem::path> read_paths(const json& v, const std::string& key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ConfigError("'" + key + "' must be a path or a list of paths");
  std::vector<std::filesystem::path> out;
  for (const auto& p : v) {
    if (!p.is_string()) throw ConfigError("'" + key + "' entries must be strings");
    out.emplace_back(p.get<std::string>());
  }
  return out;
}

ScheduleMode parse_schedule(const json& v) {
  const std::string s = v.is_string() ? v.get<std::string>() : "";
  if (s == "round_robin") return ScheduleMode::round_robin;
  if (s == "blocked") return ScheduleMode::blocked;
  throw ConfigError("'schedule' must be \"round_robin\" or \"blocked\"");
}

}  // namespace

json model_config_to_json(const ModelConfig& cfg) {
  json j = {{"d", cfg.d},
            {"heads", cfg.heads},
            {"backbone_blocks", cfg.backbone_blocks},
            {"encoder_blocks", cfg.encoder_blocks},
            {"decoder_blocks", cfg.decoder_blocks},
            {"window", cfg.window ? json(*cfg.window) : json(nullptr)},
            {"template_size", cfg.template_size},
            {"search_size", cfg.search_size},
            {"patch", cfg.patch},
            {"bands", cfg.bands},
            {"gate_mode", to_string(cfg.gate_mode)},
            {"alpha_fixed", cfg.alpha_fixed ? json(*cfg.alpha_fixed) : json(nullptr)},
            {"mlp_ratio", cfg.mlp_ratio}};
  return j;
}

ModelConfig model_config_from_json(const json& doc) {
  reject_unknown(doc,
                 {"d", "heads", "backbone_blocks", "encoder_blocks", "decoder_blocks", "window",
                  "template_size", "search_size", "patch", "bands", "gate_mode", "alpha_fixed",
                  "mlp_ratio"},
                 "model");
  ModelConfig cfg;
  const std::string w = "model.";
  cfg.d = read_positive(doc, "d", cfg.d, w);
  cfg.heads = read_positive(doc, "heads", cfg.heads, w);
  read(doc, "backbone_blocks", cfg.backbone_blocks, w);
  read(doc, "encoder_blocks", cfg.encoder_blocks, w);
  read(doc, "decoder_blocks", cfg.decoder_blocks, w);
  if (doc.contains("window") && !doc["window"].is_null()) {
    cfg.window = read_positive(doc, "window", 1, w);
  }
  cfg.template_size = read_positive(doc, "template_size", cfg.template_size, w);
  cfg.search_size = read_positive(doc, "search_size", cfg.search_size, w);
  cfg.patch = read_positive(doc, "patch", cfg.patch, w);
  cfg.bands = read_positive(doc, "bands", cfg.bands, w);
  cfg.mlp_ratio = read_positive(doc, "mlp_ratio", cfg.mlp_ratio, w);
  if (doc.contains("gate_mode")) {
    std::string mode;
    read(doc, "gate_mode", mode, w);
    cfg.gate_mode = parse_gate_mode(mode);
  }
  if (doc.contains("alpha_fixed") && !doc["alpha_fixed"].is_null()) {
    double a = 0.0;
    read(doc, "alpha_fixed", a, w);
    cfg.alpha_fixed = a;
  }
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config(const json& doc) {
  reject_unknown(doc,
                 {"model", "modalities", "data", "schedule", "batch_size", "samples_per_sequence",
                  "max_steps", "alpha_fixed", "output_dir"},
                 "");
  RunConfig rc;
  if (doc.contains("modalities")) {
    const json& mods = doc["modalities"];
    if (!mods.is_array() || mods.empty()) throw ConfigError("'modalities' must be a non-empty list");
    std::vector<Modality> list;
    for (const auto& m : mods) {
      reject_unknown(m, {"name", "bands"}, "modalities[]");
      if (!m.contains("name") || !m["name"].is_string()) throw ConfigError("'modalities[].name' is required");
      list.push_back({m["name"].get<std::string>(), read_positive(m, "bands", 0, "modalities[].")});
      if (list.back().bands == 0) throw ConfigError("'modalities[].bands' is required");
    }
    rc.registry = ModalityRegistry(std::move(list));
  }
  rc.model.bands = rc.registry.max_bands();

  if (doc.contains("model")) {
    const json& m = doc["model"];
    reject_unknown(m,
                   {"d", "heads", "backbone_blocks", "encoder_blocks", "decoder_blocks", "window",
                    "template_size", "search_size", "lr", "momentum", "epochs", "seed", "gate_mode",
                    "lambda_iou", "lambda_l1"},
                   "model");
    const std::string w = "model.";
    rc.model.d = read_positive(m, "d", rc.model.d, w);
    rc.model.heads = read_positive(m, "heads", rc.model.heads, w);
    read(m, "backbone_blocks", rc.model.backbone_blocks, w);
    read(m, "encoder_blocks", rc.model.encoder_blocks, w);
    read(m, "decoder_blocks", rc.model.decoder_blocks, w);
    if (m.contains("window") && !m["window"].is_null()) rc.model.window = read_positive(m, "window", 1, w);
    rc.model.template_size = read_positive(m, "template_size", rc.model.template_size, w);
    rc.model.search_size = read_positive(m, "search_size", rc.model.search_size, w);
    read(m, "lr", rc.train.lr, w);
    read(m, "momentum", rc.train.momentum, w);
    read(m, "epochs", rc.train.epochs, w);
    read(m, "seed", rc.train.seed, w);
    read(m, "lambda_iou", rc.train.lambda_iou, w);
    read(m, "lambda_l1", rc.train.lambda_l1, w);
    if (m.contains("gate_mode")) {
      if (!m["gate_mode"].is_string()) throw ConfigError("invalid value for 'model.gate_mode'");
      try {
        rc.model.gate_mode = parse_gate_mode(m["gate_mode"].get<std::string>());
      } catch (const Error&) {
        throw ConfigError("invalid value for 'model.gate_mode'");
      }
    }
    if (!(rc.train.lr > 0.0)) throw ConfigError("'model.lr' must be positive");
    if (rc.train.momentum < 0.0 || rc.train.momentum >= 1.0) {
      throw ConfigError("'model.momentum' must lie in [0, 1)");
    }
  }
  if (doc.contains("alpha_fixed") && !doc["alpha_fixed"].is_null()) {
    double a = 0.0;
    read(doc, "alpha_fixed", a, "");
    rc.model.alpha_fixed = a;
  }
  if (doc.contains("data")) {
    const json& d = doc["data"];
    reject_unknown(d, {"train", "test"}, "data");
    if (d.contains("train")) rc.train_data = read_paths(d["train"], "data.train");
    if (d.contains("test")) rc.test_data = read_paths(d["test"], "data.test");
  }
  if (doc.contains("schedule")) rc.options.schedule = parse_schedule(doc["schedule"]);
  rc.options.batch_size = read_positive(doc, "batch_size", rc.options.batch_size, "");
  rc.options.samples_per_sequence =
      read_positive(doc, "samples_per_sequence", rc.options.samples_per_sequence, "");
  read(doc, "max_steps", rc.options.max_steps, "");
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ConfigError("'output_dir' must be a string");
    rc.output_dir = doc["output_dir"].get<std::string>();
  }
  try {
    rc.model.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json run_config_to_json(const RunConfig& cfg) {
  json mods = json::array();
  for (const auto& m : cfg.registry.modalities()) mods.push_back({{"name", m.name}, {"bands", m.bands}});
  auto paths = [](const std::vector<std::filesystem::path>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back(p.generic_string());
    return a;
  };
  const ModelConfig& m = cfg.model;
  return {{"model",
           {{"d", m.d},
            {"heads", m.heads},
            {"backbone_blocks", m.backbone_blocks},
            {"encoder_blocks", m.encoder_blocks},
            {"decoder_blocks", m.decoder_blocks},
            {"window", m.window ? json(*m.window) : json(nullptr)},
            {"template_size", m.template_size},
            {"search_size", m.search_size},
            {"lr", cfg.train.lr},
            {"momentum", cfg.train.momentum},
            {"epochs", cfg.train.epochs},
            {"seed", cfg.train.seed},
            {"gate_mode", to_string(m.gate_mode)},
            {"lambda_iou", cfg.train.lambda_iou},
            {"lambda_l1", cfg.train.lambda_l1}}},
          {"modalities", mods},
          {"data", {{"train", paths(cfg.train_data)}, {"test", paths(cfg.test_data)}}},
          {"schedule", cfg.options.schedule == ScheduleMode::blocked ? "blocked" : "round_robin"},
          {"batch_size", cfg.options.batch_size},
          {"samples_per_sequence", cfg.options.samples_per_sequence},
          {"max_steps", cfg.options.max_steps},
          {"alpha_fixed", m.alpha_fixed ? json(*m.alpha_fixed) : json(nullptr)},
          {"output_dir", cfg.output_dir.generic_string()}};
}

SceneSpec parse_scene_spec(const json& doc) {
  reject_unknown(doc,
                 {"name", "height", "width", "frames", "modality", "noise_sigma", "object_size",
                  "max_speed", "amplitude", "period", "distractor", "ambiguity",
                  "distractor_amplitude", "distractor_period", "target_signature",
                  "distractor_signature", "background_signature"},
                 "scene");
  SceneSpec s;
  const std::string w = "scene.";
  read(doc, "name", s.name, w);
  s.height = read_positive(doc, "height", s.height, w);
  s.width = read_positive(doc, "width", s.width, w);
  s.frames = read_positive(doc, "frames", s.frames, w);
  if (doc.contains("modality")) {
    const json& m = doc["modality"];
    reject_unknown(m, {"name", "bands"}, "scene.modality");
    read(m, "name", s.modality.name, "scene.modality.");
    s.modality.bands = read_positive(m, "bands", s.modality.bands, "scene.modality.");
  }
  read(doc, "noise_sigma", s.noise_sigma, w);
  read(doc, "object_size", s.object_size, w);
  read(doc, "max_speed", s.max_speed, w);
  read(doc, "amplitude", s.amplitude, w);
  read(doc, "period", s.period, w);
  read(doc, "distractor", s.distractor, w);
  read(doc, "ambiguity", s.ambiguity, w);
  read(doc, "distractor_amplitude", s.distractor_amplitude, w);
  read(doc, "distractor_period", s.distractor_period, w);
  read(doc, "target_signature", s.target_signature, w);
  read(doc, "distractor_signature", s.distractor_signature, w);
  read(doc, "background_signature", s.background_signature, w);
  if (s.noise_sigma < 0.0) throw ConfigError("'scene.noise_sigma' must be non-negative");
  if (!(s.object_size > 0.0)) throw ConfigError("'scene.object_size' must be positive");
  return s;
}

json scene_spec_to_json(const SceneSpec& s) {
  return {{"name", s.name},
          {"height", s.height},
          {"width", s.width},
          {"frames", s.frames},
          {"modality", {{"name", s.modality.name}, {"bands", s.modality.bands}}},
          {"noise_sigma", s.noise_sigma},
          {"object_size", s.object_size},
          {"max_speed", s.max_speed},
          {"amplitude", s.amplitude},
          {"period", s.period},
          {"distractor", s.distractor},
          {"ambiguity", s.ambiguity},
          {"distractor_amplitude", s.distractor_amplitude},
          {"distractor_period", s.distractor_period},
          {"target_signature", s.target_signature},
          {"distractor_signature", s.distractor_signature},
          {"background_signature", s.background_signature}};
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const json& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(doc.dump())));
  return buf;
}

}  // namespace spectrack
