#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spectrack/checkpoint.hpp"
#include "spectrack/config.hpp"
#include "spectrack/error.hpp"
#include "spectrack/metrics.hpp"
#include "spectrack/schedule.hpp"
#include "spectrack/sequence.hpp"
#include "spectrack/synthetic.hpp"
#include "spectrack/tracker.hpp"
#include "spectrack/train.hpp"

#ifndef SPECTRACK_VERSION
#define SPECTRACK_VERSION "0.0.0"
#endif

namespace spectrack::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> modality;
  std::optional<std::string> gate_mode;
  std::optional<double> alpha_fixed;
  std::string checkpoint;
  std::vector<std::string> data;
  std::string results;
  std::optional<std::size_t> bands;
  std::string metrics;
  std::size_t count = 1;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json read_json(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

/// Hash of a config without its output location, so reruns into another
/// directory share it.
std::string run_hash(json config) {
  config.erase("output_dir");
  return config_hash(config);
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    std::optional<std::uint64_t> seed, std::vector<std::string> outputs) {
  std::sort(outputs.begin(), outputs.end());
  const json manifest = {
      {"command", command},
      {"config", config},
      {"config_hash", run_hash(config)},
      {"seed", seed ? json(*seed) : json(nullptr)},
      {"versions",
       {{"spectrack", SPECTRACK_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"compiler", __VERSION__}}},
      {"outputs", outputs}};
  write_json(dir / "manifest.json", manifest);
}

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw ConfigError("--out is required");
  fs::create_directories(out);
  return out;
}

std::vector<fs::path> collect_sequences(const std::vector<fs::path>& roots,
                                        const std::optional<std::string>& modality) {
  std::vector<fs::path> paths;
  for (const auto& root : roots) {
    for (auto& p : list_sequences(root)) paths.push_back(std::move(p));
  }
  if (!modality) return paths;
  std::vector<fs::path> kept;
  for (const auto& p : paths) {
    std::string name;
    const auto bytes = read_file(p);
    decode_hcube(bytes, &name);
    if (name == *modality) kept.push_back(p);
  }
  return kept;
}

Modality resolve_modality(const Options& o, const Modality& fallback) {
  Modality m = fallback;
  if (o.modality) {
    m.name = *o.modality;
    const auto hot = ModalityRegistry::hot2024();
    if (hot.contains(m.name)) m.bands = hot.find(m.name).bands;
  }
  if (o.bands) m.bands = *o.bands;
  return m;
}

// ---------------------------------------------------------------- generate

int cmd_generate(const Options& o, std::ostream& out) {
  SceneSpec spec;
  json config = json::object();
  if (!o.config.empty()) {
    config = read_json(o.config);
    spec = parse_scene_spec(config);
  }
  spec.modality = resolve_modality(o, spec.modality);
  if (o.count == 0) throw ConfigError("--count must be positive");
  const fs::path dir = prepare_out(o.out);
  const std::uint64_t seed = o.seed.value_or(0);
  std::uint64_t state = seed;
  std::vector<std::string> outputs;
  for (std::size_t k = 0; k < o.count; ++k) {
    const std::uint64_t seq_seed = splitmix64(state);
    SequenceRecord rec = generate_synthetic_sequence(spec, seq_seed);
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "_%03zu", k);
    rec.name = spec.name + suffix;
    const fs::path path = dir / (rec.name + ".hcube");
    save_sequence(rec, path);
    for (const auto& p : {path, false_color_path(path), ground_truth_path(path)}) {
      outputs.push_back(p.filename().string());
    }
    out << "wrote " << path.string() << " (" << rec.size() << " frames, " << rec.modality.name
        << ":" << rec.modality.bands << ")\n";
  }
  json resolved = scene_spec_to_json(spec);
  resolved["count"] = o.count;
  write_manifest(dir, "generate", resolved, seed, outputs);
  return kExitOk;
}

// ------------------------------------------------------------------- train

int cmd_train(const Options& o, std::ostream& out) {
  if (o.config.empty()) throw ConfigError("--config is required");
  RunConfig rc = load_run_config(o.config);
  if (o.seed) rc.train.seed = *o.seed;
  if (o.gate_mode) rc.model.gate_mode = parse_gate_mode(*o.gate_mode);
  if (o.alpha_fixed) rc.model.alpha_fixed = *o.alpha_fixed;
  if (!o.out.empty()) rc.output_dir = o.out;
  rc.model.validate();
  if (rc.train_data.empty()) throw ConfigError("config key 'data.train' lists no paths");

  std::vector<SequenceRecord> sequences;
  for (const auto& p : collect_sequences(rc.train_data, o.modality)) {
    sequences.push_back(load_sequence(p));
  }
  if (sequences.empty()) throw IoError("no training sequences found");

  const fs::path dir = prepare_out(rc.output_dir.string());
  ParamSet params = init_model_params(rc.model, rc.train.seed);
  std::ostringstream csv;
  csv << "step,epoch,total,bce,iou,l1\n";
  TrainOptions opts = rc.options;
  opts.on_step = [&csv](const StepLog& s) {
    csv << s.step << ',' << s.epoch << ',' << fmt(s.loss.total) << ',' << fmt(s.loss.bce) << ','
        << fmt(s.loss.iou) << ',' << fmt(s.loss.l1) << '\n';
  };
  const auto log = train_model(params, rc.model, rc.train, sequences, rc.registry, opts);

  const json config = run_config_to_json(rc);
  Checkpoint ckpt{std::move(params),
                  {{"model", model_config_to_json(rc.model)},
                   {"seed", rc.train.seed},
                   {"steps", log.size()},
                   {"config_hash", run_hash(config)}}};
  save_checkpoint(ckpt, dir / "checkpoint.stck");
  write_text(dir / "loss.csv", csv.str());
  write_manifest(dir, "train", config, rc.train.seed, {"checkpoint.stck", "loss.csv"});
  out << "trained " << log.size() << " steps on " << sequences.size() << " sequences";
  if (!log.empty()) out << ", final loss " << fmt(log.back().loss.total);
  out << "\nwrote " << (dir / "checkpoint.stck").string() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- track

int cmd_track(const Options& o, std::ostream& out) {
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  if (o.data.empty()) throw ConfigError("--data is required");
  Checkpoint ckpt = load_checkpoint(o.checkpoint);
  if (!ckpt.meta.contains("model")) throw ConfigError("checkpoint has no model configuration");
  ModelConfig cfg = model_config_from_json(ckpt.meta["model"]);
  if (o.gate_mode) cfg.gate_mode = parse_gate_mode(*o.gate_mode);
  if (o.alpha_fixed) cfg.alpha_fixed = *o.alpha_fixed;
  cfg.validate();

  const fs::path dir = prepare_out(o.out);
  const TrackModel model(cfg, std::move(ckpt.params));
  const ModelPredictor predictor(model);
  const Tracker tracker(predictor, cfg);
  std::vector<fs::path> roots(o.data.begin(), o.data.end());
  std::vector<std::string> outputs;
  for (const auto& path : collect_sequences(roots, o.modality)) {
    const SequenceRecord seq = load_sequence(path);
    if (seq.modality.bands > cfg.bands) {
      throw DimensionError("sequence '" + seq.name + "' has " + std::to_string(seq.modality.bands) +
                           " bands, the model holds " + std::to_string(cfg.bands));
    }
    const TrackingResult result = tracker.track_sequence(seq);
    const std::string name = seq.name + ".json";
    save_result(result, dir / name);
    outputs.push_back(name);
    out << "tracked " << seq.name << " (" << seq.size() << " frames)\n";
  }
  json config = {{"checkpoint", fs::path(o.checkpoint).filename().string()},
                 {"model", model_config_to_json(cfg)},
                 {"modality", o.modality ? json(*o.modality) : json(nullptr)}};
  std::optional<std::uint64_t> seed;
  if (ckpt.meta.contains("seed")) seed = ckpt.meta["seed"].get<std::uint64_t>();
  write_manifest(dir, "track", config, seed, outputs);
  return kExitOk;
}

// -------------------------------------------------------------------- eval

std::vector<double> mean_curve(const std::vector<MetricCurve>& curves) {
  std::vector<double> acc(curves.front().values.size(), 0.0);
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c.values[i];
  }
  for (auto& v : acc) v /= static_cast<double>(curves.size());
  return acc;
}

struct Aggregate {
  std::vector<MetricCurve> success, precision;
  double mean_iou = 0.0;
  std::size_t frames = 0;
};

json summarize(const std::string& name, const Aggregate& a, std::vector<MetricCurve>* plots) {
  MetricCurve s{name, a.success.front().thresholds, mean_curve(a.success), 0.0};
  MetricCurve p{name, a.precision.front().thresholds, mean_curve(a.precision), 0.0};
  for (const auto& c : a.success) s.summary += c.summary;
  for (const auto& c : a.precision) p.summary += c.summary;
  const double n = static_cast<double>(a.success.size());
  s.summary /= n;
  p.summary /= n;
  plots[0].push_back(s);
  plots[1].push_back(p);
  return {{"sequences", a.success.size()},
          {"frames", a.frames},
          {"auc", s.summary},
          {"dp20", p.summary},
          {"mean_iou", a.mean_iou / n},
          {"success_curve", s.values},
          {"precision_curve", p.values}};
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (o.results.empty()) throw ConfigError("--results is required");
  if (o.data.empty()) throw ConfigError("--data is required");
  std::vector<fs::path> files;
  if (fs::is_directory(o.results)) {
    for (const auto& e : fs::directory_iterator(o.results)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && e.path().extension() == ".json" && name != "manifest.json" &&
          name != "metrics.json") {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.emplace_back(o.results);
  }

  json per_sequence = json::array();
  std::map<std::string, Aggregate> by_modality;
  Aggregate overall;
  for (const auto& f : files) {
    const TrackingResult result = load_result(f);
    if (o.modality && result.modality != *o.modality) continue;
    std::optional<fs::path> gt_path;
    for (const auto& root : o.data) {
      const fs::path base = fs::is_directory(root) ? fs::path(root) / (result.sequence + ".hcube")
                                                   : fs::path(root);
      if (base.stem() == result.sequence && fs::exists(ground_truth_path(base))) {
        gt_path = ground_truth_path(base);
        break;
      }
    }
    if (!gt_path) throw IoError("no ground truth for sequence '" + result.sequence + "'");
    const std::vector<Box> gt = load_ground_truth(*gt_path);
    const SequenceScore score = score_sequence(result, gt);
    per_sequence.push_back({{"sequence", score.sequence},
                            {"modality", score.modality},
                            {"frames", score.ious.size()},
                            {"auc", score.auc},
                            {"dp20", score.dp20},
                            {"mean_iou", score.mean_iou}});
    for (Aggregate* a : {&by_modality[score.modality], &overall}) {
      a->success.push_back(success_auc(score.ious));
      a->precision.push_back(precision_curve(score.center_errors));
      a->mean_iou += score.mean_iou;
      a->frames += score.ious.size();
    }
  }
  if (overall.success.empty()) throw IoError("no tracking results to evaluate");

  const fs::path dir = prepare_out(o.out);
  std::vector<MetricCurve> plots[2];
  json modalities = json::object();
  for (const auto& [name, agg] : by_modality) modalities[name] = summarize(name, agg, plots);
  json overall_json = summarize("overall", overall, plots);
  const json metrics = {{"sequences", per_sequence},
                        {"modalities", modalities},
                        {"overall", overall_json},
                        {"success_thresholds", overall.success.front().thresholds},
                        {"precision_thresholds", overall.precision.front().thresholds}};
  write_json(dir / "metrics.json", metrics);
  emit_plot(plots[0], dir / "success", "Success plot");
  emit_plot(plots[1], dir / "precision", "Precision plot");
  json config = {{"modality", o.modality ? json(*o.modality) : json(nullptr)},
                 {"results", files.size()}};
  write_manifest(dir, "eval", config, o.seed,
                 {"metrics.json", "success.csv", "success.svg", "precision.csv", "precision.svg"});
  out << "AUC " << fmt(overall_json["auc"].get<double>()) << "  DP@20 "
      << fmt(overall_json["dp20"].get<double>()) << " over " << files.size() << " results\n";
  return kExitOk;
}

// ----------------------------------------------------------------- inflate

int cmd_inflate(const Options& o, std::ostream& out) {
  if (o.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  if (!o.bands || *o.bands == 0) throw ConfigError("--bands must be a positive integer");
  Checkpoint ckpt = load_checkpoint(o.checkpoint);
  if (!ckpt.params.contains(tok::kEmbedFc)) {
    throw ConfigError("checkpoint has no '" + std::string(tok::kEmbedFc) + "' block");
  }
  const Matrix inflated = inflate_embedding(ckpt.params.at(tok::kEmbedFc), *o.bands);
  if (ckpt.params.contains(tok::kEmbedHsi)) {
    ckpt.params.set(tok::kEmbedHsi, inflated);
  } else {
    ckpt.params.add(tok::kEmbedHsi, inflated);
  }
  if (ckpt.params.contains(tok::kBiasFc)) {
    const Matrix b = ckpt.params.at(tok::kBiasFc);
    if (ckpt.params.contains(tok::kBiasHsi)) {
      ckpt.params.set(tok::kBiasHsi, b);
    } else {
      ckpt.params.add(tok::kBiasHsi, b);
    }
  }
  if (ckpt.meta.contains("model")) ckpt.meta["model"]["bands"] = *o.bands;
  ckpt.meta["inflated_from"] = fs::path(o.checkpoint).filename().string();
  const fs::path dir = prepare_out(o.out);
  save_checkpoint(ckpt, dir / "inflated.stck");
  json config = {{"checkpoint", fs::path(o.checkpoint).filename().string()}, {"bands", *o.bands}};
  write_manifest(dir, "inflate", config, o.seed, {"inflated.stck"});
  out << "wrote " << (dir / "inflated.stck").string() << " (" << *o.bands << " bands)\n";
  return kExitOk;
}

// -------------------------------------------------------------------- plot

int cmd_plot(const Options& o, std::ostream& out) {
  if (o.metrics.empty()) throw ConfigError("--metrics is required");
  const json m = read_json(o.metrics);
  if (!m.contains("modalities") || !m.contains("overall") || !m.contains("success_thresholds") ||
      !m.contains("precision_thresholds")) {
    throw ParseError("'" + o.metrics + "' is not a metrics file");
  }
  std::vector<MetricCurve> success, precision;
  auto add = [&](const std::string& name, const json& s) {
    success.push_back({name, m["success_thresholds"].get<std::vector<double>>(),
                       s.at("success_curve").get<std::vector<double>>(), s.at("auc").get<double>()});
    precision.push_back({name, m["precision_thresholds"].get<std::vector<double>>(),
                         s.at("precision_curve").get<std::vector<double>>(),
                         s.at("dp20").get<double>()});
  };
  for (const auto& [name, s] : m["modalities"].items()) add(name, s);
  add("overall", m["overall"]);
  const fs::path dir = prepare_out(o.out);
  emit_plot(success, dir / "success", "Success plot");
  emit_plot(precision, dir / "precision", "Precision plot");
  json config = {{"metrics", fs::path(o.metrics).filename().string()}};
  write_manifest(dir, "plot", config, o.seed,
                 {"success.csv", "success.svg", "precision.csv", "precision.svg"});
  out << "wrote " << (dir / "success.svg").string() << " and " << (dir / "precision.svg").string()
      << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperspectral Siamese tracking toolkit", "spectrack"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPECTRACK_VERSION);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto* gen = app.add_subcommand("generate", "Synthesize HCUBE sequences from a scene spec");
  gen->add_option("--config", o.config, "Scene spec JSON")->check(CLI::ExistingFile);
  gen->add_option("--modality", o.modality, "Modality name (VIS, NIR, RedNIR or custom)");
  gen->add_option("--bands", o.bands, "Band count override");
  gen->add_option("--count", o.count, "Number of sequences");
  common(gen);

  auto* train = app.add_subcommand("train", "Train a model; writes a checkpoint and loss log");
  train->add_option("--config", o.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--modality", o.modality, "Train on this modality only");
  train->add_option("--gate-mode", o.gate_mode, "content or positional");
  train->add_option("--alpha-fixed", o.alpha_fixed, "Constant fusion weight in [0, 1]");
  common(train);

  auto* track = app.add_subcommand("track", "Track sequences with a checkpoint");
  track->add_option("--checkpoint", o.checkpoint, "STCK1 checkpoint")->required()->check(CLI::ExistingFile);
  track->add_option("--data", o.data, "Sequence files or directories")->required();
  track->add_option("--modality", o.modality, "Only sequences of this modality");
  track->add_option("--gate-mode", o.gate_mode, "content or positional");
  track->add_option("--alpha-fixed", o.alpha_fixed, "Constant fusion weight in [0, 1]");
  common(track);

  auto* eval = app.add_subcommand("eval", "Score tracking results against ground truth");
  eval->add_option("--results", o.results, "Result file or directory")->required();
  eval->add_option("--data", o.data, "Directories or sequence files holding ground truth")->required();
  eval->add_option("--modality", o.modality, "Only results of this modality");
  common(eval);

  auto* inflate = app.add_subcommand("inflate", "Inflate false-colour embedding weights to B bands");
  inflate->add_option("--checkpoint", o.checkpoint, "Source checkpoint")->required()->check(CLI::ExistingFile);
  inflate->add_option("--bands", o.bands, "Target band count")->required();
  common(inflate);

  auto* plot = app.add_subcommand("plot", "Render success and precision plots from metrics");
  plot->add_option("--metrics", o.metrics, "metrics.json from eval")->required()->check(CLI::ExistingFile);
  common(plot);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SPECTRACK_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (track->parsed()) return cmd_track(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (inflate->parsed()) return cmd_inflate(o, out);
    return cmd_plot(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace spectrack::cli
