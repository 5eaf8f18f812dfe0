// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "spectrack/checkpoint.hpp"
#include "spectrack/grad_check.hpp"
#include "spectrack/metrics.hpp"
#include "spectrack/sequence.hpp"
#include "spectrack/synthetic.hpp"
#include "spectrack/tokenizer.hpp"
#include "spectrack/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spectrack;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void jitter(ParamSet& params, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  for (auto& e : params)
    for (double& v : e.value.data()) v += n(rng);
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "spectrack %s: %s\n", args.front().c_str(), err.str().c_str());
  return code;
}

void write_text(const fs::path& p, const std::string& text) {
  std::FILE* f = std::fopen(p.string().c_str(), "w");
  std::fputs(text.c_str(), f);
  std::fclose(f);
}

bool same_bytes(const fs::path& a, const fs::path& b) { return read_file(a) == read_file(b); }

// Naive patch embedding: token (gy, gx) = bias + sum over bands < used and
// patch pixels of value · E[band·P² + row·P + col].
Matrix naive_embed(const HsiCube& cube, std::size_t used, const Matrix& e, const Matrix& bias,
                   std::size_t p) {
  const std::size_t gh = cube.height() / p, gw = cube.width() / p;
  Matrix out(gh * gw, e.cols());
  for (std::size_t gy = 0; gy < gh; ++gy)
    for (std::size_t gx = 0; gx < gw; ++gx)
      for (std::size_t j = 0; j < e.cols(); ++j) {
        double s = bias(0, j);
        for (std::size_t b = 0; b < used; ++b)
          for (std::size_t y = 0; y < p; ++y)
            for (std::size_t x = 0; x < p; ++x)
              s += static_cast<double>(cube.at(b, gy * p + y, gx * p + x)) * e(b * p * p + y * p + x, j);
        out(gy * gw + gx, j) = s;
      }
  return out;
}

double box_overlap(const Box& a, const Box& b) {
  const double w = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const double h = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  return w * h;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------

Verdict gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t probes = 0;
  std::string worst_block;
  bool ok = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ModelConfig cfg = fixture::desk_config(25);
    std::mt19937_64 rng(seed);
    ParamSet params = init_model_params(cfg, seed);
    jitter(params, rng, 0.05);
    const std::size_t used = seed % 2 ? 16 : 25;
    TrainingSample sample{fixture::random_crop(cfg, 64, used, rng), fixture::random_crop(cfg, 128, used, rng), {}};
    std::uniform_real_distribution<double> centre(0.35, 0.65), half(0.06, 0.2);
    const double cx = centre(rng), cy = centre(rng), hw = half(rng), hh = half(rng);
    sample.target = {cx - hw, cy - hh, cx + hw, cy + hh};
    const TrainConfig tcfg;
    const ScalarLoss f = [&](ParamBinder& b) { return sample_loss(b, cfg, tcfg, sample).total; };
    GradCheckOptions opt;
    opt.eps = 1e-5;
    opt.tol = 1e-4;
    opt.max_probes_per_block = 6;
    opt.seed = seed;
    const GradCheckReport r = grad_check(f, params, opt);
    ok = ok && r.passed;
    for (const auto& b : r.blocks) {
      probes += b.probes;
      if (b.max_rel_error > worst) worst = b.max_rel_error, worst_block = b.name;
    }
  }
  const double t = seconds_since(t0);
  return {ok && t < 120.0, fmt("max rel err %.2e (%s) over 10 seeds, %zu probes, %.1f s", worst,
                              worst_block.c_str(), probes, t)};
}

Verdict alpha_endpoints() {
  std::mt19937_64 rng(21);
  bool ok = true;
  std::size_t compared = 0;
  for (double a : {1.0, 0.0}) {
    ModelConfig cfg = fixture::desk_config(16);
    cfg.alpha_fixed = a;
    ParamSet params = init_model_params(cfg, 21);
    jitter(params, rng, 0.05);
    const TrackModel model(cfg, params);
    const HsiCube fc_t = fixture::random_cube(3, 64, 64, rng), fc_s = fixture::random_cube(3, 128, 128, rng);
    const HsiCube hs_t = fixture::random_cube(16, 64, 64, rng), hs_s = fixture::random_cube(16, 128, 128, rng);
    const HsiCube zero_fc_t(3, 64, 64), zero_fc_s(3, 128, 128), zero_hs_t(16, 64, 64), zero_hs_s(16, 128, 128);
    const auto full = model.predict_search(model.encode_template(prepare_crop(fc_t, hs_t, cfg)),
                                           prepare_crop(fc_s, hs_s, cfg));
    const auto zeroed =
        a == 1.0 ? model.predict_search(model.encode_template(prepare_crop(fc_t, zero_hs_t, cfg)),
                                        prepare_crop(fc_s, zero_hs_s, cfg))
                 : model.predict_search(model.encode_template(prepare_crop(zero_fc_t, hs_t, cfg)),
                                        prepare_crop(zero_fc_s, hs_s, cfg));
    ok = ok && full.cls == zeroed.cls && full.offsets == zeroed.offsets;
    ++compared;
  }

  // Same property through the command line: tracking output files must not
  // change when the ignored planes are zeroed on disk.
  oracle::TempDir dir("accept_alpha");
  const fs::path root = dir.path();
  write_text(root / "scene.json", R"({"name": "amb", "frames": 6})");
  ok = ok && cli({"generate", "--config", (root / "scene.json").string(), "--modality", "VIS", "--count", "2",
                  "--seed", "31", "--out", (root / "data").string()}) == 0;
  write_text(root / "run.json",
             json{{"model", {{"d", 16}, {"heads", 2}, {"backbone_blocks", 1}, {"seed", 4}}},
                  {"modalities", {{{"name", "VIS"}, {"bands", 16}}}},
                  {"data", {{"train", {(root / "data").string()}}}},
                  {"batch_size", 2},
                  {"samples_per_sequence", 2},
                  {"max_steps", 3}}
                 .dump());
  for (const char* a : {"1.0", "0.0"}) {
    const bool spatial = std::string(a) == "1.0";
    const fs::path out = root / (spatial ? "a1" : "a0");
    ok = ok && cli({"train", "--config", (root / "run.json").string(), "--alpha-fixed", a, "--out",
                    (out / "train").string()}) == 0;
    const fs::path zeroed = out / "zeroed";
    fs::create_directories(zeroed);
    for (const auto& p : list_sequences(root / "data")) {
      SequenceRecord rec = load_sequence(p);
      for (auto& cube : spatial ? rec.frames : rec.false_color)
        for (auto& v : cube.data()) v = 0.0f;
      save_sequence(rec, zeroed / p.filename());
    }
    const std::string ckpt = (out / "train" / "checkpoint.stck").string();
    ok = ok && cli({"track", "--checkpoint", ckpt, "--data", (root / "data").string(), "--alpha-fixed", a,
                    "--out", (out / "full").string()}) == 0;
    ok = ok && cli({"track", "--checkpoint", ckpt, "--data", zeroed.string(), "--alpha-fixed", a, "--out",
                    (out / "blank").string()}) == 0;
    for (const auto& p : list_sequences(root / "data")) {
      const std::string name = p.stem().string() + ".json";
      ok = ok && same_bytes(out / "full" / name, out / "blank" / name);
      ++compared;
    }
  }
  return {ok, fmt("alpha 1 and 0 bit-identical with the unused planes zeroed (%zu comparisons)", compared)};
}

Verdict inflation_oracle() {
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t bands : {3u, 6u, 15u, 16u, 25u}) {
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
      std::mt19937_64 rng(1000 * bands + trial);
      const Matrix e = oracle::random_matrix(3 * 256, 16, rng);
      const Matrix bias = oracle::random_matrix(1, 16, rng);
      const HsiCube rgb = fixture::random_cube(3, 48, 32, rng);
      HsiCube hsi(bands, 48, 32);
      for (std::size_t b = 0; b < bands; ++b)
        for (std::size_t y = 0; y < 48; ++y)
          for (std::size_t x = 0; x < 32; ++x) hsi.at(b, y, x) = rgb.at(b % 3, y, x);
      const Matrix got = embed_patches(extract_patches(hsi, 16), inflate_embedding(e, bands), bias).tokens;
      worst = std::max(worst, oracle::max_abs_diff(got, naive_embed(rgb, 3, e, bias, 16)));
      ++cases;
    }
  }
  return {worst < 1e-12, fmt("max |tokens(inflated, replicated) - tokens(rgb)| = %.2e over %zu cases", worst, cases)};
}

Verdict padding_oracle() {
  double worst = 0.0;
  for (std::size_t used : {3u, 15u, 16u, 24u}) {
    std::mt19937_64 rng(used);
    const Matrix e = oracle::random_matrix(25 * 256, 16, rng);
    const Matrix bias = oracle::random_matrix(1, 16, rng);
    const HsiCube cube = fixture::random_cube(used, 64, 64, rng);
    const Matrix got = embed_patches(extract_patches(pad_bands(cube, 25), 16), e, bias).tokens;
    worst = std::max(worst, oracle::max_abs_diff(got, naive_embed(cube, used, e, bias, 16)));
  }

  // One full epoch over 16-band sequences in a 25-band model.
  const ModelConfig cfg = fixture::desk_config(25);
  const ModalityRegistry registry({{"VIS", 16}, {"NIR", 25}});
  std::vector<SequenceRecord> seqs;
  for (std::uint64_t s = 0; s < 4; ++s) {
    SceneSpec spec;
    spec.frames = 10;
    seqs.push_back(generate_synthetic_sequence(spec, 40 + s));
  }
  ParamSet params = init_model_params(cfg, 40);
  std::mt19937_64 rng(40);
  jitter(params, rng, 0.01);
  const Matrix e_before = params.at(tok::kEmbedHsi);
  TrainConfig tcfg;
  tcfg.epochs = 1;
  tcfg.seed = 40;
  TrainOptions opts;
  opts.batch_size = 4;
  opts.samples_per_sequence = 4;
  std::size_t steps = 0, nonzero_padded = 0;
  double real_norm = 0.0;
  opts.on_gradients = [&](const ParamSet& g) {
    const Matrix& ge = g.at(tok::kEmbedHsi);
    for (std::size_t r = 0; r < ge.rows(); ++r)
      for (std::size_t c = 0; c < ge.cols(); ++c) {
        if (r >= 16 * 256) nonzero_padded += ge(r, c) != 0.0 ? 1 : 0;
        else real_norm += ge(r, c) * ge(r, c);
      }
    ++steps;
  };
  train_model(params, cfg, tcfg, seqs, registry, opts);
  const Matrix& e_after = params.at(tok::kEmbedHsi);
  std::size_t moved = 0;
  for (std::size_t r = 16 * 256; r < e_after.rows(); ++r)
    for (std::size_t c = 0; c < e_after.cols(); ++c) moved += e_after(r, c) != e_before(r, c) ? 1 : 0;
  const bool ok = worst < 1e-12 && steps == 4 && nonzero_padded == 0 && moved == 0 && real_norm > 0.0;
  return {ok, fmt("embed diff %.2e; %zu steps, %zu nonzero padded-row gradients, %zu padded weights moved",
                  worst, steps, nonzero_padded, moved)};
}

Verdict metric_oracles() {
  bool ok = true;
  const std::vector<double> ones(17, 1.0), half{0.5};
  ok = ok && success_auc(ones).summary == 1.0;
  ok = ok && std::abs(success_auc(half).summary - 26.0 / 51.0) < 1e-12;
  const std::vector<double> errs{0.0, 10.0, 30.0};
  ok = ok && std::abs(dp_at(errs, 20.0) - 2.0 / 3.0) < 1e-12;

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(1, 80), grid(0, 50), coin(0, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0), px(0.0, 60.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> ious(len(rng)), dists(len(rng));
    for (double& v : ious) v = coin(rng) == 0 ? grid(rng) / 50.0 : u(rng);
    for (double& v : dists) v = coin(rng) == 0 ? 20.0 : px(rng);
    worst = std::max(worst, std::abs(success_auc(ious).summary - oracle::brute_auc(ious)));
    worst = std::max(worst, std::abs(dp_at(dists, 20.0) - oracle::brute_dp(dists, 20.0)));
  }
  ok = ok && worst < 1e-12;
  return {ok, fmt("hand cases exact; max deviation from brute force %.2e over 1000 instances", worst)};
}

// Mean IoU after frame 0 plus gate statistics on object and background
// patches of search crops centred on the ground truth.
struct AblationScore {
  double mean_iou = 0.0;
  double alpha_object = 0.0;
  double alpha_background = 0.0;
};

AblationScore score_ablation(const ModelConfig& cfg, const ParamSet& params,
                             const std::vector<SequenceRecord>& test, const std::vector<SceneLayout>& layouts) {
  const TrackModel model(cfg, params);
  const ModelPredictor predictor(model);
  const Tracker tracker(predictor, cfg);
  std::vector<double> ious, obj, bg;
  for (std::size_t q = 0; q < test.size(); ++q) {
    const SequenceScore sc = score_sequence(tracker.track_sequence(test[q]), test[q].gt_boxes);
    ious.insert(ious.end(), sc.ious.begin() + 1, sc.ious.end());
    for (std::size_t f = 0; f < test[q].size(); f += 4) {
      const CropWindow w = search_window(test[q].gt_boxes[f]);
      const CropInput crop = make_crop(test[q].frames[f], test[q].false_color[f], w, cfg.search_size, cfg);
      const Matrix a = model.alpha(crop);
      const double cell = w.side / static_cast<double>(crop.grid_w);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const Box patch{w.cx - w.side / 2 + static_cast<double>(i % crop.grid_w) * cell,
                        w.cy - w.side / 2 + static_cast<double>(i / crop.grid_w) * cell, cell, cell};
        double cover = box_overlap(patch, layouts[q].target[f]);
        if (!layouts[q].distractor.empty()) cover += box_overlap(patch, layouts[q].distractor[f]);
        if (cover >= 0.5 * cell * cell) obj.push_back(a[i]);
        else if (cover == 0.0) bg.push_back(a[i]);
      }
    }
  }
  return {mean(ious), mean(obj), mean(bg)};
}

Verdict fusion_ablation() {
  const auto t0 = std::chrono::steady_clock::now();
  // The scenes must be ambiguous in false colour yet spectrally distinct.
  const SceneSpec probe;
  const Matrix filter = false_color_filter(probe.modality.bands);
  const auto target = default_target_signature(probe.modality.bands);
  const auto distractor = ambiguous_signature(filter, target);
  double fc_gap = 0.0;
  for (std::size_t r = 0; r < 3; ++r) {
    double s = 0.0;
    for (std::size_t b = 0; b < target.size(); ++b) s += filter(r, b) * (target[b] - distractor[b]);
    fc_gap = std::max(fc_gap, std::abs(s));
  }
  const double angle = spectral_angle_deg(target, distractor);
  bool ok = probe.ambiguity && probe.distractor && fc_gap < 1e-12 && angle > 5.0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::vector<SequenceRecord> train, test;
    std::vector<SceneLayout> layouts;
    for (std::uint64_t i = 0; i < 8; ++i) {
      SceneSpec spec;
      spec.frames = 24;
      train.push_back(generate_synthetic_sequence(spec, 1000 * seed + i));
    }
    for (std::uint64_t i = 0; i < 6; ++i) {
      SceneSpec spec;
      spec.frames = 32;
      test.push_back(generate_synthetic_sequence(spec, 1000 * seed + 500 + i));
      layouts.push_back(scene_layout(spec, 1000 * seed + 500 + i));
    }
    const ModalityRegistry registry({{"VIS", 16}});
    AblationScore scores[2];
    for (int variant = 0; variant < 2; ++variant) {
      ModelConfig cfg;
      cfg.d = 32;
      cfg.heads = 4;
      cfg.backbone_blocks = 1;
      cfg.bands = 16;
      if (variant == 1) cfg.alpha_fixed = 1.0;
      ParamSet params = init_model_params(cfg, seed);
      TrainConfig tcfg;
      tcfg.seed = seed;
      tcfg.epochs = 1000;
      TrainOptions opts;
      opts.batch_size = 4;
      opts.samples_per_sequence = 4;
      opts.max_steps = 500;
      train_model(params, cfg, tcfg, train, registry, opts);
      scores[variant] = score_ablation(cfg, params, test, layouts);
    }
    const AblationScore& content = scores[0];
    ok = ok && content.mean_iou > scores[1].mean_iou && content.alpha_object < content.alpha_background;
    per_seed += fmt(" [%.3f vs %.3f, alpha %.2f/%.2f]", content.mean_iou, scores[1].mean_iou,
                    content.alpha_object, content.alpha_background);
  }
  const double t = seconds_since(t0);
  ok = ok && t < 900.0;
  return {ok, fmt("angle %.1f deg; IoU content vs alpha=1, alpha object/background:", angle) + per_seed +
                  fmt(", %.0f s", t)};
}

Verdict cross_modality() {
  const ModalityRegistry registry = ModalityRegistry::hot2024();
  std::vector<SequenceRecord> train;
  std::vector<std::vector<SequenceRecord>> test(registry.modalities().size());
  for (std::size_t m = 0; m < registry.modalities().size(); ++m) {
    for (std::uint64_t i = 0; i < 4; ++i) {
      SceneSpec spec;
      spec.frames = 24;
      spec.modality = registry.modalities()[m];
      train.push_back(generate_synthetic_sequence(spec, 7000 + 100 * m + i));
    }
    for (std::uint64_t i = 0; i < 3; ++i) {
      SceneSpec spec;
      spec.frames = 32;
      spec.modality = registry.modalities()[m];
      test[m].push_back(generate_synthetic_sequence(spec, 7050 + 100 * m + i));
    }
  }
  ModelConfig cfg;
  cfg.d = 32;
  cfg.heads = 4;
  cfg.backbone_blocks = 1;
  cfg.bands = registry.max_bands();
  const ParamSet untrained = init_model_params(cfg, 3);
  ParamSet trained = untrained;
  TrainConfig tcfg;
  tcfg.seed = 3;
  tcfg.epochs = 1000;
  TrainOptions opts;
  opts.max_steps = 300;
  opts.samples_per_sequence = 4;
  train_model(trained, cfg, tcfg, train, registry, opts);

  auto modality_auc = [&](const ParamSet& params, std::size_t m) {
    const TrackModel model(cfg, params);
    const ModelPredictor predictor(model);
    const Tracker tracker(predictor, cfg);
    std::vector<double> aucs;
    for (const auto& seq : test[m]) aucs.push_back(score_sequence(tracker.track_sequence(seq), seq.gt_boxes).auc);
    return mean(aucs);
  };
  bool ok = true;
  std::string detail;
  for (std::size_t m = 0; m < registry.modalities().size(); ++m) {
    const double before = modality_auc(untrained, m), after = modality_auc(trained, m);
    ok = ok && after > before;
    detail += fmt("%s%s(%zu) %.3f -> %.3f", m ? ", " : "", registry.modalities()[m].name.c_str(),
                  registry.modalities()[m].bands, before, after);
  }
  return {ok, "AUC untrained -> trained: " + detail};
}

Verdict descent_check() {
  const ModelConfig cfg = fixture::desk_config(16);
  std::mt19937_64 rng(7);
  const SequenceRecord seq = generate_synthetic_sequence(SceneSpec{}, 7);
  const std::vector<TrainingSample> batch{random_training_sample(seq, cfg, SamplerOptions{}, rng)};
  ParamSet params = init_model_params(cfg, 7);
  MomentumSgd opt;
  TrainConfig tcfg;
  tcfg.seed = 7;
  std::vector<double> losses;
  for (int step = 0; step <= 200; ++step) losses.push_back(train_step(batch, params, opt, cfg, tcfg).total);
  return {losses[200] < 0.5 * losses[0], fmt("loss %.4f at step 0, %.4f at step 200 (ratio %.3f)", losses[0],
                                            losses[200], losses[200] / losses[0])};
}

Verdict determinism() {
  oracle::TempDir dir("accept_det");
  const fs::path root = dir.path();
  write_text(root / "scene.json", R"({"name": "det", "frames": 8})");
  bool ok = cli({"generate", "--config", (root / "scene.json").string(), "--modality", "VIS", "--count", "2",
                 "--seed", "11", "--out", (root / "data").string()}) == 0;
  write_text(root / "run.json",
             json{{"model", {{"d", 16}, {"heads", 2}, {"backbone_blocks", 1}, {"seed", 9}}},
                  {"modalities", {{{"name", "VIS"}, {"bands", 16}}}},
                  {"data", {{"train", {(root / "data").string()}}}},
                  {"batch_size", 2},
                  {"samples_per_sequence", 2},
                  {"max_steps", 6}}
                 .dump());
  for (const char* run : {"a", "b"}) {
    const fs::path out = root / run;
    ok = ok && cli({"train", "--config", (root / "run.json").string(), "--out", (out / "train").string()}) == 0;
    ok = ok && cli({"track", "--checkpoint", (out / "train" / "checkpoint.stck").string(), "--data",
                    (root / "data").string(), "--out", (out / "track").string()}) == 0;
    ok = ok && cli({"eval", "--results", (out / "track").string(), "--data", (root / "data").string(), "--out",
                    (out / "eval").string()}) == 0;
  }
  if (!ok) return {false, "pipeline failed"};
  const bool ckpt = same_bytes(root / "a" / "train" / "checkpoint.stck", root / "b" / "train" / "checkpoint.stck");
  const bool metrics = same_bytes(root / "a" / "eval" / "metrics.json", root / "b" / "eval" / "metrics.json");
  const auto size = fs::file_size(root / "a" / "train" / "checkpoint.stck");
  return {ckpt && metrics, fmt("checkpoint (%ju bytes) %s, metrics.json %s", static_cast<std::uintmax_t>(size),
                               ckpt ? "identical" : "differs", metrics ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient suite", gradient_suite},   {2, "alpha endpoints", alpha_endpoints},
      {3, "inflation oracle", inflation_oracle}, {4, "padding oracle", padding_oracle},
      {5, "metric oracles", metric_oracles},   {6, "fusion ablation", fusion_ablation},
      {7, "cross-modality", cross_modality},   {8, "descent check", descent_check},
      {9, "determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
