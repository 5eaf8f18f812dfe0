#include "spectrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spectrack/error.hpp"

namespace spectrack {

CropWindow template_window(const Box& box) noexcept {
  return {box.cx(), box.cy(), kTemplateFactor * std::max(box.w, box.h)};
}

CropWindow search_window(const Box& box) noexcept {
  return {box.cx(), box.cy(), kSearchFactor * std::max(box.w, box.h)};
}

CropInput make_crop(const HsiCube& hsi, const HsiCube& fc, const CropWindow& window,
                    std::size_t out_size, const ModelConfig& cfg) {
  return prepare_crop(crop_resample(fc, window.cx, window.cy, window.side, out_size),
                      crop_resample(hsi, window.cx, window.cy, window.side, out_size), cfg);
}

std::array<double, 4> box_in_window(const Box& box, const CropWindow& w) noexcept {
  const double x0 = w.cx - w.side / 2.0, y0 = w.cy - w.side / 2.0;
  return {(box.x - x0) / w.side, (box.y - y0) / w.side, (box.right() - x0) / w.side,
          (box.bottom() - y0) / w.side};
}

Box box_from_window(const std::array<double, 4>& c, const CropWindow& w,
                    std::size_t out_size) noexcept {
  const double scale = w.side / static_cast<double>(out_size);
  const double x0 = w.cx - w.side / 2.0, y0 = w.cy - w.side / 2.0;
  const double x1 = x0 + c[0] * scale, y1 = y0 + c[1] * scale;
  const double x2 = x0 + c[2] * scale, y2 = y0 + c[3] * scale;
  return {x1, y1, x2 - x1, y2 - y1};
}

TokenGrid ModelPredictor::encode_template(const CropInput& templ) const {
  return model_.encode_template(templ);
}

BoxPrediction ModelPredictor::predict(const TokenGrid& templ, const CropInput& search,
                                      const SearchContext&) const {
  return model_.predict_search(templ, search);
}

Matrix hanning_window(std::size_t grid_h, std::size_t grid_w) {
  auto hann = [](std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = std::min(i, n - 1 - i);  // exact symmetry
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k + 1) /
                                  static_cast<double>(n + 1));
    }
    return w;
  };
  const auto wy = hann(grid_h), wx = hann(grid_w);
  Matrix out(grid_h, grid_w);
  for (std::size_t i = 0; i < grid_h; ++i)
    for (std::size_t j = 0; j < grid_w; ++j) out(i, j) = wy[i] * wx[j];
  return out;
}

std::size_t select_cell(const Matrix& cls, const Matrix& window) {
  require_shape(cls.size() == window.size() && cls.size() > 0, "select_cell", cls, window);
  std::size_t best = 0;
  double best_score = cls[0] * window[0];
  for (std::size_t i = 1; i < cls.size(); ++i) {
    const double s = cls[i] * window[i];
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

Tracker::Tracker(const SearchPredictor& predictor, ModelConfig cfg, TrackerOptions options)
    : predictor_(predictor),
      cfg_(cfg),
      options_(options),
      window_(hanning_window(cfg.search_grid(), cfg.search_grid())) {
  cfg_.validate();
  if (!(options_.scale_rate >= 0.0 && options_.scale_rate <= 1.0)) {
    throw ConfigError("tracker: scale_rate must lie in [0, 1]");
  }
}

TrackerState Tracker::init(const HsiCube& hsi, const HsiCube& fc, const Box& box) const {
  if (!(box.w > 0.0 && box.h > 0.0)) throw DomainError("tracker: initial box has no area");
  TrackerState s;
  s.template_tokens = predictor_.encode_template(
      make_crop(hsi, fc, template_window(box), cfg_.template_size, cfg_));
  s.prev_box = box;
  s.frame_index = 0;
  return s;
}

std::pair<TrackerState, Box> Tracker::track_step(const TrackerState& state, const HsiCube& hsi,
                                                 const HsiCube& fc) const {
  TrackerState next = state;
  next.frame_index = state.frame_index + 1;
  const CropWindow window = search_window(state.prev_box);
  const CropInput crop = make_crop(hsi, fc, window, cfg_.search_size, cfg_);
  const BoxPrediction pred =
      predictor_.predict(state.template_tokens, crop, SearchContext{window, next.frame_index});
  const std::size_t cell = select_cell(pred.cls, window_);
  Box box = box_from_window(decode_box(pred, cell, cfg_.search_size), window, cfg_.search_size);
  const double r = options_.scale_rate;
  box = Box::from_center(box.cx(), box.cy(), (1.0 - r) * state.prev_box.w + r * box.w,
                         (1.0 - r) * state.prev_box.h + r * box.h);

  const double fw = static_cast<double>(hsi.width()), fh = static_cast<double>(hsi.height());
  const double x1 = std::clamp(box.x, 0.0, fw), x2 = std::clamp(box.right(), 0.0, fw);
  const double y1 = std::clamp(box.y, 0.0, fh), y2 = std::clamp(box.bottom(), 0.0, fh);
  if (x2 > x1 && y2 > y1) {
    box = {x1, y1, x2 - x1, y2 - y1};
    next.lost = false;
  } else {
    const double w = std::min(state.prev_box.w, fw), h = std::min(state.prev_box.h, fh);
    const double cx = std::clamp(box.cx(), w / 2.0, fw - w / 2.0);
    const double cy = std::clamp(box.cy(), h / 2.0, fh - h / 2.0);
    box = Box::from_center(cx, cy, w, h);
    next.lost = true;
  }
  next.prev_box = box;
  return {std::move(next), box};
}

TrackingResult Tracker::track_sequence(const SequenceRecord& seq) const {
  if (seq.frames.empty()) throw DimensionError("track_sequence: empty sequence");
  TrackingResult result;
  result.sequence = seq.name;
  result.modality = seq.modality.name;
  TrackerState state = init(seq.frames[0], seq.false_color[0], seq.gt_boxes[0]);
  result.boxes.push_back(seq.gt_boxes[0]);
  for (std::size_t t = 1; t < seq.frames.size(); ++t) {
    auto [next, box] = track_step(state, seq.frames[t], seq.false_color[t]);
    state = std::move(next);
    result.boxes.push_back(box);
  }
  return result;
}

}  // namespace spectrack
